"""MiniImp AST, type tags and runtime values.

MiniImp is a small C-flavoured imperative language: non-recursive functions
over int / float / bool / str scalars, plus the `index<t>` types that only
appear in rewritten programs.  Strings are byte strings with no encoding
normalisation.  AST nodes are plain dataclasses; structural equality ignores
derived type annotations so that two pipelines producing the same syntax
compare equal.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field


@dataclass(frozen=True)
class TypeTag:
    """A scalar type; `index` wraps exactly one non-index base type."""

    name: str
    base: TypeTag | None = None

    def __repr__(self) -> str:
        if self.name == "index":
            return f"index<{self.base.name}>"
        return self.name


INT = TypeTag("int")
FLOAT = TypeTag("float")
BOOL = TypeTag("bool")
STR = TypeTag("str")

SCALARS = {t.name: t for t in (INT, FLOAT, BOOL, STR)}


def index_of(base: TypeTag) -> TypeTag:
    if base.name == "index":
        raise ValueError("index types do not nest")
    return TypeTag("index", base)


def is_index(tag: TypeTag) -> bool:
    return tag.name == "index"


class Bottom:
    """The undefined value: any computation that leaves the garden."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "BOT"


BOT = Bottom()


class EscapedGarden(Exception):
    """Raised when execution consumes BOT (unindexing it or branching on it)."""


@dataclass(frozen=True)
class Value:
    """Tagged runtime value.

    raw is int / float / bool / bytes, or for index tags an int in
    [0, |garden|) or BOT.
    """

    tag: TypeTag
    raw: object

    def __repr__(self) -> str:
        return f"{self.raw!r}:{self.tag!r}"


def mk_int(n: int) -> Value:
    return Value(INT, int(n))


def mk_float(x: float) -> Value:
    return Value(FLOAT, float(x))


def mk_bool(b: bool) -> Value:
    return Value(BOOL, bool(b))


def mk_str(s: bytes | str) -> Value:
    if isinstance(s, str):
        s = s.encode("utf-8")
    return Value(STR, bytes(s))


def mk_index(tag: TypeTag, i) -> Value:
    return Value(tag, i)


def float_key(x: float) -> object:
    """Canonical dict key for a float, under value equality.

    All NaNs collapse to one garden entry (so domain errors stay usable as a
    single distinct value) and 0.0 / -0.0 collapse together, which keeps
    index equality aligned with float equality for every non-NaN value.
    """
    if x != x:
        return "nan"
    if x == 0.0:
        x = 0.0
    return struct.pack("<d", x)


def value_key(v: Value) -> object:
    if v.tag is FLOAT:
        return float_key(v.raw)
    return v.raw


def truthy(v: Value) -> bool:
    """C-style truthiness for concrete non-index values.

    Index values are resolved through the garden by the caller: BOT escapes,
    otherwise an index is as truthy as the value it denotes.
    """
    if v.tag is BOOL:
        return bool(v.raw)
    if v.tag is INT:
        return v.raw != 0
    if v.tag is FLOAT:
        return v.raw != 0.0
    if v.tag is STR:
        return len(v.raw) > 0
    raise TypeError(f"no truthiness for {v.tag!r}")


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(eq=True)
class Expr:
    pass


@dataclass(eq=False)
class Literal(Expr):
    tag: TypeTag
    value: object
    ty: TypeTag | None = field(default=None, compare=False, repr=False)

    def __eq__(self, other):
        # float literals compare under value_key so nan == nan structurally
        if not isinstance(other, Literal) or self.tag != other.tag:
            return False
        return value_key(Value(self.tag, self.value)) == value_key(Value(other.tag, other.value))

    def __repr__(self):
        return f"Literal(tag={self.tag!r}, value={self.value!r})"


@dataclass(eq=True)
class BotLiteral(Expr):
    """Undefined-value literal; only produced by the rewriter."""

    tag: TypeTag  # always an index type
    ty: TypeTag | None = field(default=None, compare=False, repr=False)


@dataclass(eq=True)
class Var(Expr):
    name: str
    ty: TypeTag | None = field(default=None, compare=False, repr=False)


@dataclass(eq=True)
class Call(Expr):
    name: str
    args: list[Expr]
    ty: TypeTag | None = field(default=None, compare=False, repr=False)


@dataclass(eq=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr
    ty: TypeTag | None = field(default=None, compare=False, repr=False)


@dataclass(eq=True)
class UnOp(Expr):
    op: str
    operand: Expr
    ty: TypeTag | None = field(default=None, compare=False, repr=False)


@dataclass(eq=True)
class Stmt:
    pass


@dataclass(eq=True)
class Decl(Stmt):
    name: str
    type: TypeTag
    init: Expr | None = None


@dataclass(eq=True)
class Assign(Stmt):
    name: str
    value: Expr


@dataclass(eq=True)
class If(Stmt):
    cond: Expr
    then: list[Stmt]
    orelse: list[Stmt]


@dataclass(eq=True)
class While(Stmt):
    cond: Expr
    body: list[Stmt]


@dataclass(eq=True)
class Assert(Stmt):
    cond: Expr


@dataclass(eq=True)
class Return(Stmt):
    value: Expr | None


@dataclass(eq=True)
class ExprStmt(Stmt):
    expr: Expr


@dataclass(eq=True)
class MakeSymbolic(Stmt):
    name: str


@dataclass(eq=True)
class Param:
    name: str
    type: TypeTag


@dataclass(eq=True)
class FunctionDef:
    name: str
    params: list[Param]
    return_type: TypeTag
    body: list[Stmt]


@dataclass(eq=True)
class Program:
    functions: list[FunctionDef]

    @property
    def main(self) -> FunctionDef:
        for f in self.functions:
            if f.name == "main":
                return f
        raise LookupError("program has no main function")

    def function(self, name: str) -> FunctionDef | None:
        for f in self.functions:
            if f.name == name:
                return f
        return None


class MiniImpError(Exception):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.msg = msg
        self.line = line
        self.col = col


class MiniImpSyntaxError(MiniImpError):
    pass


class MiniImpTypeError(MiniImpError):
    pass


# ---------------------------------------------------------------------------
# Layout: stable statement / branch numbering
# ---------------------------------------------------------------------------

# The rewriter never adds, removes or reorders statements, so pre-order
# numbering gives identical ids for a program and its rewritten form.  That is
# what makes coverage comparable across modes.


@dataclass(frozen=True)
class Layout:
    stmt_count: int
    branch_count: int  # number of branch *sites*; each has 2 edges
    stmt_ids: dict  # id(node) is unusable across rebuilds; keyed by path tuple


def walk_stmts(body: list[Stmt], path: tuple = ()):
    """Yield (path, stmt) in pre-order; path identifies a stmt across rebuilds."""
    for i, s in enumerate(body):
        here = path + (i,)
        yield here, s
        if isinstance(s, If):
            yield from walk_stmts(s.then, here + ("t",))
            yield from walk_stmts(s.orelse, here + ("e",))
        elif isinstance(s, While):
            yield from walk_stmts(s.body, here + ("b",))


def program_layout(p: Program) -> Layout:
    stmt_ids = {}
    branches = 0
    n = 0
    for f in p.functions:
        for path, s in walk_stmts(f.body, (f.name,)):
            stmt_ids[path] = n
            n += 1
            if isinstance(s, (If, While)):
                branches += 1
    return Layout(stmt_count=n, branch_count=branches, stmt_ids=stmt_ids)
