"""The indexification rewriting schema over MiniImp ASTs.

Eight rules, each rewriting exactly one site:

  R3  retype a str/float declaration (variable, parameter, return) to index<t>
  R4  fold an in-garden literal at an index-expecting position to its index
  R5  replace an out-of-garden literal at an index-expecting position by bot
  R6  rename a call to an operator in F+ to its indexed version (i_*)
  R7  wrap a still-raw argument of an indexed call in idx(...)
  R8  wrap an index-valued argument of an unindexed external call in unidx(...)
  R9  wrap an unindexed call result assigned to an indexed target in idx(...)
  R10 wrap an indexed call result assigned to a raw target in unidx(...)

R4/R5 apply only where an index is expected (indexed-call arguments, targets
with indexed declarations): a literal feeding an unindexed operator stays raw,
since that operator still computes on real values.  Guards consult declared
types - never rewrite state - so every redex order reaches the same normal
form; confluence_probe checks exactly that.  R9/R10 wait until no R7/R8 redex
remains in the same call.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from .iot import REGISTRY, GardenDim, IndexedOperatorTable
from .lang.ast import (
    BOT,
    Assert,
    Assign,
    BinOp,
    BotLiteral,
    Call,
    Decl,
    Expr,
    ExprStmt,
    FunctionDef,
    If,
    Literal,
    Program,
    Return,
    Stmt,
    TypeTag,
    UnOp,
    Value,
    Var,
    While,
    index_of,
    is_index,
)
from .lang.typecheck import typecheck


class RewriteError(Exception):
    pass


class StaleRedex(RewriteError):
    """The redex guard no longer holds at its site; caller should re-scan."""


INTRINSICS = ("idx", "unidx")

RULES = ("R3", "R4", "R5", "R6", "R7", "R8", "R9", "R10")


@dataclass
class RewriteConfig:
    indexed_types: set
    f_plus: set
    gardens: dict
    tables: dict  # indexed name (i_*) -> IndexedOperatorTable
    registry: dict = None

    def __post_init__(self):
        if self.registry is None:
            self.registry = REGISTRY
        for name in self.f_plus:
            if "i_" + name not in self.tables:
                raise RewriteError(f"operator {name!r} in F+ has no table")
        for t in self.indexed_types:
            if t not in self.gardens:
                raise RewriteError(f"indexed type {t!r} has no garden")

    def table_for(self, callee: str) -> IndexedOperatorTable | None:
        """The table governing a call, whether or not R6 renamed it yet."""
        if callee in self.tables:
            return self.tables[callee]
        if callee in self.f_plus:
            return self.tables["i_" + callee]
        return None


@dataclass(frozen=True)
class Redex:
    rule: str
    path: tuple
    arg: int | None = None  # argument position for R7/R8

    def __repr__(self):
        extra = f"#{self.arg}" if self.arg is not None else ""
        return f"<{self.rule}{extra} at {'/'.join(map(str, self.path))}>"


@dataclass(frozen=True)
class IndexationResult:
    program: Program
    gardens: dict
    tables: dict
    name_map: dict  # original operator name -> indexed name


# ---------------------------------------------------------------------------
# Paths: locate and persistently replace AST nodes
# ---------------------------------------------------------------------------


def _get(node, path):
    if not path:
        return node
    step, rest = path[0], path[1:]
    kind = step[0]
    if kind == "fn":
        return _get(node.functions[step[1]], rest)
    if kind == "param":
        return _get(node.params[step[1]], rest)
    if kind == "rettype":
        return node  # R3 handles the slot itself
    if kind in ("body", "loop"):  # FunctionDef.body and While.body
        return _get(node.body[step[1]], rest)
    if kind == "then":
        return _get(node.then[step[1]], rest)
    if kind == "else":
        return _get(node.orelse[step[1]], rest)
    if kind in ("init", "cond", "value", "expr", "left", "right", "operand"):
        attr = {"init": "init", "cond": "cond", "value": "value", "expr": "expr",
                "left": "left", "right": "right", "operand": "operand"}[kind]
        return _get(getattr(node, attr), rest)
    if kind == "arg":
        return _get(node.args[step[1]], rest)
    raise RewriteError(f"bad path step {step!r}")


def _put(node, path, repl):
    """Return a copy of node with the subtree at path replaced."""
    if not path:
        return repl
    step, rest = path[0], path[1:]
    kind = step[0]
    if kind == "fn":
        fns = list(node.functions)
        fns[step[1]] = _put(fns[step[1]], rest, repl)
        return replace(node, functions=fns)
    if kind == "param":
        params = list(node.params)
        params[step[1]] = _put(params[step[1]], rest, repl)
        return replace(node, params=params)
    if kind in ("body", "loop"):
        body = list(node.body)
        body[step[1]] = _put(body[step[1]], rest, repl)
        return replace(node, body=body)
    if kind == "then":
        then = list(node.then)
        then[step[1]] = _put(then[step[1]], rest, repl)
        return replace(node, then=then)
    if kind == "else":
        orelse = list(node.orelse)
        orelse[step[1]] = _put(orelse[step[1]], rest, repl)
        return replace(node, orelse=orelse)
    if kind == "arg":
        args = list(node.args)
        args[step[1]] = _put(args[step[1]], rest, repl)
        return replace(node, args=args)
    if kind in ("init", "cond", "value", "expr", "left", "right", "operand"):
        child = getattr(node, kind)
        return replace(node, **{kind: _put(child, rest, repl)})
    raise RewriteError(f"bad path step {step!r}")


# ---------------------------------------------------------------------------
# Guard predicates
# ---------------------------------------------------------------------------


def declared_types(f: FunctionDef) -> dict:
    """name -> declared type, for params and every Decl in the function.

    Declarations retyped by R3 report their index type; either form counts as
    indexed below, which is what keeps the guards order-independent.
    """
    out = {p.name: p.type for p in f.params}

    def walk(body):
        for s in body:
            if isinstance(s, Decl):
                out[s.name] = s.type
            elif isinstance(s, If):
                walk(s.then)
                walk(s.orelse)
            elif isinstance(s, While):
                walk(s.body)

    walk(f.body)
    return out


class _Guards:
    def __init__(self, program: Program, cfg: RewriteConfig, fn: FunctionDef):
        self.program = program
        self.cfg = cfg
        self.decls = declared_types(fn)

    def declared_indexed(self, tag: TypeTag | None) -> bool:
        if tag is None:
            return False
        return is_index(tag) or tag in self.cfg.indexed_types

    def is_index_valued(self, e: Expr) -> bool:
        """Whether e denotes an index now or by declaration (the schema's
        indexedness check, extended to variables via their declared type)."""
        if isinstance(e, Literal):
            return is_index(e.tag)
        if isinstance(e, BotLiteral):
            return True
        if isinstance(e, Var):
            return self.declared_indexed(self.decls.get(e.name))
        if isinstance(e, Call):
            if e.name == "idx":
                return True
            if e.name == "unidx":
                return False
            t = self.cfg.table_for(e.name)
            if t is not None:
                return t.result_indexed
            user = self.program.function(e.name)
            if user is not None:
                return self.declared_indexed(user.return_type)
            return False  # external builtin results are raw
        return False

    def is_raw_indexed_literal(self, e: Expr) -> bool:
        return isinstance(e, Literal) and e.tag in self.cfg.indexed_types

    def arg_expectations(self, callee: str):
        """Per-position expectation: "index", "raw-indexed", or None.

        "index" positions want an index value (table garden dimensions and
        user-function parameters of indexed declared type); "raw-indexed"
        positions are external parameters of a to-be-indexed type that must
        keep receiving real values.
        """
        if callee in INTRINSICS:
            return None
        t = self.cfg.table_for(callee)
        if t is not None:
            return ["index" if isinstance(d, GardenDim) else None for d in t.dims]
        user = self.program.function(callee)
        if user is not None:
            return ["index" if self.declared_indexed(p.type) else None
                    for p in user.params]
        op = self.cfg.registry.get(callee)
        if op is not None:
            return ["raw-indexed" if at in self.cfg.indexed_types else None
                    for at in op.signature.arg_types]
        return None

    def unindexed_external(self, callee: str):
        """The registry entry for callee when it stays unindexed, else None."""
        if callee in INTRINSICS or self.cfg.table_for(callee) is not None:
            return None
        if self.program.function(callee) is not None:
            return None
        return self.cfg.registry.get(callee)


# ---------------------------------------------------------------------------
# Redex search
# ---------------------------------------------------------------------------


def find_redexes(p: Program, cfg: RewriteConfig) -> list[Redex]:
    """Every site matching a rule guard, in deterministic traversal order."""
    out: list[Redex] = []
    for fi, fn in enumerate(p.functions):
        g = _Guards(p, cfg, fn)
        base = (("fn", fi),)
        if fn.return_type in cfg.indexed_types:
            out.append(Redex("R3", base + (("rettype",),)))
        for pi, prm in enumerate(fn.params):
            if prm.type in cfg.indexed_types:
                out.append(Redex("R3", base + (("param", pi),)))
        _scan_block(fn.body, base, "body", g, out)
    return out


def _scan_block(body, base, kind, g, out):
    for i, s in enumerate(body):
        _scan_stmt(s, base + ((kind, i),), g, out)


def _scan_stmt(s: Stmt, path, g: _Guards, out):
    if isinstance(s, Decl):
        if s.type in g.cfg.indexed_types:
            out.append(Redex("R3", path))
        if s.init is not None:
            _scan_assign_rhs(s.name, s.init, path + (("init",),), g, out)
    elif isinstance(s, Assign):
        _scan_assign_rhs(s.name, s.value, path + (("value",),), g, out)
    elif isinstance(s, If):
        _scan_expr(s.cond, path + (("cond",),), g, out, context=None)
        _scan_block(s.then, path, "then", g, out)
        _scan_block(s.orelse, path, "else", g, out)
    elif isinstance(s, While):
        _scan_expr(s.cond, path + (("cond",),), g, out, context=None)
        _scan_block(s.body, path, "loop", g, out)
    elif isinstance(s, Assert):
        _scan_expr(s.cond, path + (("cond",),), g, out, context=None)
    elif isinstance(s, Return):
        if s.value is not None:
            fn_name = path[0]
            fn = g.program.functions[fn_name[1]]
            target_indexed = g.declared_indexed(fn.return_type)
            _scan_rhs_site(target_indexed, s.value, path + (("value",),), g, out)
    elif isinstance(s, ExprStmt):
        _scan_expr(s.expr, path + (("expr",),), g, out, context=None)
    # MakeSymbolic has no expressions


def _scan_assign_rhs(target: str, rhs: Expr, path, g: _Guards, out):
    target_indexed = g.declared_indexed(g.decls.get(target))
    _scan_rhs_site(target_indexed, rhs, path, g, out)


def _scan_rhs_site(target_indexed: bool, rhs: Expr, path, g: _Guards, out):
    """An assignment-like site: Eq. R4/R5 for direct literals, R9/R10 for
    direct calls crossing the indexed/unindexed boundary."""
    context = "index" if target_indexed else None
    if isinstance(rhs, Call):
        _maybe_boundary_wrap(target_indexed, rhs, path, g, out)
    _scan_expr(rhs, path, g, out, context=context)


def _maybe_boundary_wrap(target_indexed: bool, call: Call, path, g: _Guards, out):
    if call.name in INTRINSICS:
        return
    table = g.cfg.table_for(call.name)
    if table is None:
        op = g.unindexed_external(call.name)
        if op is None:
            return  # user functions are rewritten structurally, never wrapped
        returns_indexed_type = op.signature.return_type in g.cfg.indexed_types
        if target_indexed and returns_indexed_type:
            # R9 waits until R8 has unwrapped every argument of this call
            if not any(g.is_index_valued(a) for a in call.args):
                out.append(Redex("R9", path))
    else:
        if not target_indexed and table.result_indexed:
            # R10 mirrors R9: wait until every argument is in index form
            if not _has_pending_args(call, table, g):
                out.append(Redex("R10", path))


def _has_pending_args(call: Call, table, g: _Guards) -> bool:
    for i, (a, d) in enumerate(zip(call.args, table.dims)):
        if isinstance(d, GardenDim):
            if not g.is_index_valued(a) or g.is_raw_indexed_literal(a):
                return True
    return False


def _scan_expr(e: Expr, path, g: _Guards, out, context):
    """context is "index" when an index value is expected at this position."""
    if isinstance(e, Literal):
        if context == "index" and e.tag in g.cfg.indexed_types:
            garden = g.cfg.gardens[e.tag]
            if garden.index_or_bot(Value(e.tag, e.value)) is not BOT:
                out.append(Redex("R4", path))
            else:
                out.append(Redex("R5", path))
        return
    if isinstance(e, (BotLiteral, Var)):
        return
    if isinstance(e, UnOp):
        _scan_expr(e.operand, path + (("operand",),), g, out, context=None)
        return
    if isinstance(e, BinOp):
        if e.op in ("==", "!="):
            # equality against an index-valued side makes the other operand an
            # index position: literals fold (R4/R5), other raw values wrap (R7)
            sides = ((e.left, e.right, ("left",)), (e.right, e.left, ("right",)))
            for child, other, step in sides:
                child_path = path + (step,)
                if g.is_index_valued(other):
                    if g.is_raw_indexed_literal(child):
                        _scan_expr(child, child_path, g, out, context="index")
                        continue
                    if not g.is_index_valued(child) and not isinstance(child, Literal):
                        out.append(Redex("R7", child_path))
                _scan_expr(child, child_path, g, out, context=None)
            return
        _scan_expr(e.left, path + (("left",),), g, out, context=None)
        _scan_expr(e.right, path + (("right",),), g, out, context=None)
        return
    if isinstance(e, Call):
        if e.name in g.cfg.f_plus:
            out.append(Redex("R6", path))
        expectations = g.arg_expectations(e.name)
        for i, a in enumerate(e.args):
            want = expectations[i] if expectations and i < len(expectations) else None
            arg_path = path + (("arg", i),)
            if want == "index":
                if not g.is_index_valued(a) and not g.is_raw_indexed_literal(a):
                    out.append(Redex("R7", path, arg=i))
                _scan_expr(a, arg_path, g, out, context="index")
            elif want == "raw-indexed":
                if g.is_index_valued(a):
                    out.append(Redex("R8", path, arg=i))
                _scan_expr(a, arg_path, g, out, context=None)
            else:
                _scan_expr(a, arg_path, g, out, context=None)
        return
    raise RewriteError(f"cannot scan {e!r}")


# ---------------------------------------------------------------------------
# Rule application
# ---------------------------------------------------------------------------


def apply_rule(p: Program, r: Redex, cfg: RewriteConfig) -> Program:
    """Apply one rule at one site; raises StaleRedex if the guard is gone."""
    current = find_redexes(p, cfg)
    if r not in current:
        raise StaleRedex(f"{r!r} no longer applies")
    if r.rule == "R3":
        return _apply_r3(p, r, cfg)
    node = _get(p, r.path)
    if r.rule == "R4":
        garden = cfg.gardens[node.tag]
        idx = garden.index_or_bot(Value(node.tag, node.value))
        return _put(p, r.path, Literal(index_of(node.tag), idx))
    if r.rule == "R5":
        return _put(p, r.path, BotLiteral(index_of(node.tag)))
    if r.rule == "R6":
        return _put(p, r.path, replace(node, name="i_" + node.name))
    if r.rule == "R7":
        if r.arg is None:  # equality operand form: the site is the expression
            return _put(p, r.path, Call("idx", [node]))
        wrapped = Call("idx", [node.args[r.arg]])
        return _put(p, r.path + (("arg", r.arg),), wrapped)
    if r.rule == "R8":
        wrapped = Call("unidx", [node.args[r.arg]])
        return _put(p, r.path + (("arg", r.arg),), wrapped)
    if r.rule == "R9":
        return _put(p, r.path, Call("idx", [node]))
    if r.rule == "R10":
        return _put(p, r.path, Call("unidx", [node]))
    raise RewriteError(f"unknown rule {r.rule!r}")


def _apply_r3(p: Program, r: Redex, cfg: RewriteConfig) -> Program:
    last = r.path[-1]
    if last[0] == "rettype":
        fn = _get(p, r.path[:-1])
        return _put(p, r.path[:-1], replace(fn, return_type=index_of(fn.return_type)))
    if last[0] == "param":
        prm = _get(p, r.path)
        return _put(p, r.path, replace(prm, type=index_of(prm.type)))
    decl = _get(p, r.path)
    return _put(p, r.path, replace(decl, type=index_of(decl.type)))


def _ast_size(p: Program) -> int:
    n = 0

    def expr(e):
        nonlocal n
        n += 1
        if isinstance(e, BinOp):
            expr(e.left)
            expr(e.right)
        elif isinstance(e, UnOp):
            expr(e.operand)
        elif isinstance(e, Call):
            for a in e.args:
                expr(a)

    def block(body):
        nonlocal n
        for s in body:
            n += 1
            for attr in ("init", "value", "cond", "expr"):
                e = getattr(s, attr, None)
                if e is not None:
                    expr(e)
            if isinstance(s, If):
                block(s.then)
                block(s.orelse)
            elif isinstance(s, While):
                block(s.body)

    for f in p.functions:
        n += 1 + len(f.params)
        block(f.body)
    return n


def normalize(p: Program, cfg: RewriteConfig, order: str = "first",
              rng: random.Random | None = None) -> IndexationResult:
    """Rewrite to normal form and package gardens/tables with the result."""
    for name in cfg.tables:
        if p.function(name) is not None:
            raise RewriteError(f"program already defines {name!r}")
    cap = 10 * _ast_size(p) + 10
    cur = p
    steps = 0
    while True:
        redexes = find_redexes(cur, cfg)
        if not redexes:
            break
        steps += 1
        if steps > cap:
            raise RewriteError("rewriting did not terminate: schema bug")
        if order == "random":
            r = (rng or random).choice(redexes)
        else:
            r = redexes[0]
        cur = apply_rule(cur, r, cfg)
    extra = {t.indexed_name: t.indexed_signature() for t in cfg.tables.values()}
    typecheck(cur, extra_sigs=extra)
    return IndexationResult(
        program=cur,
        gardens=dict(cfg.gardens),
        tables=dict(cfg.tables),
        name_map={n: "i_" + n for n in sorted(cfg.f_plus)},
    )


@dataclass(frozen=True)
class ConfluenceReport:
    trials: int
    all_equal: bool
    distinct_normal_forms: int


def confluence_probe(p: Program, cfg: RewriteConfig, trials: int,
                     seed: int = 0) -> ConfluenceReport:
    """Normalize under `trials` random redex orders and compare normal forms."""
    if trials < 2:
        raise RewriteError("confluence probe needs at least 2 trials")
    from .lang.printer import print_program

    forms = {}
    for t in range(trials):
        rng = random.Random(seed * 1_000_003 + t)
        res = normalize(p, cfg, order="random", rng=rng)
        forms.setdefault(print_program(res.program), res.program)
    return ConfluenceReport(
        trials=trials,
        all_equal=len(forms) == 1,
        distinct_normal_forms=len(forms),
    )


# ---------------------------------------------------------------------------
# Indexed source emission
# ---------------------------------------------------------------------------


def _emit_table_fn(t: IndexedOperatorTable) -> str:
    from .lang.printer import print_type

    sig = t.indexed_signature()
    params = ", ".join(f"{print_type(ty)} s{i + 1}" for i, ty in enumerate(sig.arg_types))
    lines = [f"{print_type(sig.return_type)} {t.indexed_name}({params}) {{"]
    base = t.result.type_tag.name if t.result_indexed else None
    for key in sorted(t.rows):
        cell = t.rows[key]
        if cell is BOT:
            continue  # falls through to the catch-all
        conds = []
        for i, (d, k) in enumerate(zip(t.dims, key)):
            lit = f"{k}@{d.imap.type_tag.name}" if isinstance(d, GardenDim) else str(k)
            conds.append(f"s{i + 1} == {lit}")
        if t.result_indexed:
            ret = f"{cell}@{base}"
        else:
            from .garden import format_literal

            ret = format_literal(cell) if cell.tag.name != "str" \
                else f'"{format_literal(cell)}"'
        lines.append(f"  if ({' && '.join(conds)}) {{ return {ret}; }}")
    if t.result_indexed:
        lines.append(f"  return bot@{base};")
    else:
        # the textual encoding has no raw bottom; -1 stands in for a miss here,
        # the in-memory table keeps BOT as a distinct cell variant
        lines.append("  return -1;")
    lines.append("}")
    return "\n".join(lines)


def emit_indexed_source(result: IndexationResult) -> str:
    """Pretty-printed rewritten program plus the injected table definitions."""
    from .lang.printer import print_program

    parts = [print_program(result.program).rstrip("\n")]
    for name in sorted(result.tables):
        parts.append(_emit_table_fn(result.tables[name]))
    return "\n\n".join(parts) + "\n"
