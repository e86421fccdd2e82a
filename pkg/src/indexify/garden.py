"""Garden construction: growing a finite value set from seeds and indexing it.

A garden is the per-type finite set of values the rewritten program is
restricted to.  Seeds are harvested from program constants (the empty string
is always seeded for str); builders are applied in rounds, each round working
from a snapshot of the garden at the start of that round, so a value admitted
in round i is reachable by at most i nested builder applications over the
seeds.  Index assignment is canonical - seeds in harvest order, then round by
round, builder by builder, argument tuples in lexicographic index order - so
two builds from the same inputs are bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .lang.ast import (
    BOOL,
    BOT,
    FLOAT,
    INT,
    STR,
    BinOp,
    BotLiteral,
    Call,
    EscapedGarden,
    Literal,
    Program,
    TypeTag,
    UnOp,
    Value,
    mk_str,
    value_key,
    walk_stmts,
)
from .lang.printer import print_float

SAT_LIMIT = 2**63 - 1


class GardenError(Exception):
    pass


@dataclass(frozen=True)
class OperatorSignature:
    name: str
    arg_types: tuple[TypeTag, ...]
    return_type: TypeTag

    @property
    def arity(self) -> int:
        return len(self.arg_types)


@dataclass
class SeedSet:
    per_type: dict[TypeTag, list[Value]] = field(default_factory=dict)

    def add(self, v: Value) -> None:
        bucket = self.per_type.setdefault(v.tag, [])
        key = value_key(v)
        if all(value_key(x) != key for x in bucket):
            bucket.append(v)

    def values(self, tag: TypeTag) -> list[Value]:
        return list(self.per_type.get(tag, []))


class IndexMap:
    """Dense bijection between one type's garden values and [0, n).

    BOT is out-of-band: it is never a key and is represented by the BOT
    sentinel, not by any integer.
    """

    def __init__(self, type_tag: TypeTag):
        self.type_tag = type_tag
        self._values: list[Value] = []
        self._index: dict[object, int] = {}
        self._generation: list[int] = []

    def __len__(self) -> int:
        return len(self._values)

    def values(self) -> list[Value]:
        return list(self._values)

    def admit(self, v: Value, generation: int = 0) -> tuple[int, bool]:
        """Insert v if new; returns (index, freshly_added)."""
        if v.tag != self.type_tag:
            raise GardenError(f"value {v!r} does not belong in a {self.type_tag!r} garden")
        key = value_key(v)
        if key in self._index:
            return self._index[key], False
        i = len(self._values)
        self._values.append(v)
        self._index[key] = i
        self._generation.append(generation)
        return i, True

    def index_or_bot(self, v: Value):
        """delta_bot: the index of v, or BOT if v is outside the garden."""
        return self._index.get(value_key(v), BOT)

    def value_at(self, i) -> Value:
        """delta_inv: the value at index i; BOT escapes, overflow is a bug."""
        if i is BOT:
            raise EscapedGarden()
        if not 0 <= i < len(self._values):
            raise GardenError(f"index {i} outside garden of size {len(self._values)}")
        return self._values[i]

    def generation_of(self, i: int) -> int:
        return self._generation[i]


def delta_bot(imap: IndexMap, v: Value):
    return imap.index_or_bot(v)


def delta_inv(imap: IndexMap, i) -> Value:
    return imap.value_at(i)


@dataclass(frozen=True)
class BuilderConfig:
    builders: tuple[OperatorSignature, ...] = ()
    k: int = 3
    max_str_len: int = 8
    mode: str = "ops"  # "ops" applies the builders; "kleene" enumerates strings

    def __post_init__(self):
        if self.k < 0:
            raise GardenError("k must be >= 0")
        if self.max_str_len < 1:
            raise GardenError("max_str_len must be >= 1")
        if self.mode not in ("ops", "kleene"):
            raise GardenError(f"unknown builder mode {self.mode!r}")


# ---------------------------------------------------------------------------
# Seed harvesting
# ---------------------------------------------------------------------------


def iter_literals(p: Program):
    """Yield every Literal in the program, in source order."""

    def from_expr(e):
        if isinstance(e, Literal):
            yield e
        elif isinstance(e, BinOp):
            yield from from_expr(e.left)
            yield from from_expr(e.right)
        elif isinstance(e, UnOp):
            yield from from_expr(e.operand)
        elif isinstance(e, Call):
            for a in e.args:
                yield from from_expr(a)
        elif isinstance(e, BotLiteral):
            return

    for f in p.functions:
        for _, s in walk_stmts(f.body):
            for e in _stmt_exprs(s):
                yield from from_expr(e)


def _stmt_exprs(s):
    for attr in ("init", "value", "cond", "expr"):
        e = getattr(s, attr, None)
        if e is not None:
            yield e


def harvest_seeds(p: Program, types: set[TypeTag]) -> SeedSet:
    """Collect every literal of the requested types, plus forced values.

    The empty string is always seeded for str so the garden has a
    representative for no-match results.
    """
    seeds = SeedSet()
    if STR in types:
        seeds.add(mk_str(b""))
    for lit in iter_literals(p):
        if lit.tag in types:
            seeds.add(Value(lit.tag, lit.value))
    return seeds


def harvest_int_pool(p: Program) -> tuple[int, ...]:
    """All int literals in the program, sorted: the raw table dimension pool."""
    pool = {lit.value for lit in iter_literals(p) if lit.tag is INT}
    return tuple(sorted(pool))


# ---------------------------------------------------------------------------
# Growth
# ---------------------------------------------------------------------------


def _admissible(v: Value, max_str_len: int) -> bool:
    if v.tag is STR:
        return len(v.raw) <= max_str_len
    return True


def extend(imap: IndexMap, op: OperatorSignature, evaluator=None, *,
           snapshot: list[Value] | None = None, max_str_len: int = 8,
           generation: int = 1) -> tuple[IndexMap, int]:
    """One builder pass: apply op to every argument tuple from the snapshot.

    Results already present, longer than max_str_len, or failing to evaluate
    are not admitted; the skip count is returned alongside the map.  All of
    op's argument types must equal the garden's type (builders are mono-typed).
    """
    if any(t != imap.type_tag for t in op.arg_types) or op.return_type != imap.type_tag:
        raise GardenError(f"{op.name} is not a builder for {imap.type_tag!r}")
    if evaluator is None:
        from .iot import eval_builtin as evaluator
    if snapshot is None:
        snapshot = imap.values()
    skips = 0
    for tup in _index_tuples(len(snapshot), op.arity):
        args = [snapshot[i] for i in tup]
        try:
            result = evaluator(op.name, args)
        except Exception:
            skips += 1
            continue
        if _admissible(result, max_str_len):
            imap.admit(result, generation)
        else:
            skips += 1
    return imap, skips


def _index_tuples(n: int, arity: int):
    if arity == 0 or n == 0:
        return
    tup = [0] * arity
    while True:
        yield tuple(tup)
        for i in range(arity - 1, -1, -1):
            tup[i] += 1
            if tup[i] < n:
                break
            tup[i] = 0
        else:
            return


def build_garden(seeds: SeedSet, cfg: BuilderConfig, evaluator=None,
                 types: set[TypeTag] | None = None) -> dict[TypeTag, IndexMap]:
    """Grow per-type gardens: k rounds over all builders, shared round snapshot."""
    if types is None:
        types = set(seeds.per_type)
    gardens: dict[TypeTag, IndexMap] = {}
    for tag in sorted(types, key=lambda t: t.name):
        imap = IndexMap(tag)
        for v in seeds.values(tag):
            imap.admit(v, 0)
        gardens[tag] = imap

    if cfg.mode == "kleene":
        if STR in gardens:
            _kleene_fill(gardens[STR], cfg.max_str_len)
        return gardens

    for rnd in range(1, cfg.k + 1):
        snapshots = {tag: imap.values() for tag, imap in gardens.items()}
        for op in cfg.builders:
            tag = op.return_type
            if tag not in gardens:
                raise GardenError(f"builder {op.name} needs a {tag!r} garden")
            extend(gardens[tag], op, evaluator,
                   snapshot=snapshots[tag], max_str_len=cfg.max_str_len,
                   generation=rnd)
    return gardens


def _kleene_fill(imap: IndexMap, max_len: int) -> None:
    """Admit every string over the seed byte alphabet up to max_len."""
    alphabet = sorted({b for v in imap.values() for b in v.raw})
    imap.admit(mk_str(b""), 1)
    level = [b""]
    for _ in range(max_len):
        nxt = []
        for s in level:
            for c in alphabet:
                t = s + bytes([c])
                nxt.append(t)
                imap.admit(mk_str(t), 1)
        level = nxt


# ---------------------------------------------------------------------------
# Growth prediction (free term algebra)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GrowthPrediction:
    brute_force: int  # ordered-tuple free-term count after k rounds
    formula_value: int  # the binomial closed form, evaluated as printed
    overflowed: bool


def predict_free_growth(seed_count: int, arities, k: int) -> GrowthPrediction:
    """Estimate garden size assuming every builder application is fresh.

    brute_force counts distinct free terms of application depth <= k with
    ordered argument tuples.  formula_value evaluates the binomial sum over
    unordered selections; the two are reported side by side rather than
    asserted equal, since they count different things.
    """
    if seed_count < 0 or k < 0 or any(a < 1 for a in arities):
        raise GardenError("counts must be non-negative and arities >= 1")
    arities = list(arities)
    # N[i] = free-term count at depth <= i; N[-1] treated as 0
    n = [seed_count]
    overflow = False
    for i in range(1, k + 2):
        prev, prev2 = n[i - 1], (n[i - 2] if i >= 2 else 0)
        total = prev
        for a in arities:
            total += prev**a - prev2**a
        if total > SAT_LIMIT:
            total = SAT_LIMIT
            overflow = True
        n.append(total)
    formula = 0
    for m in range(2, k + 3):
        for a in arities:
            formula += math.comb(n[m - 1], a) - math.comb(n[m - 2], a)
    if formula > SAT_LIMIT:
        formula = SAT_LIMIT
        overflow = True
    return GrowthPrediction(brute_force=n[k], formula_value=formula, overflowed=overflow)


# ---------------------------------------------------------------------------
# Garden files
# ---------------------------------------------------------------------------

_TYPE_NAMES = {STR: "str", FLOAT: "float", INT: "int", BOOL: "bool"}
_NAME_TYPES = {v: k for k, v in _TYPE_NAMES.items()}


def format_literal(v: Value) -> str:
    if v.tag is STR:
        out = []
        for c in v.raw:
            if c == 0x09:
                out.append("\\t")
            elif c == 0x0A:
                out.append("\\n")
            elif c == 0x5C:
                out.append("\\\\")
            elif 0x20 <= c < 0x7F:
                out.append(chr(c))
            else:
                out.append(f"\\x{c:02x}")
        return "".join(out)
    if v.tag is FLOAT:
        return print_float(v.raw)
    if v.tag is BOOL:
        return "true" if v.raw else "false"
    return str(v.raw)


def parse_literal(tag: TypeTag, text: str) -> Value:
    if tag is STR:
        out = bytearray()
        i = 0
        while i < len(text):
            if text[i] == "\\":
                e = text[i + 1]
                if e == "x":
                    out.append(int(text[i + 2 : i + 4], 16))
                    i += 4
                elif e == "t":
                    out.append(9)
                    i += 2
                elif e == "n":
                    out.append(10)
                    i += 2
                elif e == "\\":
                    out.append(92)
                    i += 2
                else:
                    raise GardenError(f"bad escape in garden literal: \\{e}")
            else:
                out.extend(text[i].encode("utf-8"))
                i += 1
        return Value(STR, bytes(out))
    if tag is FLOAT:
        return Value(FLOAT, float(text))
    if tag is BOOL:
        return Value(BOOL, text == "true")
    return Value(INT, int(text))


def serialize_gardens(gardens: dict[TypeTag, IndexMap]) -> str:
    lines = []
    for tag in sorted(gardens, key=lambda t: t.name):
        imap = gardens[tag]
        name = _TYPE_NAMES[tag]
        for i, v in enumerate(imap.values()):
            lines.append(f"{i}\t{name}\t{format_literal(v)}")
    return "\n".join(lines) + ("\n" if lines else "")


def load_gardens(text: str) -> dict[TypeTag, IndexMap]:
    """Parse a garden file; indices are honoured verbatim and must be dense."""
    rows: dict[TypeTag, list[tuple[int, Value]]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise GardenError(f"garden line {lineno}: expected 3 tab-separated fields")
        idx_text, type_name, lit = parts
        tag = _NAME_TYPES.get(type_name)
        if tag is None:
            raise GardenError(f"garden line {lineno}: unknown type {type_name!r}")
        rows.setdefault(tag, []).append((int(idx_text), parse_literal(tag, lit)))
    gardens = {}
    for tag, entries in rows.items():
        entries.sort(key=lambda iv: iv[0])
        if [i for i, _ in entries] != list(range(len(entries))):
            raise GardenError(f"{_TYPE_NAMES[tag]} garden indices are not dense from 0")
        imap = IndexMap(tag)
        for i, v in entries:
            got, added = imap.admit(v, 0)
            if not added or got != i:
                raise GardenError(f"duplicate value in {_TYPE_NAMES[tag]} garden at index {i}")
        gardens[tag] = imap
    return gardens
