"""Builtin operators and their memoized indexed tables.

The registry holds the concrete C-flavoured semantics (string.h and maths.h
analogues) that serve as the oracle everywhere else.  memoise() builds an
IndexedOperatorTable: one row per type-valid argument tuple over the gardens,
mapping index tuples to either result indices (when the return type is
indexed) or raw values (when it is not, like strncmp's comparison result).
BOT is always a distinct cell variant - never the integer -1, which strncmp
legitimately returns.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

from .garden import (
    IndexMap,
    OperatorSignature,
    format_literal,
    parse_literal,
)
from .lang.ast import (
    BOT,
    FLOAT,
    INT,
    STR,
    TypeTag,
    Value,
    index_of,
    mk_float,
    mk_int,
    mk_str,
)


class IotError(Exception):
    pass


# ---------------------------------------------------------------------------
# Concrete builtins
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BuiltinOp:
    signature: OperatorSignature
    fn: object
    klass: str  # "string" | "float" | "io"

    def eval(self, *args: Value) -> Value:
        for want, got in zip(self.signature.arg_types, args):
            if got.tag != want:
                raise IotError(
                    f"{self.signature.name}: argument tag {got.tag!r}, expected {want!r}"
                )
        return self.fn(*[a.raw for a in args])


def _strcat(a: bytes, b: bytes) -> Value:
    return mk_str(a + b)


def _strstr(hay: bytes, needle: bytes) -> Value:
    # C: empty needle matches at the start; a miss is NULL, which we carry
    # as the empty string so the result stays indexable
    if not needle:
        return mk_str(hay)
    pos = hay.find(needle)
    return mk_str(hay[pos:]) if pos >= 0 else mk_str(b"")


def _byte_at(s: bytes, i: int) -> int:
    return s[i] if i < len(s) else 0  # implicit NUL terminator


def _strncmp(a: bytes, b: bytes, n: int) -> Value:
    for i in range(max(n, 0)):
        ca, cb = _byte_at(a, i), _byte_at(b, i)
        if ca != cb:
            return mk_int(-1 if ca < cb else 1)
        if ca == 0:
            break
    return mk_int(0)


def _strcmp(a: bytes, b: bytes) -> Value:
    i = 0
    while True:
        ca, cb = _byte_at(a, i), _byte_at(b, i)
        if ca != cb:
            return mk_int(-1 if ca < cb else 1)
        if ca == 0:
            return mk_int(0)
        i += 1


def _strlen(s: bytes) -> Value:
    return mk_int(len(s))


def _substr(s: bytes, start: int, length: int) -> Value:
    if start < 0 or start > len(s) or length < 0:
        return mk_str(b"")
    return mk_str(s[start : start + length])


def _fdiv(a: float, b: float) -> Value:
    if b == 0.0:
        if a == 0.0 or math.isnan(a):
            return mk_float(math.nan)
        sign = math.copysign(1.0, a) * math.copysign(1.0, b)
        return mk_float(math.copysign(math.inf, sign))
    return mk_float(a / b)


def _sqrt(a: float) -> Value:
    if a < 0.0:
        return mk_float(math.nan)  # domain error: NaN is a legitimate garden value
    try:
        return mk_float(math.sqrt(a))
    except ValueError:
        return mk_float(math.nan)


def _fmin(a: float, b: float) -> Value:
    if math.isnan(a):
        return mk_float(b)
    if math.isnan(b):
        return mk_float(a)
    return mk_float(min(a, b))


def _fmax(a: float, b: float) -> Value:
    if math.isnan(a):
        return mk_float(b)
    if math.isnan(b):
        return mk_float(a)
    return mk_float(max(a, b))


def _sig(name, args, ret) -> OperatorSignature:
    return OperatorSignature(name, tuple(args), ret)


REGISTRY: dict[str, BuiltinOp] = {
    "strcat": BuiltinOp(_sig("strcat", [STR, STR], STR), _strcat, "string"),
    "strstr": BuiltinOp(_sig("strstr", [STR, STR], STR), _strstr, "string"),
    "strncmp": BuiltinOp(_sig("strncmp", [STR, STR, INT], INT), _strncmp, "string"),
    "strcmp": BuiltinOp(_sig("strcmp", [STR, STR], INT), _strcmp, "string"),
    "strlen": BuiltinOp(_sig("strlen", [STR], INT), _strlen, "string"),
    "substr": BuiltinOp(_sig("substr", [STR, INT, INT], STR), _substr, "string"),
    "fadd": BuiltinOp(_sig("fadd", [FLOAT, FLOAT], FLOAT), lambda a, b: mk_float(a + b), "float"),
    "fsub": BuiltinOp(_sig("fsub", [FLOAT, FLOAT], FLOAT), lambda a, b: mk_float(a - b), "float"),
    "fmul": BuiltinOp(_sig("fmul", [FLOAT, FLOAT], FLOAT), lambda a, b: mk_float(a * b), "float"),
    "fdiv": BuiltinOp(_sig("fdiv", [FLOAT, FLOAT], FLOAT), _fdiv, "float"),
    "sqrt": BuiltinOp(_sig("sqrt", [FLOAT], FLOAT), _sqrt, "float"),
    "fabs": BuiltinOp(_sig("fabs", [FLOAT], FLOAT), lambda a: mk_float(math.fabs(a)), "float"),
    "fmin": BuiltinOp(_sig("fmin", [FLOAT, FLOAT], FLOAT), _fmin, "float"),
    "fmax": BuiltinOp(_sig("fmax", [FLOAT, FLOAT], FLOAT), _fmax, "float"),
    "puts": BuiltinOp(_sig("puts", [STR], INT), lambda s: mk_int(0), "io"),
}


def eval_builtin(name: str, args) -> Value:
    op = REGISTRY.get(name)
    if op is None:
        raise IotError(f"unknown builtin {name!r}")
    return op.eval(*args)


def ops_of_class(klass: str) -> list[BuiltinOp]:
    return [op for op in REGISTRY.values() if op.klass == klass]


def class_for_type(tag: TypeTag) -> str:
    if tag is STR:
        return "string"
    if tag is FLOAT:
        return "float"
    raise IotError(f"no builtin class for {tag!r}")


# ---------------------------------------------------------------------------
# Indexed operator tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GardenDim:
    imap: IndexMap

    def domain(self):
        return range(len(self.imap))

    def contains(self, key) -> bool:
        return isinstance(key, int) and 0 <= key < len(self.imap)

    def value_for(self, key) -> Value:
        return self.imap.value_at(key)


@dataclass(frozen=True)
class IntPoolDim:
    pool: tuple[int, ...]

    def domain(self):
        return self.pool

    def contains(self, key) -> bool:
        return isinstance(key, int) and key in self.pool

    def value_for(self, key) -> Value:
        return mk_int(key)


class IndexedOperatorTable:
    """Complete memoization of one operator over the gardens.

    rows maps key tuples to cells.  Key components are garden indices for
    indexed argument positions and raw ints for int positions.  A cell is an
    int index (indexed results), a Value (raw results), or BOT.  Lookup of
    anything outside the dimension domains is BOT: the catch-all row.
    """

    def __init__(self, op_name, signature, dims, result, rows, *,
                 garden_hash, bot_rows=0, skipped=0):
        self.op_name = op_name
        self.indexed_name = "i_" + op_name
        self.signature = signature
        self.dims = dims
        self.result = result  # IndexMap for indexed results, TypeTag for raw
        self.rows = rows
        self.garden_hash = garden_hash
        self.bot_rows = bot_rows
        self.skipped = skipped

    @property
    def result_indexed(self) -> bool:
        return isinstance(self.result, IndexMap)

    @property
    def arity(self) -> int:
        return len(self.dims)

    def lookup(self, key: tuple):
        """Return the cell for key: an index, a raw Value, or BOT."""
        for d, k in zip(self.dims, key):
            if k is BOT or not d.contains(k):
                return BOT
        return self.rows[key]

    def lookup_value(self, key: tuple) -> Value:
        cell = self.lookup(key)
        if self.result_indexed:
            return Value(index_of(self.result.type_tag), cell)
        if cell is BOT:
            return Value(self.signature.return_type, BOT)
        return cell

    def indexed_signature(self) -> OperatorSignature:
        args = []
        for d, t in zip(self.dims, self.signature.arg_types):
            args.append(index_of(t) if isinstance(d, GardenDim) else t)
        ret = index_of(self.result.type_tag) if self.result_indexed \
            else self.signature.return_type
        return OperatorSignature(self.indexed_name, tuple(args), ret)


def gardens_fingerprint(dims, result) -> str:
    """Hash binding a table to the exact gardens (and pool) it was built from."""
    h = hashlib.sha256()
    for d in dims:
        if isinstance(d, GardenDim):
            h.update(b"garden\0")
            for v in d.imap.values():
                h.update(format_literal(v).encode("utf-8") + b"\0")
        else:
            h.update(b"pool\0")
            h.update(",".join(map(str, d.pool)).encode("ascii") + b"\0")
    if isinstance(result, IndexMap):
        h.update(b"result\0")
        for v in result.values():
            h.update(format_literal(v).encode("utf-8") + b"\0")
    return h.hexdigest()[:16]


def _dims_for(signature: OperatorSignature, gardens, int_pool):
    dims = []
    for t in signature.arg_types:
        if t in gardens:
            dims.append(GardenDim(gardens[t]))
        elif t is INT:
            dims.append(IntPoolDim(tuple(int_pool)))
        else:
            raise IotError(
                f"{signature.name}: argument type {t!r} has no garden and is not int"
            )
    return dims


def memoise(gardens: dict[TypeTag, IndexMap], op: BuiltinOp,
            int_pool=(), evaluator=None) -> IndexedOperatorTable:
    """Build the complete table for op over the gardens (plus the int pool)."""
    if evaluator is None:
        evaluator = op.eval
    sig = op.signature
    dims = _dims_for(sig, gardens, int_pool)
    result = gardens.get(sig.return_type, sig.return_type)
    rows = {}
    bot_rows = 0
    skipped = 0
    for key in _product([list(d.domain()) for d in dims]):
        args = [d.value_for(k) for d, k in zip(dims, key)]
        try:
            out = evaluator(*args)
        except Exception:
            rows[key] = BOT
            skipped += 1
            bot_rows += 1
            continue
        if isinstance(result, IndexMap):
            cell = result.index_or_bot(out)
        else:
            cell = out
        if cell is BOT:
            bot_rows += 1
        rows[key] = cell
    return IndexedOperatorTable(
        sig.name, sig, dims, result, rows,
        garden_hash=gardens_fingerprint(dims, result),
        bot_rows=bot_rows, skipped=skipped,
    )


def memoise_all(gardens, op_names, int_pool=(), registry=None) -> dict[str, IndexedOperatorTable]:
    """Memoise every named operator; result is keyed by indexed name (i_*)."""
    registry = registry or REGISTRY
    tables = {}
    for name in sorted(op_names):
        op = registry.get(name)
        if op is None:
            raise IotError(f"cannot index unknown operator {name!r}")
        t = memoise(gardens, op, int_pool)
        tables[t.indexed_name] = t
    return tables


def _product(domains):
    if not domains:
        yield ()
        return
    if any(len(d) == 0 for d in domains):
        return
    idx = [0] * len(domains)
    while True:
        yield tuple(d[i] for d, i in zip(domains, idx))
        for p in range(len(domains) - 1, -1, -1):
            idx[p] += 1
            if idx[p] < len(domains[p]):
                break
            idx[p] = 0
        else:
            return


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def serialize_iot(t: IndexedOperatorTable) -> str:
    kind = f"indexed:{t.result.type_tag.name}" if t.result_indexed \
        else f"raw:{t.result.name}"
    lines = [f"iot {t.op_name} {t.arity} {kind} garden:{t.garden_hash}"]
    pools = [d.pool for d in t.dims if isinstance(d, IntPoolDim)]
    if pools:
        lines.append("pool " + ",".join(map(str, pools[0])))
    for key in sorted(t.rows):
        cell = t.rows[key]
        if cell is BOT:
            out = "BOT"
        elif isinstance(cell, Value):
            out = format_literal(cell)
        else:
            out = str(cell)
        lines.append(" ".join(map(str, key)) + " -> " + out)
    return "\n".join(lines) + "\n"


def parse_iot(text: str, gardens: dict[TypeTag, IndexMap],
              registry=None) -> IndexedOperatorTable:
    registry = registry or REGISTRY
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("iot "):
        raise IotError("not an iot file: missing header")
    head = lines[0].split()
    if len(head) != 5 or not head[4].startswith("garden:"):
        raise IotError(f"malformed iot header: {lines[0]!r}")
    name, arity, kind = head[1], int(head[2]), head[3]
    file_hash = head[4].split(":", 1)[1]
    op = registry.get(name)
    if op is None:
        raise IotError(f"iot file for unknown operator {name!r}")
    if arity != op.signature.arity:
        raise IotError(f"{name}: arity {arity} does not match signature")
    body = lines[1:]
    pool = ()
    if body and body[0].startswith("pool "):
        pool = tuple(int(x) for x in body[0][5:].split(",") if x)
        body = body[1:]
    dims = _dims_for(op.signature, gardens, pool)
    want_kind = "indexed" if op.signature.return_type in gardens else "raw"
    if not kind.startswith(want_kind + ":"):
        raise IotError(f"{name}: result kind {kind!r} does not match gardens")
    result = gardens.get(op.signature.return_type, op.signature.return_type)
    got_hash = gardens_fingerprint(dims, result)
    if got_hash != file_hash:
        raise IotError(
            f"{name}: table was built from a different garden "
            f"(file {file_hash}, current {got_hash})"
        )
    rows = {}
    bot_rows = 0
    for ln in body:
        if "->" not in ln:
            raise IotError(f"malformed iot row: {ln!r}")
        left, right = ln.split("->")
        key = tuple(int(x) for x in left.split())
        if len(key) != arity:
            raise IotError(f"row key {key} does not match arity {arity}")
        right = right.strip()
        if right == "BOT":
            cell = BOT
            bot_rows += 1
        elif isinstance(result, IndexMap):
            cell = int(right)
        else:
            cell = parse_literal(op.signature.return_type, right)
        rows[key] = cell
    expect = 1
    for d in dims:
        expect *= len(list(d.domain()))
    if len(rows) != expect:
        raise IotError(f"{name}: table has {len(rows)} rows, expected {expect}")
    return IndexedOperatorTable(
        name, op.signature, dims, result, rows,
        garden_hash=file_hash, bot_rows=bot_rows,
    )
