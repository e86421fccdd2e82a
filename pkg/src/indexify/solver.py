"""Equality-theory solver over finite index domains.

Path conditions are conjunctions of (dis)equalities between variables and
index constants; BOT is an extra domain constant distinct from every index.
solve() merges equality classes with union-find, checks disequalities against
the classes, and searches for an assignment of the unpinned classes
(most-constrained first, values ascending, BOT last) so models are
deterministic and the smallest available.  The search is exhaustive, so the
verdict is exact; a per-query budget converts pathological instances into an
"unknown" verdict instead of a hang.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .lang.ast import BOT

SAT = "sat"
UNSAT = "unsat"
UNKNOWN = "unknown"

DEFAULT_BUDGET_S = 30.0


@dataclass(frozen=True)
class FiniteVar:
    """A solver variable over [0, size) plus optionally BOT."""

    name: str
    size: int
    allow_bot: bool = False

    def domain(self):
        yield from range(self.size)
        if self.allow_bot:
            yield BOT

    def contains(self, c) -> bool:
        if c is BOT:
            return self.allow_bot
        return isinstance(c, int) and 0 <= c < self.size


@dataclass(frozen=True)
class Atom:
    kind: str  # "==c" | "!=c" | "==v" | "!=v"
    var: FiniteVar
    other: object  # a constant (int or BOT) or another FiniteVar

    def __repr__(self):
        op = "=" if self.kind.startswith("==") else "!="
        rhs = self.other.name if isinstance(self.other, FiniteVar) else self.other
        return f"{self.var.name} {op} {rhs}"


def var_eq_const(v: FiniteVar, c) -> Atom:
    return Atom("==c", v, c)


def var_neq_const(v: FiniteVar, c) -> Atom:
    return Atom("!=c", v, c)


def var_eq_var(a: FiniteVar, b: FiniteVar) -> Atom:
    return Atom("==v", a, b)


def var_neq_var(a: FiniteVar, b: FiniteVar) -> Atom:
    return Atom("!=v", a, b)


PathCondition = tuple  # tuple[Atom, ...]


@dataclass(frozen=True)
class SolveResult:
    status: str
    model: dict | None = None  # var name -> constant, only when sat


def holds(atom: Atom, assignment: dict) -> bool:
    """Evaluate one atom under a total assignment (name -> constant)."""
    a = assignment[atom.var.name]
    b = assignment[atom.other.name] if isinstance(atom.other, FiniteVar) else atom.other
    return (a == b or (a is BOT and b is BOT)) == atom.kind.startswith("==")


def satisfies(pc, assignment: dict) -> bool:
    return all(holds(a, assignment) for a in pc)


def pc_vars(pc) -> dict:
    out = {}
    for a in pc:
        out[a.var.name] = a.var
        if isinstance(a.other, FiniteVar):
            out[a.other.name] = a.other
    return out


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        p = self.parent
        if x not in p:
            p[x] = x
            return x
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # keep the lexicographically smaller name as representative so
            # class identities (and therefore models) are deterministic
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra
        return ra


def _same_const(a, b) -> bool:
    if a is BOT or b is BOT:
        return a is b
    return a == b


class _Timeout(Exception):
    pass


def solve(pc, variables=(), budget_s: float = DEFAULT_BUDGET_S) -> SolveResult:
    """Decide pc; on sat, the model covers pc's variables plus `variables`."""
    vars_by_name = pc_vars(pc)
    for v in variables:
        vars_by_name.setdefault(v.name, v)

    uf = _UnionFind()
    for name in vars_by_name:
        uf.find(name)
    for a in pc:
        if a.kind == "==v":
            uf.union(a.var.name, a.other.name)

    members: dict[str, list] = {}
    for name, v in vars_by_name.items():
        members.setdefault(uf.find(name), []).append(v)

    # class domain: [0, min size) plus BOT only if every member allows it
    domains = {}
    for root, vs in members.items():
        size = min(v.size for v in vs)
        allow_bot = all(v.allow_bot for v in vs)
        domains[root] = (size, allow_bot)

    def in_domain(root, c) -> bool:
        size, allow_bot = domains[root]
        if c is BOT:
            return allow_bot
        return 0 <= c < size

    # pin classes from equality-with-constant atoms
    pins = {}
    for a in pc:
        if a.kind != "==c":
            continue
        root = uf.find(a.var.name)
        if not a.var.contains(a.other) or not in_domain(root, a.other):
            return SolveResult(UNSAT)
        if root in pins and not _same_const(pins[root], a.other):
            return SolveResult(UNSAT)
        pins[root] = a.other

    excluded: dict[str, set] = {root: set() for root in members}
    neighbors: dict[str, set] = {root: set() for root in members}
    for a in pc:
        if a.kind == "!=c":
            root = uf.find(a.var.name)
            if not in_domain(root, a.other):
                continue  # vacuous: the variable can never take this value
            if root in pins:
                if _same_const(pins[root], a.other):
                    return SolveResult(UNSAT)
                continue
            excluded[root].add(a.other)
        elif a.kind == "!=v":
            ra, rb = uf.find(a.var.name), uf.find(a.other.name)
            if ra == rb:
                return SolveResult(UNSAT)
            pa, pb = pins.get(ra), pins.get(rb)
            if pa is not None and pb is not None:
                if _same_const(pa, pb):
                    return SolveResult(UNSAT)
                continue
            if pa is not None:
                excluded[rb].add(pa)
            elif pb is not None:
                excluded[ra].add(pb)
            else:
                neighbors[ra].add(rb)
                neighbors[rb].add(ra)

    assignment = dict(pins)
    open_roots = [r for r in members if r not in pins]

    def candidates(root):
        size, allow_bot = domains[root]
        excl = excluded[root]
        taken = {assignment[nb] for nb in neighbors[root] if nb in assignment}
        for c in range(size):
            if c not in excl and c not in taken:
                yield c
        if allow_bot and BOT not in excl and not any(t is BOT for t in taken):
            yield BOT

    deadline = time.monotonic() + budget_s if budget_s else None

    def search(remaining) -> bool:
        if deadline is not None and time.monotonic() > deadline:
            raise _Timeout()
        if not remaining:
            return True
        # most-constrained first; ties broken by name for determinism
        scored = sorted(remaining, key=lambda r: (sum(1 for _ in candidates(r)), r))
        root = scored[0]
        rest = [r for r in remaining if r != root]
        for c in candidates(root):
            assignment[root] = c
            if search(rest):
                return True
            del assignment[root]
        return False

    try:
        ok = search(open_roots)
    except _Timeout:
        return SolveResult(UNKNOWN)
    if not ok:
        return SolveResult(UNSAT)
    model = {name: assignment[uf.find(name)] for name in vars_by_name}
    return SolveResult(SAT, model)


def entailed_pins(pc) -> dict:
    """Variable pins entailed by the equality atoms of a satisfiable pc.

    Used to filter table rows before forking; only equality reasoning is
    applied (constants reached through ==c / ==v chains).
    """
    uf = _UnionFind()
    pins = {}
    for a in pc:
        if a.kind == "==v":
            uf.union(a.var.name, a.other.name)
    for a in pc:
        if a.kind == "==c":
            pins[uf.find(a.var.name)] = a.other
    out = {}
    for v in pc_vars(pc).values():
        root = uf.find(v.name)
        if root in pins:
            out[v.name] = pins[root]
    return out


def simplify(pc) -> tuple:
    """Drop atoms entailed by the rest: duplicates, out-of-domain
    disequalities, and disequalities already decided by constant pins.
    Equisatisfiable with the input, and any model of the output satisfies it.
    """
    uf = _UnionFind()
    for a in pc:
        if a.kind == "==v":
            uf.union(a.var.name, a.other.name)
    pins = {}
    conflict = False
    for a in pc:
        if a.kind == "==c":
            root = uf.find(a.var.name)
            if root in pins and not _same_const(pins[root], a.other):
                conflict = True
            pins.setdefault(root, a.other)

    out = []
    seen = set()
    for a in pc:
        key = (a.kind, a.var.name,
               a.other.name if isinstance(a.other, FiniteVar) else ("c", repr(a.other)))
        if key in seen:
            continue
        if a.kind == "==v" and a.var.name == a.other.name:
            continue
        if a.kind == "!=c":
            if not a.var.contains(a.other):
                continue
            pin = pins.get(uf.find(a.var.name))
            if pin is not None and not conflict and not _same_const(pin, a.other):
                continue
        if a.kind == "!=v":
            pa = pins.get(uf.find(a.var.name))
            pb = pins.get(uf.find(a.other.name))
            if pa is not None and pb is not None and not conflict \
                    and not _same_const(pa, pb):
                continue
        seen.add(key)
        out.append(a)
    return tuple(out)


def dump_query(pc) -> str:
    """Line format for golden tests: `<var> (=|!=) <const|var>` per atom."""
    lines = []
    for a in pc:
        op = "=" if a.kind.startswith("==") else "!="
        rhs = a.other.name if isinstance(a.other, FiniteVar) else \
            ("BOT" if a.other is BOT else str(a.other))
        lines.append(f"{a.var.name} {op} {rhs}")
    return "\n".join(lines) + ("\n" if lines else "")
