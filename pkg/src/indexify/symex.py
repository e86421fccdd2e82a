"""Forking symbolic executor over MiniImp programs.

Two engines share one core.  Indexed mode runs rewriter output: symbolic
variables range over garden indices, indexed-operator calls fork per table
row (after filtering rows against concrete arguments and pins already
entailed by the path condition), and consuming BOT abandons the path with the
escaped-garden verdict.  Baseline mode runs the original program and either
abandons at intractable operator calls or concretizes their symbolic
arguments (fixed defaults for strings and floats, a model value pinned into
the path condition for finite-domain variables), mimicking what dynamic
symbolic execution does.

Paths are enumerated by decision-trace replay: each run re-executes the
program following a recorded prefix of decisions, then explores the first
still-open option at the frontier, pushing siblings for later (true branch
first, table rows in ascending result order, the BOT successor last).  Every
frontier option is checked satisfiable before it is taken or queued, so the
path condition is satisfiable at all times and emitted test cases replay on
the concrete interpreter by construction.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from . import solver
from .iot import REGISTRY, IndexedOperatorTable, IntPoolDim
from .lang.ast import (
    BOT,
    BOOL,
    FLOAT,
    INT,
    STR,
    Assert,
    Assign,
    BinOp,
    BotLiteral,
    Call,
    Decl,
    ExprStmt,
    If,
    Literal,
    MakeSymbolic,
    MiniImpError,
    Program,
    Return,
    TypeTag,
    UnOp,
    Value,
    Var,
    While,
    index_of,
    is_index,
    mk_bool,
    mk_float,
    mk_int,
    mk_str,
    program_layout,
    truthy,
    walk_stmts,
)
from .lang.interp import (
    VERDICT_ASSERT,
    VERDICT_BOUND,
    VERDICT_ESCAPED,
    VERDICT_OK,
    concrete_binop,
    interpret,
)
from .solver import FiniteVar, var_eq_const, var_eq_var, var_neq_const, var_neq_var

MODE_INDEXED = "indexed"
MODE_ABANDON = "baseline-abandon"
MODE_CONCRETIZE = "baseline-concretize"

_INTRACTABLE_CLASSES = ("string", "float")


class SymexError(Exception):
    pass


@dataclass(frozen=True)
class SymRef:
    """A store entry backed by a finite-domain solver variable."""

    var: FiniteVar
    tag: TypeTag  # the value's tag in the program (index<t>, int, bool)


@dataclass(frozen=True)
class Opaque:
    """A symbolic value with no finite domain (baseline str/float inputs)."""

    name: str
    tag: TypeTag


@dataclass(frozen=True)
class Unindexed:
    """unidx() applied to a symbolic index: forced concrete only on demand."""

    ref: SymRef


@dataclass(frozen=True)
class ExploreConfig:
    mode: str = MODE_INDEXED
    gardens: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    unroll: int = 16
    max_states: int = 100_000
    wallclock_s: float = 60.0
    bot_propagate: bool = False
    int_domain: int = 256  # symbolic non-indexed ints range over [0, this)


@dataclass(frozen=True)
class TestCase:
    path_id: int
    verdict: str
    inputs: dict  # symbolic name -> concrete Value (unindexed)
    covered_branches: frozenset
    covered_stmts: frozenset
    pc: tuple


@dataclass(frozen=True)
class ExplorationReport:
    mode: str
    test_cases: tuple
    branch_total: int
    branch_covered: int
    instr_total: int
    instr_covered: int
    states: int
    paths: int
    solver_queries: int
    atoms_generated: int
    atoms_sent: int
    escaped_paths: int
    truncated: bool
    iot_fork_sizes: tuple
    elapsed_s: float

    @property
    def branch_cov(self) -> float:
        return self.branch_covered / self.branch_total if self.branch_total else 1.0

    @property
    def instr_cov(self) -> float:
        return self.instr_covered / self.instr_total if self.instr_total else 1.0


class _Return(Exception):
    def __init__(self, value):
        self.value = value


class _Terminal(Exception):
    def __init__(self, verdict, emit=True):
        self.verdict = verdict
        self.emit = emit  # abandoned-by-policy paths are counted, never emitted


class _Infeasible(Exception):
    pass


class _Option:
    __slots__ = ("atoms", "payload")

    def __init__(self, atoms, payload):
        self.atoms = atoms
        self.payload = payload


class Engine:
    def __init__(self, program: Program, cfg: ExploreConfig):
        self.program = program
        self.cfg = cfg
        self.layout = program_layout(program)
        self.queries = 0
        self.atoms_generated = 0
        self.atoms_sent = 0
        self.states = 0
        self.iot_fork_sizes = []

    def check_sat(self, atoms) -> bool:
        pc = solver.simplify(tuple(atoms))
        self.queries += 1
        self.atoms_sent += len(pc)
        res = solver.solve(pc)
        if res.status == solver.UNKNOWN:
            raise SymexError("solver budget exhausted during feasibility check")
        return res.status == solver.SAT

    def model_for(self, atoms, variables):
        pc = solver.simplify(tuple(atoms))
        self.queries += 1
        self.atoms_sent += len(pc)
        res = solver.solve(pc, variables=variables)
        if res.status != solver.SAT:
            raise SymexError("path condition became unsatisfiable")
        return res.model

    def explore(self) -> ExplorationReport:
        start = time.monotonic()
        deadline = start + self.cfg.wallclock_s
        stack: list[list[int]] = [[]]
        self.states = 1
        test_cases = []
        covered_branches = set()
        covered_stmts = set()
        escaped = 0
        paths = 0
        truncated = False
        while stack:
            if time.monotonic() > deadline or self.states > self.cfg.max_states:
                truncated = True
                break
            prefix = stack.pop()
            run = _Run(self, prefix, stack)
            outcome = run.execute()
            if outcome is None:
                continue
            verdict, emit = outcome
            paths += 1
            covered_branches |= run.covered_branches
            covered_stmts |= run.covered_stmts
            if verdict == VERDICT_ESCAPED:
                escaped += 1
            if emit:
                model = self.model_for(run.pc, run.finite_vars())
                test_cases.append(TestCase(
                    path_id=len(test_cases),
                    verdict=verdict,
                    inputs=run.concrete_inputs(model),
                    covered_branches=frozenset(run.covered_branches),
                    covered_stmts=frozenset(run.covered_stmts),
                    pc=tuple(run.pc),
                ))
        return ExplorationReport(
            mode=self.cfg.mode,
            test_cases=tuple(test_cases),
            branch_total=2 * self.layout.branch_count,
            branch_covered=len(covered_branches),
            instr_total=self.layout.stmt_count,
            instr_covered=len(covered_stmts),
            states=self.states,
            paths=paths,
            solver_queries=self.queries,
            atoms_generated=self.atoms_generated,
            atoms_sent=self.atoms_sent,
            escaped_paths=escaped,
            truncated=truncated,
            iot_fork_sizes=tuple(self.iot_fork_sizes),
            elapsed_s=time.monotonic() - start,
        )


class _Run:
    """One re-execution of the program along a decision prefix."""

    def __init__(self, engine: Engine, prefix, stack):
        self.engine = engine
        self.cfg = engine.cfg
        self.program = engine.program
        self.prefix = prefix
        self.stack = stack
        self.depth = 0
        self.chosen: list[int] = []
        self.pc: list = []
        self.covered_branches = set()
        self.covered_stmts = set()
        self.outputs = []
        self.symvars: dict[str, SymRef | Opaque] = {}
        self.concretized: dict[str, Value] = {}
        self.loop_counts: dict[tuple, int] = {}

    # -- decisions -----------------------------------------------------------

    def decide(self, options: list[_Option], generated: int = 0, record_fork=False):
        d = self.depth
        self.depth += 1
        if d < len(self.prefix):
            opt = options[self.prefix[d]]
            self.pc.extend(opt.atoms)
            self.chosen.append(self.prefix[d])
            return opt.payload
        # frontier: successor states are created here
        self.engine.atoms_generated += generated + sum(len(o.atoms) for o in options)
        feasible = []
        for i, opt in enumerate(options):
            if not opt.atoms or self.engine.check_sat(self.pc + opt.atoms):
                feasible.append(i)
        if record_fork:
            self.engine.iot_fork_sizes.append(len(feasible))
        if not feasible:
            raise _Infeasible()
        self.engine.states += len(feasible)
        for i in reversed(feasible[1:]):
            self.stack.append(self.chosen + [i])
        opt = options[feasible[0]]
        self.pc.extend(opt.atoms)
        self.chosen.append(feasible[0])
        return opt.payload

    # -- entry ---------------------------------------------------------------

    def execute(self):
        try:
            self.call_function(self.program.main, [])
            return (VERDICT_OK, True)
        except _Return:
            return (VERDICT_OK, True)
        except _Terminal as t:
            return (t.verdict, t.emit)
        except _Infeasible:
            return None

    def call_function(self, fn, args):
        scope = {p.name: a for p, a in zip(fn.params, args)}
        self.exec_block(fn.body, scope, (fn.name,))
        raise MiniImpError(f"{fn.name} finished without returning")

    # -- statements ------------------------------------------------------------

    def exec_block(self, body, scope, path):
        for i, s in enumerate(body):
            self.exec_stmt(s, scope, path + (i,))

    def exec_stmt(self, s, scope, path):
        self.covered_stmts.add(path)
        if isinstance(s, Decl):
            scope[s.name] = self.eval(s.init, scope) if s.init is not None else None
        elif isinstance(s, Assign):
            scope[s.name] = self.eval(s.value, scope)
        elif isinstance(s, If):
            taken = self.truth(self.eval(s.cond, scope))
            self.covered_branches.add((path, taken))
            self.exec_block(s.then if taken else s.orelse, scope,
                            path + ("t" if taken else "e",))
        elif isinstance(s, While):
            while True:
                taken = self.truth(self.eval(s.cond, scope))
                self.covered_branches.add((path, taken))
                if not taken:
                    break
                n = self.loop_counts.get(path, 0) + 1
                if n > self.cfg.unroll:
                    raise _Terminal(VERDICT_BOUND)
                self.loop_counts[path] = n
                self.exec_block(s.body, scope, path + ("b",))
        elif isinstance(s, Assert):
            if not self.truth(self.eval(s.cond, scope)):
                raise _Terminal(VERDICT_ASSERT)
        elif isinstance(s, Return):
            raise _Return(self.eval(s.value, scope) if s.value else None)
        elif isinstance(s, ExprStmt):
            self.eval(s.expr, scope)
        elif isinstance(s, MakeSymbolic):
            scope[s.name] = self.make_symbolic(s.name, path[0])
        else:
            raise MiniImpError(f"cannot execute {s!r}")

    def make_symbolic(self, name, fn_name):
        if name in self.symvars:
            return self.symvars[name]
        tag = self._declared_tag(name, fn_name)
        if is_index(tag):
            garden = self.cfg.gardens.get(tag.base)
            if garden is None:
                raise SymexError(f"symbolic {name}: no garden for {tag!r}")
            if len(garden) == 0:
                raise SymexError(f"symbolic {name}: the {tag.base!r} garden is "
                                 "empty; provide seeds")
            # inputs are real values, so BOT is outside the initial domain
            ref = SymRef(FiniteVar(name, len(garden)), tag)
        elif tag is INT:
            ref = SymRef(FiniteVar(name, self.cfg.int_domain), tag)
        elif tag is BOOL:
            ref = SymRef(FiniteVar(name, 2), tag)
        else:
            ref = Opaque(name, tag)
        self.symvars[name] = ref
        return ref

    def _declared_tag(self, name, fn_name):
        f = self.program.function(fn_name)
        for p in f.params:
            if p.name == name:
                return p.type
        for _, st in walk_stmts(f.body):
            if isinstance(st, Decl) and st.name == name:
                return st.type
        raise SymexError(f"no declaration for symbolic {name!r}")

    # -- symbolic values --------------------------------------------------------

    def resolve(self, v):
        if isinstance(v, SymRef):
            return self.concretized.get(v.var.name, v)
        if isinstance(v, Opaque):
            return self.concretized.get(v.name, v)
        return v

    def _garden(self, tag):
        garden = self.cfg.gardens.get(tag.base)
        if garden is None:
            raise SymexError(f"no garden for {tag!r}")
        return garden

    def intractable(self, syms) -> None:
        """Apply the policy for an operation outside equality theory.

        Abandon terminates the path (counted as escaped, no test case);
        concretize binds opaque values to fixed defaults and pins finite
        variables to their current model value so the path stays consistent.
        """
        if self.cfg.mode != MODE_CONCRETIZE:
            raise _Terminal(VERDICT_ESCAPED, emit=False)
        for s in syms:
            if isinstance(s, Unindexed):
                s = s.ref
            if isinstance(s, Opaque):
                self.concretized[s.name] = _concretize_default(s.tag)
            else:
                model = self.engine.model_for(self.pc, [s.var])
                c = model[s.var.name]
                self.pc.append(var_eq_const(s.var, c))
                self.concretized[s.var.name] = self._value_from_const(s.tag, c)

    def _value_from_const(self, tag, c) -> Value:
        if is_index(tag):
            return Value(tag, c)
        if tag is BOOL:
            return mk_bool(bool(c))
        return mk_int(c)

    def truth(self, v) -> bool:
        v = self.resolve(v)
        if isinstance(v, Value):
            if v.raw is BOT:
                raise _Terminal(VERDICT_ESCAPED)
            if is_index(v.tag):
                return truthy(self._garden(v.tag).value_at(v.raw))
            return truthy(v)
        if isinstance(v, Unindexed):
            v = v.ref  # an index is as truthy as the value it denotes
        if isinstance(v, Opaque):
            self.intractable([v])
            return self.truth(self.resolve(v))
        if is_index(v.tag):
            garden = self._garden(v.tag)
            falsy = [i for i in range(v.var.size)
                     if not truthy(garden.value_at(i))]
        else:
            falsy = [0]
        options = [_Option([var_neq_const(v.var, f) for f in falsy], True)]
        options += [_Option([var_eq_const(v.var, f)], False) for f in falsy]
        return self.decide(options)

    def force_value(self, v) -> Value:
        """Concretize on demand by enumerating the feasible finite domain."""
        v = self.resolve(v)
        if isinstance(v, Value):
            if v.raw is BOT:
                raise _Terminal(VERDICT_ESCAPED)
            return v
        if isinstance(v, Opaque):
            self.intractable([v])
            return self.force_value(v)
        if isinstance(v, Unindexed):
            garden = self._garden(v.ref.tag)
            options = [_Option([var_eq_const(v.ref.var, i)], garden.value_at(i))
                       for i in range(v.ref.var.size)]
            return self.decide(options)
        if is_index(v.tag):
            options = [_Option([var_eq_const(v.var, i)], Value(v.tag, i))
                       for i in range(v.var.size)]
            return self.decide(options)
        if v.tag is BOOL:
            options = [_Option([var_eq_const(v.var, b)], mk_bool(bool(b)))
                       for b in (0, 1)]
            return self.decide(options)
        options = [_Option([var_eq_const(v.var, n)], mk_int(n))
                   for n in range(v.var.size)]
        return self.decide(options)

    # -- expressions --------------------------------------------------------------

    def eval(self, e, scope):
        if isinstance(e, Literal):
            return Value(e.tag, e.value)
        if isinstance(e, BotLiteral):
            return Value(e.tag, BOT)
        if isinstance(e, Var):
            v = scope.get(e.name)
            if v is None:
                raise MiniImpError(f"read of uninitialised variable {e.name!r}")
            return self.resolve(v)
        if isinstance(e, UnOp):
            v = self.resolve(self.eval(e.operand, scope))
            if e.op == "!":
                return mk_bool(not self.truth(v))
            if isinstance(v, Value):
                if v.raw is BOT:
                    raise _Terminal(VERDICT_ESCAPED)
                return mk_int(-v.raw)
            self.intractable([v])
            return mk_int(-self.resolve(v).raw)
        if isinstance(e, BinOp):
            return self.binop(e, scope)
        if isinstance(e, Call):
            return self.call(e, scope)
        raise MiniImpError(f"cannot evaluate {e!r}")

    def binop(self, e: BinOp, scope):
        lv = self.resolve(self.eval(e.left, scope))
        rv = self.resolve(self.eval(e.right, scope))
        if e.op in ("==", "!="):
            return self.compare(e.op, lv, rv)
        if e.op in ("&&", "||"):
            lb = self.truth(lv)
            rb = self.truth(rv)
            return mk_bool((lb and rb) if e.op == "&&" else (lb or rb))
        if isinstance(lv, Value) and isinstance(rv, Value):
            if lv.raw is BOT or rv.raw is BOT:
                raise _Terminal(VERDICT_ESCAPED)
            return concrete_binop(e.op, lv, rv)
        # ordering and arithmetic live outside equality theory
        self.intractable([x for x in (lv, rv) if not isinstance(x, Value)])
        return self.binop_resolved(e.op, self.resolve(lv), self.resolve(rv))

    def binop_resolved(self, op, lv, rv):
        if not (isinstance(lv, Value) and isinstance(rv, Value)):
            raise SymexError("operands remained symbolic after concretization")
        if lv.raw is BOT or rv.raw is BOT:
            raise _Terminal(VERDICT_ESCAPED)
        return concrete_binop(op, lv, rv)

    def compare(self, op, lv, rv):
        want = op == "=="
        if isinstance(lv, Value) and isinstance(rv, Value):
            if lv.raw is BOT or rv.raw is BOT:
                raise _Terminal(VERDICT_ESCAPED)
            return mk_bool((lv.raw == rv.raw) == want)
        if isinstance(lv, Opaque) or isinstance(rv, Opaque):
            self.intractable([x for x in (lv, rv) if isinstance(x, Opaque)])
            return self.compare(op, self.resolve(lv), self.resolve(rv))
        if isinstance(lv, Unindexed) or isinstance(rv, Unindexed):
            lv = self.force_value(lv) if isinstance(lv, Unindexed) else lv
            rv = self.force_value(rv) if isinstance(rv, Unindexed) else rv
            return self.compare(op, lv, rv)
        if isinstance(lv, SymRef) and isinstance(rv, SymRef):
            options = [_Option([var_eq_var(lv.var, rv.var)], want),
                       _Option([var_neq_var(lv.var, rv.var)], not want)]
            return mk_bool(self.decide(options))
        sym, conc = (lv, rv) if isinstance(lv, SymRef) else (rv, lv)
        if conc.raw is BOT:
            raise _Terminal(VERDICT_ESCAPED)
        c = _const_for(sym, conc)
        if c is None:  # constant outside the symbolic domain: never equal
            return mk_bool(not want)
        options = [_Option([var_eq_const(sym.var, c)], want),
                   _Option([var_neq_const(sym.var, c)], not want)]
        return mk_bool(self.decide(options))

    # -- calls ----------------------------------------------------------------

    def call(self, e: Call, scope):
        args = [self.eval(a, scope) for a in e.args]
        user = self.program.function(e.name)
        if user is not None:
            try:
                self.call_function(user, args)
            except _Return as r:
                return r.value
            return None
        if e.name == "idx":
            return self.intrinsic_idx(args[0])
        if e.name == "unidx":
            return self.intrinsic_unidx(args[0])
        if e.name in self.cfg.tables:
            return self.table_call(self.cfg.tables[e.name], args)
        if e.name == "puts":
            return self.builtin_puts(args[0])
        op = REGISTRY.get(e.name)
        if op is None:
            raise MiniImpError(f"call to unknown function {e.name!r}")
        return self.builtin_call(op, args)

    def intrinsic_idx(self, v):
        v = self.force_value(v)
        garden = self.cfg.gardens.get(v.tag)
        if garden is None:
            raise SymexError(f"idx: no garden for {v.tag!r}")
        return Value(index_of(v.tag), garden.index_or_bot(v))

    def intrinsic_unidx(self, v):
        v = self.resolve(v)
        if isinstance(v, Value):
            if v.raw is BOT:
                raise _Terminal(VERDICT_ESCAPED)
            return self._garden(v.tag).value_at(v.raw)
        if isinstance(v, SymRef):
            return Unindexed(v)
        raise SymexError(f"unidx applied to {v!r}")

    def builtin_puts(self, v):
        v = self.resolve(v)
        if isinstance(v, Value):
            if v.raw is BOT:
                raise _Terminal(VERDICT_ESCAPED)
            self.outputs.append(v.raw)
        else:
            self.outputs.append(v)  # sink: the value itself is never needed
        return mk_int(0)

    def builtin_call(self, op, args):
        resolved = [self.resolve(a) for a in args]
        syms = [a for a in resolved if not isinstance(a, Value)]
        if syms:
            if self.cfg.mode == MODE_INDEXED:
                # values outside the index algebra stay intractable even here
                if any(isinstance(a, Opaque) for a in syms):
                    raise _Terminal(VERDICT_ESCAPED, emit=False)
            elif op.klass in _INTRACTABLE_CLASSES:
                self.intractable(syms)
                resolved = [self.resolve(a) for a in resolved]
            resolved = [a if isinstance(a, Value) else self.force_value(a)
                        for a in resolved]
        for a in resolved:
            if a.raw is BOT:
                raise _Terminal(VERDICT_ESCAPED)
        return op.eval(*resolved)

    # -- indexed operator tables -------------------------------------------------

    def table_call(self, table: IndexedOperatorTable, args):
        resolved = [self.resolve(a) for a in args]
        parts = []
        for a in resolved:
            if isinstance(a, Value):
                if a.raw is BOT:
                    if self.cfg.bot_propagate:
                        return self._table_result(table, BOT)
                    raise _Terminal(VERDICT_ESCAPED)
                parts.append(("conc", a.raw))
            elif isinstance(a, SymRef):
                parts.append(("sym", a))
            else:
                raise SymexError(f"indexed call on unsupported value {a!r}")
        # the relevant-subset optimization: concrete arguments and pins already
        # entailed by the path condition filter rows before any forking
        pins = solver.entailed_pins(tuple(self.pc))
        for i, (kind, payload) in enumerate(parts):
            if kind == "sym" and payload.var.name in pins:
                parts[i] = ("conc", pins[payload.var.name])
        naive = len(table.rows) * max(table.arity, 1)
        # reduce to at most one free dimension by enumerating the others
        while sum(1 for k, _ in parts if k == "sym") > 1:
            i = next(i for i, (k, _) in enumerate(parts) if k == "sym")
            ref = parts[i][1]
            dim = table.dims[i]
            options = [_Option([var_eq_const(ref.var, v)], v) for v in dim.domain()]
            if isinstance(dim, IntPoolDim):  # out-of-pool values all map to BOT
                options.append(
                    _Option([var_neq_const(ref.var, v) for v in dim.domain()], None))
            v = self.decide(options, generated=naive)
            naive = 0
            if v is None:
                return self._table_result(table, BOT)
            parts[i] = ("conc", v)
        free_at = next((i for i, (k, _) in enumerate(parts) if k == "sym"), None)
        if free_at is None:
            lookup = tuple(p for _, p in parts)
            return self._table_result(table, table.lookup(lookup))
        ref = parts[free_at][1]
        dim = table.dims[free_at]
        rows = []
        for v in dim.domain():
            lookup = tuple(v if i == free_at else p
                           for i, (_, p) in enumerate(parts))
            cell = table.lookup(lookup)
            if cell is not BOT:
                rows.append((cell, v))
        rows.sort(key=lambda cv: (_cell_sort_key(cv[0]), cv[1]))
        options = [_Option([var_eq_const(ref.var, v)], cell) for cell, v in rows]
        # one BOT successor whose condition excludes every surviving row
        options.append(_Option([var_neq_const(ref.var, v) for _, v in rows], BOT))
        cell = self.decide(options, generated=naive, record_fork=True)
        return self._table_result(table, cell)

    def _table_result(self, table, cell):
        if table.result_indexed:
            return Value(index_of(table.result.type_tag), cell)
        if cell is BOT:
            return Value(table.signature.return_type, BOT)
        return cell

    # -- reporting -----------------------------------------------------------------

    def finite_vars(self):
        return [v.var for v in self.symvars.values() if isinstance(v, SymRef)]

    def concrete_inputs(self, model) -> dict:
        out = {}
        for name, ref in self.symvars.items():
            if isinstance(ref, Opaque):
                out[name] = self.concretized.get(name, _concretize_default(ref.tag))
                continue
            got = model.get(name, 0)
            tag = ref.tag
            if is_index(tag):
                out[name] = self._garden(tag).value_at(got)
            elif tag is BOOL:
                out[name] = mk_bool(bool(got))
            else:
                out[name] = mk_int(got)
        return out


def _concretize_default(tag: TypeTag) -> Value:
    if tag is STR:
        return mk_str(b"")
    if tag is FLOAT:
        return mk_float(0.0)
    if tag is BOOL:
        return mk_bool(False)
    return mk_int(0)


def _const_for(sym: SymRef, conc: Value):
    """Map a concrete comparison operand onto the symbolic side's domain."""
    raw = conc.raw
    if sym.tag is BOOL:
        raw = 1 if raw else 0
    if isinstance(raw, bool):
        raw = int(raw)
    if isinstance(raw, int) and 0 <= raw < sym.var.size:
        return raw
    return None


def _cell_sort_key(cell):
    raw = cell.raw if isinstance(cell, Value) else cell
    if isinstance(raw, bool):
        return (0, int(raw))
    if isinstance(raw, int):
        return (0, raw)
    if isinstance(raw, float):
        return (0, raw) if raw == raw else (1, 0.0)
    return (2, repr(raw))


# ---------------------------------------------------------------------------
# Public entry points
# ---------------------------------------------------------------------------


def explore(program: Program, cfg: ExploreConfig) -> ExplorationReport:
    """Explore a rewritten (or fully concrete) program in indexed mode."""
    if cfg.mode != MODE_INDEXED:
        raise SymexError("explore runs indexed mode; use explore_baseline")
    return Engine(program, cfg).explore()


def explore_baseline(program: Program, cfg: ExploreConfig) -> ExplorationReport:
    """Explore the original program, abandoning or concretizing at operator
    calls that would generate intractable constraints."""
    if cfg.mode not in (MODE_ABANDON, MODE_CONCRETIZE):
        raise SymexError("baseline mode must be abandon or concretize")
    return Engine(program, cfg).explore()


@dataclass(frozen=True)
class ReplayResult:
    ok: bool
    verdict: str
    expected: str
    detail: str = ""


def replay(program: Program, tc: TestCase, *, gardens=None, tables=None,
           unroll: int = 16, bot_propagate: bool = False) -> ReplayResult:
    """Re-run a test case on the concrete interpreter and compare outcomes."""
    res = interpret(program, tc.inputs, gardens=gardens, tables=tables,
                    unroll=unroll, bot_propagate=bot_propagate)
    if res.verdict != tc.verdict:
        return ReplayResult(False, res.verdict, tc.verdict, "verdict mismatch")
    if res.covered_branches != tc.covered_branches:
        return ReplayResult(False, res.verdict, tc.verdict, "branch trace mismatch")
    return ReplayResult(True, res.verdict, tc.verdict)
