"""Command-line front end: harvest -> build garden -> memoise -> rewrite -> explore.

    indexify --type string program.mi
    indexify --type string program.mi --garden G.txt --F+ ops.txt
    indexify --type float bench.mi --baseline abandon
    indexify --type string program.mi --compare

Artifacts (garden file, operator tables, reports, test cases) land in
<input>.out/ by default; --outputIndexedIR additionally writes the rewritten
source to <input>.indexed.mi.  Exit status: 0 on success, 1 when an
assertion-failure test case was found (or a replay diverged), 2 on usage
errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass

from .garden import (
    BuilderConfig,
    GardenError,
    IndexMap,
    SeedSet,
    build_garden,
    harvest_int_pool,
    harvest_seeds,
    load_gardens,
    parse_literal,
    serialize_gardens,
)
from .iot import REGISTRY, IotError, class_for_type, memoise_all, parse_iot, serialize_iot
from .lang.ast import FLOAT, INT, STR, MiniImpError, Program, Value, mk_bool, mk_str
from .lang.parser import parse
from .lang.printer import escape_bytes, print_float
from .lang.typecheck import typecheck
from .rewrite import RewriteConfig, RewriteError, emit_indexed_source, normalize
from .symex import (
    MODE_ABANDON,
    MODE_CONCRETIZE,
    MODE_INDEXED,
    ExplorationReport,
    ExploreConfig,
    TestCase,
    explore,
    explore_baseline,
)

_TYPE_CHOICES = {"string": (STR,), "float": (FLOAT,), "both": (STR, FLOAT)}


class UsageError(Exception):
    pass


@dataclass
class CliConfig:
    input_path: str
    indexed_types: tuple = (STR,)
    seeds_file: str | None = None
    add_seeds_file: str | None = None
    garden_file: str | None = None
    iot_file: str | None = None
    fplus_file: str | None = None
    f_plus_names: tuple | None = None  # direct override, used by the bench harness
    k: int = 3
    maxlen: int = 8
    builder_mode: str = "ops"
    baseline: str | None = None  # None = indexed mode
    emit_ir: bool = False
    outdir: str | None = None
    max_states: int = 100_000
    timeout_s: float = 60.0
    unroll: int = 16
    bot_propagate: bool = False


@dataclass
class Pipeline:
    program: Program
    gardens: dict
    int_pool: tuple
    f_plus: set
    tables: dict
    indexed: object | None = None  # IndexationResult when rewriting ran


# ---------------------------------------------------------------------------
# Input file formats
# ---------------------------------------------------------------------------


def load_seeds_file(path: str) -> SeedSet:
    """One literal per line with a type prefix: str:..., float:..., int:..."""
    tags = {"str": STR, "float": FLOAT}
    seeds = SeedSet()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            if ":" not in line:
                raise UsageError(f"{path}:{lineno}: expected <type>:<literal>")
            prefix, text = line.split(":", 1)
            tag = tags.get(prefix)
            if tag is None:
                raise UsageError(f"{path}:{lineno}: unknown seed type {prefix!r}")
            seeds.add(parse_literal(tag, text))
    return seeds


def load_fplus_file(path: str) -> set:
    names = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            name = line.strip()
            if not name or name.startswith("#"):
                continue
            if name not in REGISTRY:
                raise UsageError(f"{path}: unknown operator {name!r}")
            names.add(name)
    return names


def default_f_plus(indexed_types) -> set:
    names = set()
    for tag in indexed_types:
        klass = class_for_type(tag)
        for name, op in REGISTRY.items():
            if op.klass == klass:
                names.add(name)
    return names


def default_builders(f_plus, indexed_types, gardens_types=None):
    """B+ defaults to the garden-growable part of F+: mono-typed operators
    whose arguments and result are all of one indexed type."""
    builders = []
    for name in sorted(f_plus):
        sig = REGISTRY[name].signature
        types = set(sig.arg_types) | {sig.return_type}
        if len(types) == 1 and sig.return_type in indexed_types:
            builders.append(sig)
    return tuple(builders)


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------


def build_pipeline(program: Program, cfg: CliConfig) -> Pipeline:
    typecheck(program)
    types = set(cfg.indexed_types)

    if cfg.f_plus_names is not None:
        f_plus = set(cfg.f_plus_names)
        for name in f_plus:
            if name not in REGISTRY:
                raise UsageError(f"unknown operator {name!r} in F+")
    elif cfg.fplus_file:
        f_plus = load_fplus_file(cfg.fplus_file)
    else:
        f_plus = default_f_plus(types)

    if cfg.seeds_file:
        seeds = load_seeds_file(cfg.seeds_file)  # prevents constant harvesting
    else:
        seeds = harvest_seeds(program, types)
        if cfg.add_seeds_file:
            for tag, vals in load_seeds_file(cfg.add_seeds_file).per_type.items():
                for v in vals:
                    seeds.add(v)
    if STR in types:
        seeds.add(mk_str(b""))  # the empty string is always seeded

    int_pool = harvest_int_pool(program)

    if cfg.garden_file:
        with open(cfg.garden_file, encoding="utf-8") as fh:
            gardens = load_gardens(fh.read())
        for tag in types:
            gardens.setdefault(tag, IndexMap(tag))
    else:
        bcfg = BuilderConfig(
            builders=default_builders(f_plus, types),
            k=cfg.k, max_str_len=cfg.maxlen, mode=cfg.builder_mode,
        )
        gardens = build_garden(seeds, bcfg, types=types)

    tables = {}
    if cfg.iot_file:
        with open(cfg.iot_file, encoding="utf-8") as fh:
            for chunk in _split_iot_chunks(fh.read()):
                t = parse_iot(chunk, gardens)
                tables[t.indexed_name] = t
    missing = {n for n in f_plus if "i_" + n not in tables}
    tables.update(memoise_all(gardens, missing, int_pool))

    return Pipeline(program=program, gardens=gardens, int_pool=int_pool,
                    f_plus=f_plus, tables=tables)


def _split_iot_chunks(text: str):
    chunk: list[str] = []
    for line in text.splitlines():
        if line.startswith("iot ") and chunk:
            yield "\n".join(chunk)
            chunk = []
        if line.strip():
            chunk.append(line)
    if chunk:
        yield "\n".join(chunk)


def rewrite_pipeline(pipe: Pipeline, cfg: CliConfig) -> Pipeline:
    rcfg = RewriteConfig(
        indexed_types=set(cfg.indexed_types),
        f_plus=pipe.f_plus,
        gardens=pipe.gardens,
        tables=pipe.tables,
    )
    pipe.indexed = normalize(pipe.program, rcfg)
    return pipe


def explore_config(cfg: CliConfig, pipe: Pipeline, mode: str) -> ExploreConfig:
    return ExploreConfig(
        mode=mode,
        gardens=pipe.gardens if mode == MODE_INDEXED else {},
        tables=pipe.tables if mode == MODE_INDEXED else {},
        unroll=cfg.unroll,
        max_states=cfg.max_states,
        wallclock_s=cfg.timeout_s,
        bot_propagate=cfg.bot_propagate,
    )


def run_mode(cfg: CliConfig, pipe: Pipeline, mode: str) -> ExplorationReport:
    if mode == MODE_INDEXED:
        if pipe.indexed is None:
            rewrite_pipeline(pipe, cfg)
        return explore(pipe.indexed.program, explore_config(cfg, pipe, mode))
    return explore_baseline(pipe.program, explore_config(cfg, pipe, mode))


# ---------------------------------------------------------------------------
# Artifacts
# ---------------------------------------------------------------------------


def format_input_value(v: Value) -> str:
    if v.tag is STR:
        return f'"{escape_bytes(v.raw)}"'
    if v.tag is FLOAT:
        return print_float(v.raw)
    if v.tag.name == "bool":
        return "true" if v.raw else "false"
    return str(v.raw)


def parse_input_value(text: str) -> Value:
    text = text.strip()
    if text.startswith('"'):
        from .lang.parser import Token, unescape_string

        return mk_str(unescape_string(Token("string", text, 0, 0)))
    if text in ("true", "false"):
        return mk_bool(text == "true")
    try:
        return Value(INT, int(text))
    except ValueError:
        return Value(FLOAT, float(text))


def format_testcase(tc: TestCase) -> str:
    lines = [f"# testcase {tc.path_id} verdict={tc.verdict}"]
    for name in sorted(tc.inputs):
        lines.append(f"{name}={format_input_value(tc.inputs[name])}")
    return "\n".join(lines) + "\n"


def parse_testcase_file(text: str):
    inputs = {}
    verdict = None
    for line in text.splitlines():
        if line.startswith("#"):
            if "verdict=" in line:
                verdict = line.split("verdict=", 1)[1].strip()
            continue
        if not line.strip():
            continue
        name, _, value = line.partition("=")
        inputs[name.strip()] = parse_input_value(value)
    return inputs, verdict


def format_report(report: ExplorationReport, program_name: str) -> str:
    lines = [
        f"program {program_name}",
        f"mode {report.mode}",
        f"paths {report.paths}",
        f"states {report.states}",
        f"solver_queries {report.solver_queries}",
        f"atoms_generated {report.atoms_generated}",
        f"atoms_sent {report.atoms_sent}",
        f"escaped_paths {report.escaped_paths}",
        f"branch_coverage {report.branch_covered}/{report.branch_total}",
        f"instr_coverage {report.instr_covered}/{report.instr_total}",
        f"truncated {str(report.truncated).lower()}",
    ]
    for tc in report.test_cases:
        inputs = " ".join(f"{k}={format_input_value(v)}"
                          for k, v in sorted(tc.inputs.items()))
        lines.append(f"testcase {tc.path_id} verdict={tc.verdict} {inputs}".rstrip())
    return "\n".join(lines) + "\n"


def human_summary(report: ExplorationReport) -> str:
    return (
        f"[{report.mode}] paths={report.paths} states={report.states} "
        f"bcov={report.branch_cov:.2%} icov={report.instr_cov:.2%} "
        f"queries={report.solver_queries} escaped={report.escaped_paths} "
        f"asserts={sum(1 for t in report.test_cases if t.verdict == 'assertion-failure')} "
        f"time={report.elapsed_s:.2f}s"
    )


def write_artifacts(cfg: CliConfig, pipe: Pipeline, reports: dict) -> str:
    outdir = cfg.outdir or cfg.input_path + ".out"
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "garden.txt"), "w", encoding="utf-8") as fh:
        fh.write(serialize_gardens(pipe.gardens))
    with open(os.path.join(outdir, "tables.iot"), "w", encoding="utf-8") as fh:
        for name in sorted(pipe.tables):
            fh.write(serialize_iot(pipe.tables[name]))
    name = os.path.basename(cfg.input_path)
    for mode, report in reports.items():
        suffix = mode.replace("baseline-", "")
        with open(os.path.join(outdir, f"report.{suffix}.txt"), "w",
                  encoding="utf-8") as fh:
            fh.write(format_report(report, name))
        tc_dir = os.path.join(outdir, f"testcases.{suffix}")
        os.makedirs(tc_dir, exist_ok=True)
        for tc in report.test_cases:
            with open(os.path.join(tc_dir, f"{tc.path_id:04d}.tc"), "w",
                      encoding="utf-8") as fh:
                fh.write(format_testcase(tc))
    if cfg.emit_ir and pipe.indexed is not None:
        with open(cfg.input_path + ".indexed.mi", "w", encoding="utf-8") as fh:
            fh.write(emit_indexed_source(pipe.indexed))
    return outdir


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_run(cfg: CliConfig) -> int:
    with open(cfg.input_path, encoding="utf-8") as fh:
        program = parse(fh.read())
    pipe = build_pipeline(program, cfg)
    mode = {None: MODE_INDEXED, "abandon": MODE_ABANDON,
            "concretize": MODE_CONCRETIZE}[cfg.baseline]
    if mode == MODE_INDEXED or cfg.emit_ir:
        rewrite_pipeline(pipe, cfg)
    report = run_mode(cfg, pipe, mode)
    outdir = write_artifacts(cfg, pipe, {mode: report})
    print(human_summary(report))
    print(f"artifacts: {outdir}")
    failures = sum(1 for t in report.test_cases if t.verdict == "assertion-failure")
    return 1 if failures else 0


def cmd_compare(cfg: CliConfig) -> int:
    with open(cfg.input_path, encoding="utf-8") as fh:
        program = parse(fh.read())
    pipe = build_pipeline(program, cfg)
    rewrite_pipeline(pipe, cfg)
    baseline_mode = MODE_CONCRETIZE if cfg.baseline == "concretize" else MODE_ABANDON
    reports = {
        MODE_INDEXED: run_mode(cfg, pipe, MODE_INDEXED),
        baseline_mode: run_mode(cfg, pipe, baseline_mode),
    }
    outdir = write_artifacts(cfg, pipe, reports)
    print(comparison_table(reports))
    print(f"artifacts: {outdir}")
    return 0


def comparison_table(reports: dict) -> str:
    rows = [
        ("metric", *reports.keys()),
        ("branch_cov", *(f"{r.branch_cov:.2%}" for r in reports.values())),
        ("instr_cov", *(f"{r.instr_cov:.2%}" for r in reports.values())),
        ("paths", *(str(r.paths) for r in reports.values())),
        ("queries", *(str(r.solver_queries) for r in reports.values())),
        ("escaped", *(str(r.escaped_paths) for r in reports.values())),
        ("assert_failures",
         *(str(sum(1 for t in r.test_cases if t.verdict == "assertion-failure"))
           for r in reports.values())),
        ("time_s", *(f"{r.elapsed_s:.2f}" for r in reports.values())),
    ]
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    return "\n".join(
        "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
        for row in rows
    )


def cmd_replay(cfg: CliConfig, replay_path: str) -> int:
    from .lang.interp import interpret

    with open(cfg.input_path, encoding="utf-8") as fh:
        program = parse(fh.read())
    pipe = build_pipeline(program, cfg)
    if cfg.baseline is None:
        rewrite_pipeline(pipe, cfg)
        target = pipe.indexed.program
        gardens, tables = pipe.gardens, pipe.tables
    else:
        target, gardens, tables = pipe.program, {}, {}
    paths = [replay_path]
    if os.path.isdir(replay_path):
        paths = [os.path.join(replay_path, p)
                 for p in sorted(os.listdir(replay_path)) if p.endswith(".tc")]
    bad = 0
    for p in paths:
        with open(p, encoding="utf-8") as fh:
            inputs, expected = parse_testcase_file(fh.read())
        res = interpret(target, inputs, gardens=gardens, tables=tables,
                        unroll=cfg.unroll, bot_propagate=cfg.bot_propagate)
        ok = expected is None or res.verdict == expected
        print(f"{p}: verdict={res.verdict}"
              + ("" if ok else f" EXPECTED {expected}"))
        bad += 0 if ok else 1
    return 1 if bad else 0


def cmd_confluence(cfg: CliConfig, trials: int) -> int:
    from .rewrite import confluence_probe

    with open(cfg.input_path, encoding="utf-8") as fh:
        program = parse(fh.read())
    pipe = build_pipeline(program, cfg)
    rcfg = RewriteConfig(set(cfg.indexed_types), pipe.f_plus, pipe.gardens, pipe.tables)
    seed = int(os.environ.get("INDEXIFY_SEED", "0"))
    rep = confluence_probe(program, rcfg, trials, seed=seed)
    print(f"confluence: trials={rep.trials} distinct={rep.distinct_normal_forms} "
          f"all_equal={rep.all_equal}")
    return 0 if rep.all_equal else 1


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="indexify",
        description="Rewrite intractable operators into finite memoized lookup "
                    "tables and symbolically execute over the index algebra.",
    )
    p.add_argument("input", help="MiniImp source file (.mi)")
    p.add_argument("--type", dest="types", choices=sorted(_TYPE_CHOICES),
                   default="string", help="types to index (default: string)")
    p.add_argument("--seeds", dest="seeds_file",
                   help="seed file; prevents constant harvesting")
    p.add_argument("--addSeeds", dest="add_seeds_file",
                   help="seed file merged into the harvested constants")
    p.add_argument("--garden", dest="garden_file",
                   help="load this garden file verbatim instead of building one")
    p.add_argument("--indexOpDefs", dest="iot_file",
                   help="reuse serialized operator tables from this file")
    p.add_argument("--F+", "--F_+", dest="fplus_file",
                   help="file naming the operators to index, one per line")
    p.add_argument("--k", type=int, default=3,
                   help="builder application bound (default 3)")
    p.add_argument("--maxlen", type=int, default=8,
                   help="maximum admitted string length (default 8)")
    p.add_argument("--builder", dest="builder_mode", choices=("ops", "kleene"),
                   default="ops", help="garden growth mode")
    p.add_argument("--baseline", choices=("abandon", "concretize"),
                   help="run the unrewritten program under a baseline policy")
    p.add_argument("--outputIndexedIR", dest="emit_ir", action="store_true",
                   help="write the rewritten source to <input>.indexed.mi")
    p.add_argument("--outdir", help="artifact directory (default <input>.out)")
    p.add_argument("--max-states", type=int, default=100_000)
    p.add_argument("--timeout", dest="timeout_s", type=float, default=60.0)
    p.add_argument("--unroll", type=int, default=16)
    p.add_argument("--bot-propagate", action="store_true",
                   help="let BOT flow through indexed operators; only branches abandon")
    p.add_argument("--compare", action="store_true",
                   help="run indexed and baseline side by side")
    p.add_argument("--replay", dest="replay_path",
                   help="replay a test case file or directory")
    p.add_argument("--confluence", dest="confluence_trials", type=int,
                   help="probe rewriting confluence with N random orders")
    return p


def config_from_args(args) -> CliConfig:
    return CliConfig(
        input_path=args.input,
        indexed_types=_TYPE_CHOICES[args.types],
        seeds_file=args.seeds_file,
        add_seeds_file=args.add_seeds_file,
        garden_file=args.garden_file,
        iot_file=args.iot_file,
        fplus_file=args.fplus_file,
        k=args.k,
        maxlen=args.maxlen,
        builder_mode=args.builder_mode,
        baseline=args.baseline,
        emit_ir=args.emit_ir,
        outdir=args.outdir,
        max_states=args.max_states,
        timeout_s=args.timeout_s,
        unroll=args.unroll,
        bot_propagate=args.bot_propagate,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = config_from_args(args)
    try:
        if args.replay_path:
            return cmd_replay(cfg, args.replay_path)
        if args.confluence_trials:
            return cmd_confluence(cfg, args.confluence_trials)
        if args.compare:
            return cmd_compare(cfg)
        return cmd_run(cfg)
    except (UsageError, GardenError, IotError, RewriteError, MiniImpError,
            FileNotFoundError) as e:
        print(f"indexify: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
