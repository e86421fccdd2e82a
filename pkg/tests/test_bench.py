import pytest

from indexify.bench import (
    CONTROL,
    CORPUS,
    STRING_HEAVY,
    corpus_path,
    format_aggregate,
    run_corpus,
)
from indexify.lang.interp import interpret
from indexify.lang.parser import parse
from indexify.lang.typecheck import typecheck
from indexify.symex import MODE_ABANDON, MODE_CONCRETIZE, MODE_INDEXED


@pytest.fixture(scope="module")
def aggregate():
    return run_corpus()


def test_corpus_has_twelve_entries_across_categories():
    assert len(CORPUS) == 12
    categories = {e.category for e in CORPUS}
    assert categories == {"string-heavy", "float-heavy", "mixed", "control"}


def test_every_entry_parses_typechecks_and_terminates():
    for entry in CORPUS:
        program = typecheck(parse(open(corpus_path(entry.name)).read()))
        # at least one input completes within the default unroll bound:
        # defaults cover programs whose symbolic variables never block
        defaults = {}
        from indexify.lang.ast import FLOAT, INT, STR, mk_float, mk_int, mk_str
        from indexify.lang.ast import BOOL, mk_bool, walk_stmts, Decl, MakeSymbolic

        names = set()
        for f in program.functions:
            for _, s in walk_stmts(f.body):
                if isinstance(s, MakeSymbolic):
                    names.add(s.name)
        decls = {}
        for f in program.functions:
            for _, s in walk_stmts(f.body):
                if isinstance(s, Decl):
                    decls[s.name] = s.type
        for n in names:
            tag = decls[n]
            defaults[n] = {STR: mk_str(b""), INT: mk_int(0),
                           FLOAT: mk_float(0.0), BOOL: mk_bool(False)}[tag]
        res = interpret(program, defaults)
        assert res.verdict in ("ok", "assertion-failure"), entry.name


def test_no_witness_violations(aggregate):
    assert aggregate.violations == ()


def test_indexed_dominates_baseline_mean(aggregate):
    assert aggregate.mean_branch_cov(MODE_INDEXED) > \
        aggregate.mean_branch_cov(MODE_ABANDON)


def test_controls_have_equal_coverage(aggregate):
    for r in aggregate.results:
        if r.entry.category == CONTROL:
            assert r.reports[MODE_INDEXED].branch_covered == \
                r.reports[MODE_ABANDON].branch_covered


def test_simplification_reduces_atoms_on_string_heavy(aggregate):
    for r in aggregate.results:
        if r.entry.category == STRING_HEAVY:
            rep = r.reports[MODE_INDEXED]
            assert rep.atoms_sent < rep.atoms_generated, r.entry.name


def test_report_stable_across_runs(aggregate):
    again = run_corpus()
    assert format_aggregate(again) == format_aggregate(aggregate)


def test_concretize_mode_runs_clean():
    entries = [e for e in CORPUS if e.name in ("vendor_check", "substring_branch")]
    agg = run_corpus(corpus=entries,
                     modes=(MODE_INDEXED, MODE_ABANDON, MODE_CONCRETIZE))
    assert agg.violations == ()


def test_aggregate_formatting(aggregate):
    text = format_aggregate(aggregate)
    assert "vendor_check" in text
    assert "mean_branch_cov[indexed]" in text
