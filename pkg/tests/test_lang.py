import random

import pytest

from indexify.bench import CORPUS, corpus_path
from indexify.lang.ast import (
    BOOL,
    FLOAT,
    INT,
    STR,
    MiniImpSyntaxError,
    MiniImpTypeError,
    index_of,
    mk_int,
    mk_str,
)
from indexify.lang.interp import interpret
from indexify.lang.parser import parse
from indexify.lang.printer import print_program
from indexify.lang.typecheck import typecheck

VENDOR_SOURCE = open(corpus_path("vendor_check")).read()


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def test_minimal_program():
    p = parse("int main(){ return 0; }")
    assert len(p.functions) == 1
    assert len(p.main.body) == 1


def test_vendor_program_shape():
    p = parse(VENDOR_SOURCE)
    strings = [e for f in p.functions for _, s in _stmts(f)
               for e in _literals(s) if e.tag is STR]
    assert {e.value for e in strings} == {b"NVidia Corporation", b"NVidia"}
    asserts = [s for f in p.functions for _, s in _stmts(f)
               if type(s).__name__ == "Assert"]
    assert len(asserts) == 1


def _stmts(f):
    from indexify.lang.ast import walk_stmts

    return walk_stmts(f.body)


def _literals(s):
    from indexify.lang.ast import BinOp, Call, Literal, UnOp

    def walk(e):
        if isinstance(e, Literal):
            yield e
        elif isinstance(e, BinOp):
            yield from walk(e.left)
            yield from walk(e.right)
        elif isinstance(e, UnOp):
            yield from walk(e.operand)
        elif isinstance(e, Call):
            for a in e.args:
                yield from walk(a)

    for attr in ("init", "value", "cond", "expr"):
        e = getattr(s, attr, None)
        if e is not None:
            yield from walk(e)


def test_undeclared_variable_rejected():
    with pytest.raises(MiniImpTypeError, match="undeclared"):
        typecheck(parse("int main(){ return x; }"))


def test_duplicate_declaration_rejected():
    with pytest.raises(MiniImpTypeError, match="duplicate"):
        typecheck(parse("int main(){ int a; int a; return 0; }"))


def test_unknown_type_name_rejected():
    with pytest.raises(MiniImpSyntaxError):
        parse("wibble main(){ return 0; }")


def test_syntax_error_carries_position():
    with pytest.raises(MiniImpSyntaxError) as e:
        parse("int main(){\n  return ;; }")
    assert e.value.line == 2


def test_string_escapes_roundtrip():
    p = parse(r'int main(){ str s = "a\tb\n\\\"\x00\xff"; return 0; }')
    lit = p.main.body[0].init
    assert lit.value == b'a\tb\n\\"\x00\xff'
    assert parse(print_program(p)) == p


def test_index_and_bot_literals():
    p = parse("int main(){ index<str> s = 2@str; s = bot@str; return 0; }")
    assert p.main.body[0].type == index_of(STR)
    assert p.main.body[0].init.tag == index_of(STR)
    assert parse(print_program(p)) == p


def test_float_literals_roundtrip():
    src = "int main(){ float a = 2.0; float b = 1e-05; float c = nan; float d = -inf; return 0; }"
    p = parse(src)
    assert parse(print_program(p)) == p


def test_roundtrip_on_corpus():
    for entry in CORPUS:
        src = open(corpus_path(entry.name)).read()
        p = parse(src)
        assert parse(print_program(p)) == p, entry.name


# ---------------------------------------------------------------------------
# typechecking
# ---------------------------------------------------------------------------


def test_builtin_signature_lookup():
    p = typecheck(parse('int main(){ str s = strcat("a", "b"); return strlen(s); }'))
    assert p.main.body[0].init.ty is STR


def test_builtin_type_mismatch():
    with pytest.raises(MiniImpTypeError, match="argument 2"):
        typecheck(parse('int main(){ str s = strcat("a", 1); return 0; }'))


def test_arity_mismatch():
    with pytest.raises(MiniImpTypeError, match="arguments"):
        typecheck(parse('int main(){ str s = strcat("a"); return 0; }'))


def test_unknown_function():
    with pytest.raises(MiniImpTypeError, match="unknown function"):
        typecheck(parse("int main(){ return frob(1); }"))


def test_indexed_call_annotation(fig5_strstr):
    p = parse("int main(){ index<str> r = i_strstr(0@str, 2@str); return 0; }")
    typecheck(p, extra_sigs={"i_strstr": fig5_strstr.indexed_signature()})
    assert p.main.body[0].init.ty == index_of(STR)


def test_recursion_rejected():
    src = "int f(int n){ return g(n); } int g(int n){ return f(n); } int main(){ return f(1); }"
    with pytest.raises(MiniImpTypeError, match="recursive"):
        typecheck(parse(src))


def test_str_equality_rejected():
    with pytest.raises(MiniImpTypeError, match="strcmp"):
        typecheck(parse('int main(){ str a = "x"; if (a == a) { return 1; } return 0; }'))


# ---------------------------------------------------------------------------
# interpretation
# ---------------------------------------------------------------------------


def test_constant_return():
    p = typecheck(parse("int main(){ return 0; }"))
    r = interpret(p)
    assert r.verdict == "ok"
    assert r.return_value == mk_int(0)


def test_vendor_bug_concrete_trigger():
    p = typecheck(parse(VENDOR_SOURCE))
    r = interpret(p, {"vendor": mk_str(b"NVidia C"),
                      "nv11vendor": mk_str(b"NVidia Corporation")})
    assert r.verdict == "assertion-failure"
    ok = interpret(p, {"vendor": mk_str(b"NVidia Corporation"),
                       "nv11vendor": mk_str(b"NVidia Corporation")})
    assert ok.verdict == "ok"
    assert ok.return_value == mk_int(1)


def test_strstr_wrapper_oracle():
    src = """
    int main() {
      str r = strstr("foobar", "oo");
      assert(strcmp(r, "oobar") == 0);
      return strlen(r);
    }
    """
    r = interpret(typecheck(parse(src)))
    assert r.verdict == "ok"
    assert r.return_value == mk_int(5)


def test_interpreter_determinism():
    p = typecheck(parse(VENDOR_SOURCE))
    inputs = {"vendor": mk_str(b"NVidia"), "nv11vendor": mk_str(b"NVidia")}
    a = interpret(p, inputs)
    b = interpret(p, inputs)
    assert a == b


def test_loop_bound_exceeded():
    p = typecheck(parse("int main(){ int i = 0; while (i < 100) { i = i + 1; } return i; }"))
    assert interpret(p, unroll=16).verdict == "bound-exceeded"
    assert interpret(p, unroll=200).verdict == "ok"


def test_type_preservation_random_programs():
    # evaluating an expression annotated t yields a value tagged t
    rng = random.Random(5)
    exprs = [
        ("1 + 2 * 3", INT), ("7 % 3", INT), ("0 - 4 / 2", INT),
        ("1 < 2", BOOL), ("!(1 == 2) && true", BOOL),
        ("strlen(strcat(\"ab\", \"c\"))", INT),
        ("strcmp(\"a\", \"b\")", INT),
        ("fadd(1.5, 2.5)", FLOAT), ("fmin(1.0, 2.0)", FLOAT),
    ]
    for text, want in rng.sample(exprs, len(exprs)):
        ret = {INT: "int", BOOL: "bool", FLOAT: "float"}[want]
        p = typecheck(parse(f"{ret} main(){{ return {text}; }}"))
        assert p.main.body[0].value.ty is want
        assert interpret(p).return_value.tag is want


def test_c_division_truncates_toward_zero():
    p = typecheck(parse("int main(){ return (0 - 7) / 2; }"))
    assert interpret(p).return_value == mk_int(-3)
    p = typecheck(parse("int main(){ return (0 - 7) % 2; }"))
    assert interpret(p).return_value == mk_int(-1)


def test_user_function_call_by_value():
    src = """
    int bump(int n) { n = n + 1; return n; }
    int main() { int a = 5; int b = bump(a); return a * 10 + b; }
    """
    assert interpret(typecheck(parse(src))).return_value == mk_int(56)


def test_unbound_symbolic_rejected():
    p = typecheck(parse("int main(){ int n; symbolic n; return n; }"))
    with pytest.raises(Exception, match="unbound symbolic"):
        interpret(p, {})
