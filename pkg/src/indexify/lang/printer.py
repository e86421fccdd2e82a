"""Canonical pretty-printer for MiniImp programs."""

from __future__ import annotations

import math

from .ast import (
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
    Expr,
    ExprStmt,
    FunctionDef,
    If,
    Literal,
    MakeSymbolic,
    Program,
    Return,
    Stmt,
    TypeTag,
    UnOp,
    Var,
    While,
)

_PREC = {
    "||": 1, "&&": 2,
    "==": 3, "!=": 3,
    "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5,
    "*": 6, "/": 6, "%": 6,
}
_UNARY_PREC = 7


def escape_bytes(b: bytes) -> str:
    out = []
    for c in b:
        if c == 0x22:
            out.append('\\"')
        elif c == 0x5C:
            out.append("\\\\")
        elif c == 0x0A:
            out.append("\\n")
        elif c == 0x09:
            out.append("\\t")
        elif 0x20 <= c < 0x7F:
            out.append(chr(c))
        else:
            out.append(f"\\x{c:02x}")
    return "".join(out)


def print_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    return repr(x)


def print_type(t: TypeTag) -> str:
    if t.name == "index":
        return f"index<{t.base.name}>"
    return t.name


def print_expr(e: Expr, prec: int = 0) -> str:
    if isinstance(e, Literal):
        if e.tag is INT:
            s = str(e.value)
        elif e.tag is FLOAT:
            s = print_float(e.value)
        elif e.tag is BOOL:
            s = "true" if e.value else "false"
        elif e.tag is STR:
            s = f'"{escape_bytes(e.value)}"'
        else:  # index literal
            s = f"{e.value}@{e.tag.base.name}"
        # negative numeric literals bind like a unary expression
        if e.tag in (INT, FLOAT) and s.startswith("-") and prec > _UNARY_PREC:
            return f"({s})"
        return s
    if isinstance(e, BotLiteral):
        return f"bot@{e.tag.base.name}"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.name}({', '.join(print_expr(a) for a in e.args)})"
    if isinstance(e, UnOp):
        s = f"{e.op}{print_expr(e.operand, _UNARY_PREC + 1)}"
        return f"({s})" if prec > _UNARY_PREC else s
    if isinstance(e, BinOp):
        p = _PREC[e.op]
        s = f"{print_expr(e.left, p)} {e.op} {print_expr(e.right, p + 1)}"
        return f"({s})" if prec > p else s
    raise TypeError(f"unprintable node {e!r}")


def _print_block(body: list[Stmt], indent: int, out: list[str]) -> None:
    pad = "  " * indent
    for s in body:
        if isinstance(s, Decl):
            init = f" = {print_expr(s.init)}" if s.init is not None else ""
            out.append(f"{pad}{print_type(s.type)} {s.name}{init};")
        elif isinstance(s, Assign):
            out.append(f"{pad}{s.name} = {print_expr(s.value)};")
        elif isinstance(s, If):
            out.append(f"{pad}if ({print_expr(s.cond)}) {{")
            _print_block(s.then, indent + 1, out)
            if s.orelse:
                out.append(f"{pad}}} else {{")
                _print_block(s.orelse, indent + 1, out)
            out.append(f"{pad}}}")
        elif isinstance(s, While):
            out.append(f"{pad}while ({print_expr(s.cond)}) {{")
            _print_block(s.body, indent + 1, out)
            out.append(f"{pad}}}")
        elif isinstance(s, Assert):
            out.append(f"{pad}assert({print_expr(s.cond)});")
        elif isinstance(s, Return):
            out.append(f"{pad}return {print_expr(s.value)};" if s.value else f"{pad}return;")
        elif isinstance(s, ExprStmt):
            out.append(f"{pad}{print_expr(s.expr)};")
        elif isinstance(s, MakeSymbolic):
            out.append(f"{pad}symbolic {s.name};")
        else:
            raise TypeError(f"unprintable statement {s!r}")


def print_function(f: FunctionDef) -> str:
    params = ", ".join(f"{print_type(p.type)} {p.name}" for p in f.params)
    out = [f"{print_type(f.return_type)} {f.name}({params}) {{"]
    _print_block(f.body, 1, out)
    out.append("}")
    return "\n".join(out)


def print_program(p: Program) -> str:
    return "\n\n".join(print_function(f) for f in p.functions) + "\n"
