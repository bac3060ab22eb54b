"""Canonical pretty-printer. Output reparses to a structurally equal program."""

from __future__ import annotations

import json

from .hierarchy import ResolutionError, lookup_method, superclass
from .nodes import (
    Assign,
    Attribute,
    Binary,
    BoolLit,
    Call,
    Cast,
    ClassDecl,
    Expr,
    ExprStmt,
    FieldAccess,
    If,
    InstanceOf,
    IntLit,
    Invariant,
    MetaVar,
    Name,
    New,
    NullLit,
    Old,
    Program,
    Result,
    Return,
    SpecCase,
    Stmt,
    StringLit,
    Super,
    This,
    Unary,
    VarDecl,
)

INDENT = "  "

# binding strength; higher binds tighter
PRECEDENCE = {
    "==>": 1,
    "||": 2,
    "&&": 3,
    "==": 4,
    "!=": 4,
    "<": 5,
    ">": 5,
    "<=": 5,
    ">=": 5,
    "instanceof": 5,
    "+": 6,
    "-": 6,
    "*": 7,
    "/": 7,
    "%": 7,
}
UNARY = 8
POSTFIX = 9


def _prec(e: Expr) -> int:
    if isinstance(e, Binary):
        return PRECEDENCE[e.op]
    if isinstance(e, InstanceOf):
        return PRECEDENCE["instanceof"]
    if isinstance(e, (Unary, Cast)):
        return UNARY
    if isinstance(e, IntLit) and e.value < 0:
        return UNARY
    return POSTFIX


def _wrap(e: Expr, needed: bool) -> str:
    s = expr_str(e)
    return f"({s})" if needed else s


def expr_str(e: Expr) -> str:
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, StringLit):
        return json.dumps(e.value)
    if isinstance(e, NullLit):
        return "null"
    if isinstance(e, This):
        return "this"
    if isinstance(e, Super):
        return "super"
    if isinstance(e, Result):
        return "\\result"
    if isinstance(e, Name):
        return e.name
    if isinstance(e, MetaVar):
        return f"${e.name}"
    if isinstance(e, Old):
        return f"\\old({expr_str(e.expr)})"
    if isinstance(e, FieldAccess):
        return f"{_wrap(e.target, _prec(e.target) < POSTFIX)}.{e.name}"
    if isinstance(e, Call):
        args = ", ".join(expr_str(a) for a in e.args)
        if e.target is None:
            return f"{e.name}({args})"
        return f"{_wrap(e.target, _prec(e.target) < POSTFIX)}.{e.name}({args})"
    if isinstance(e, New):
        return f"new {e.cls}({', '.join(expr_str(a) for a in e.args)})"
    if isinstance(e, Unary):
        inner = e.operand
        # "- -1" must not collapse into a decrement-like token run
        needs = _prec(inner) < UNARY or (e.op == "-" and isinstance(inner, (Unary, IntLit)))
        return f"{e.op}{_wrap(inner, needs)}"
    if isinstance(e, Cast):
        inner = e.expr
        needs = _prec(inner) < UNARY or (isinstance(inner, Unary) and inner.op == "-") or (
            isinstance(inner, IntLit) and inner.value < 0
        )
        return f"({e.cls}) {_wrap(inner, needs)}"
    if isinstance(e, InstanceOf):
        p = PRECEDENCE["instanceof"]
        return f"{_wrap(e.expr, _prec(e.expr) < p)} instanceof {e.cls}"
    if isinstance(e, Binary):
        p = PRECEDENCE[e.op]
        if e.op == "==>":  # right associative
            left_paren = _prec(e.left) <= p
            right_paren = _prec(e.right) < p
        else:
            left_paren = _prec(e.left) < p
            right_paren = _prec(e.right) <= p
        return f"{_wrap(e.left, left_paren)} {e.op} {_wrap(e.right, right_paren)}"
    raise TypeError(f"cannot print {type(e).__name__}")


def stmt_lines(s: Stmt, depth: int) -> list[str]:
    pad = INDENT * depth
    if isinstance(s, Return):
        return [pad + ("return;" if s.value is None else f"return {expr_str(s.value)};")]
    if isinstance(s, VarDecl):
        init = "" if s.init is None else f" = {expr_str(s.init)}"
        return [f"{pad}{s.type.name} {s.name}{init};"]
    if isinstance(s, Assign):
        return [f"{pad}{expr_str(s.target)} = {expr_str(s.value)};"]
    if isinstance(s, ExprStmt):
        return [f"{pad}{expr_str(s.expr)};"]
    if isinstance(s, If):
        lines = [f"{pad}if ({expr_str(s.cond)}) {{"]
        for inner in s.then:
            lines += stmt_lines(inner, depth + 1)
        if s.orelse is not None:
            lines.append(f"{pad}}} else {{")
            for inner in s.orelse:
                lines += stmt_lines(inner, depth + 1)
        lines.append(pad + "}")
        return lines
    raise TypeError(f"cannot print {type(s).__name__}")


def _body(body, depth: int) -> list[str]:
    lines = []
    for s in body:
        lines += stmt_lines(s, depth)
    return lines


def _spec_lines(cases: tuple[SpecCase, ...], overriding: bool, pad: str) -> list[str]:
    lines = []
    for i, case in enumerate(cases):
        if i > 0 or overriding:
            lines.append(f"{pad}//@ also")
        pre_default = case.pre == BoolLit(True)
        post_default = case.post == BoolLit(True)
        if not pre_default or post_default:
            lines.append(f"{pad}//@ requires {expr_str(case.pre)};")
        if not post_default:
            lines.append(f"{pad}//@ ensures {expr_str(case.post)};")
    return lines


def _mods(vis) -> str:
    return f"{vis.keyword} " if vis.keyword else ""


def _overrides(program: Program | None, cls: ClassDecl, name: str) -> bool:
    if program is None:
        return False
    try:
        parent = superclass(program, cls.name)
        return parent is not None and lookup_method(program, parent, name) is not None
    except ResolutionError:
        return False


def invariant_line(inv: Invariant) -> str:
    return f"//@ {_mods(inv.visibility)}invariant {expr_str(inv.pred)};"


def attribute_line(a: Attribute) -> str:
    nullable = "/*@ nullable @*/ " if a.nullable else ""
    init = "" if a.init is None else f" = {expr_str(a.init)}"
    return f"{_mods(a.visibility)}{nullable}{a.type.name} {a.name}{init};"


def _params(params) -> str:
    return ", ".join(f"{p.type.name} {p.name}" for p in params)


def class_lines(cls: ClassDecl, program: Program | None = None) -> list[str]:
    header = "public class" if cls.public else "class"
    ext = "" if cls.superclass == "Object" else f" extends {cls.superclass}"
    lines = [f"{header} {cls.name}{ext} {{"]
    pad = INDENT
    for inv in cls.invariants:
        lines.append(pad + invariant_line(inv))
    for a in cls.attributes:
        lines.append(pad + attribute_line(a))
    for c in cls.constructors:
        lines += _member_block(
            _spec_lines(c.spec_cases, False, pad),
            f"{pad}{_mods(c.visibility)}{cls.name}({_params(c.params)}) {{",
            c.body,
        )
    for m in cls.methods:
        rtype = m.return_type.name if m.return_type else "void"
        pure = "/*@ pure @*/ " if m.pure else ""
        overriding = bool(m.spec_cases) and _overrides(program, cls, m.name)
        lines += _member_block(
            _spec_lines(m.spec_cases, overriding, pad),
            f"{pad}{_mods(m.visibility)}{pure}{rtype} {m.name}({_params(m.params)}) {{",
            m.body,
        )
    if cls.main is not None:
        lines += _member_block(
            [], f"{pad}public static void main(String[] {cls.main.param}) {{", cls.main.body
        )
    lines.append("}")
    return lines


def _member_block(spec: list[str], header: str, body) -> list[str]:
    return spec + [header] + _body(body, 2) + [INDENT + "}"]


def print_class(cls: ClassDecl, program: Program | None = None) -> str:
    return "\n".join(class_lines(cls, program)) + "\n"


def pretty_print(program: Program) -> str:
    blocks = [print_class(c, program) for c in program.classes]
    return "\n".join(blocks)


__all__ = ["pretty_print", "print_class", "expr_str", "stmt_lines"]
