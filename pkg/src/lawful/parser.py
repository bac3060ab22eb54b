"""Recursive-descent parser for `.mjml` sources."""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from .lexer import ANNOTATION_KEYWORDS, Diagnostic, ParseError, Token, tokenize
from .nodes import (
    FALSE,
    TRUE,
    Assign,
    Attribute,
    Binary,
    BoolLit,
    Call,
    Cast,
    ClassDecl,
    Constructor,
    Expr,
    ExprStmt,
    FieldAccess,
    If,
    InstanceOf,
    IntLit,
    Invariant,
    MainMethod,
    Method,
    Name,
    New,
    NullLit,
    Old,
    Param,
    Program,
    Result,
    Return,
    SpecCase,
    Stmt,
    StringLit,
    Super,
    This,
    TypeRef,
    Unary,
    VarDecl,
    Visibility,
    conj_all,
)

VISIBILITY_WORDS = {"public", "private", "protected"}
BINARY_LEVELS = [
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", ">", "<=", ">="),
    ("+", "-"),
    ("*", "/", "%"),
]
# tokens that may follow `(Name)` for it to read as a cast
CAST_FOLLOWERS = {"IDENT", "INT", "STRING", "BACKSLASH"}
CAST_FOLLOWER_WORDS = {"this", "super", "new", "true", "false", "null", "(", "!"}


class Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("OP", "KEYWORD", "IDENT") and t.text in texts

    def next(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def error(self, message: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.tok
        return ParseError([Diagnostic("error", message, tok.span)])

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or self.tok.kind
            raise self.error(f"expected '{text}', found '{found}'")
        return self.next()

    def ident(self, what: str = "identifier") -> Token:
        if self.tok.kind != "IDENT":
            raise self.error(f"expected {what}, found '{self.tok.text or self.tok.kind}'")
        return self.next()

    # -- program structure

    def program(self) -> Program:
        classes: list[ClassDecl] = []
        while self.tok.kind != "EOF":
            if self.tok.kind == "ANNOT_OPEN":
                raise self.error("annotation not adjacent to a declaration")
            classes.append(self.class_decl())
        if not classes:
            raise self.error("a program needs at least one class")
        mains = [c for c in classes if c.main is not None]
        if len(mains) > 1:
            raise ParseError(
                [Diagnostic("error", "more than one main method", mains[1].main.span)]
            )
        main = mains[0].name if mains else classes[-1].name
        ordered = [c for c in classes if c.name != main] + [c for c in classes if c.name == main]
        return Program(tuple(ordered), main)

    def class_decl(self) -> ClassDecl:
        start = self.tok
        public = False
        if self.at("public"):
            self.next()
            public = True
        self.expect("class")
        name = self.ident("class name").text
        superclass = "Object"
        if self.at("extends"):
            self.next()
            superclass = self.ident("superclass name").text
        self.expect("{")
        attrs, ctors, methods, invs = [], [], [], []
        main: Optional[MainMethod] = None
        pending: list = []  # spec clauses awaiting a method
        mods: dict = {}
        while not self.at("}"):
            t = self.tok
            if t.kind == "EOF":
                raise self.error(f"unterminated class '{name}'")
            if t.kind == "ANNOT_OPEN":
                self.annotation(pending, mods, invs)
                continue
            if t.kind == "KEYWORD" and t.text in VISIBILITY_WORDS | {"static"}:
                word = self.next()
                key = "static" if word.text == "static" else "visibility"
                if key in mods:
                    raise self.error(f"duplicate modifier '{word.text}'", word)
                mods[key] = (word.text, word)
                continue
            member = self.member(name, mods, pending)
            if isinstance(member, Attribute):
                attrs.append(member)
            elif isinstance(member, Constructor):
                ctors.append(member)
            elif isinstance(member, MainMethod):
                if main is not None:
                    raise self.error("more than one main method", t)
                main = member
            else:
                methods.append(member)
            pending, mods = [], {}
        if pending or mods:
            raise self.error("annotation not adjacent to a declaration")
        self.expect("}")
        return ClassDecl(
            name,
            superclass,
            tuple(attrs),
            tuple(ctors),
            tuple(methods),
            tuple(invs),
            public,
            main,
            span=start.span,
        )

    def annotation(self, pending: list, mods: dict, invs: list) -> None:
        self.expect_kind("ANNOT_OPEN")
        while self.tok.kind != "ANNOT_CLOSE":
            t = self.tok
            if t.kind == "EOF":
                raise self.error("unterminated annotation")
            if t.text in VISIBILITY_WORDS and self.peek().text == "invariant" or t.text == "invariant":
                if pending or "pure" in mods or "nullable" in mods:
                    raise self.error("annotation not adjacent to a declaration", t)
                vis = Visibility.DEFAULT
                if t.text in VISIBILITY_WORDS:
                    vis = Visibility.parse(self.next().text)
                self.next()
                pred = self.expr()
                self.expect(";")
                invs.append(Invariant(vis, pred, span=t.span))
            elif t.text in ("requires", "ensures"):
                self.next()
                pred = self.expr()
                self.expect(";")
                pending.append((t.text, pred))
            elif t.text == "also":
                self.next()
                pending.append(("also", t))
            elif t.text in ("pure", "nullable"):
                self.next()
                if t.text in mods:
                    raise self.error(f"duplicate modifier '{t.text}'", t)
                mods[t.text] = (t.text, t)
            elif t.kind == "IDENT" or t.kind == "KEYWORD":
                raise self.error(f"unknown annotation keyword '{t.text}'", t)
            else:
                raise self.error(f"unexpected '{t.text}' in annotation", t)
        self.next()

    def expect_kind(self, kind: str) -> Token:
        if self.tok.kind != kind:
            raise self.error(f"expected {kind}")
        return self.next()

    def member(self, cls_name: str, mods: dict, pending: list):
        start = self.tok
        vis = Visibility.parse(mods["visibility"][0]) if "visibility" in mods else Visibility.DEFAULT
        if "static" in mods:
            return self.main_method(mods, pending)
        # constructor
        if self.tok.kind == "IDENT" and self.tok.text == cls_name and self.peek().text == "(":
            self.no_modifiers(mods, ("pure", "nullable"))
            self.next()
            params = self.params()
            body = self.block()
            return Constructor(vis, params, self.spec_cases(pending), body, span=start.span)
        rtype = self.type_ref(allow_void=True)
        name_tok = self.ident("member name")
        if self.at("("):
            self.no_modifiers(mods, ("nullable",))
            params = self.params()
            body = self.block()
            return Method(
                name_tok.text,
                params,
                None if rtype.name == "void" else rtype,
                vis,
                "pure" in mods,
                self.spec_cases(pending),
                body,
                span=name_tok.span,
            )
        if pending:
            raise self.error("annotation not adjacent to a method declaration", start)
        self.no_modifiers(mods, ("pure",))
        if rtype.name == "void":
            raise self.error("attribute cannot have type void", start)
        init = None
        if self.at("="):
            self.next()
            init = self.expr()
        self.expect(";")
        return Attribute(name_tok.text, rtype, vis, "nullable" in mods, init, span=name_tok.span)

    def no_modifiers(self, mods: dict, names) -> None:
        for n in names:
            if n in mods:
                raise self.error(f"'{n}' is not allowed here", mods[n][1])

    def main_method(self, mods: dict, pending: list) -> MainMethod:
        start = self.tok
        if pending:
            raise self.error("main cannot carry a specification", start)
        self.no_modifiers(mods, ("pure", "nullable"))
        self.expect("void")
        if self.tok.text != "main":
            raise self.error("only 'main' may be static")
        self.next()
        self.expect("(")
        if self.ident("String").text != "String":
            raise self.error("main takes String[] args")
        self.expect("[")
        self.expect("]")
        param = self.ident("parameter name").text
        self.expect(")")
        return MainMethod(param, self.block(), span=start.span)

    def spec_cases(self, pending: list) -> tuple[SpecCase, ...]:
        cases: list[SpecCase] = []
        reqs: list[Expr] = []
        ens: list[Expr] = []
        seen_clause = False
        for kind, value in pending:
            if kind == "also":
                if seen_clause:
                    if not reqs and not ens:
                        raise self.error("empty specification case", value)
                    cases.append(SpecCase(conj_all(reqs), conj_all(ens)))
                    reqs, ens = [], []
                continue
            seen_clause = True
            (reqs if kind == "requires" else ens).append(value)
        if reqs or ens:
            cases.append(SpecCase(conj_all(reqs), conj_all(ens)))
        elif seen_clause:
            raise self.error("dangling 'also'")
        return tuple(cases)

    def params(self) -> tuple[Param, ...]:
        self.expect("(")
        out = []
        while not self.at(")"):
            if out:
                self.expect(",")
            t = self.type_ref()
            out.append(Param(self.ident("parameter name").text, t))
        self.expect(")")
        return tuple(out)

    def type_ref(self, allow_void: bool = False) -> TypeRef:
        t = self.tok
        if t.kind == "IDENT" or t.text in ("int", "boolean") or (allow_void and t.text == "void"):
            self.next()
            return TypeRef(t.text, span=t.span)
        raise self.error(f"expected a type, found '{t.text or t.kind}'")

    # -- statements

    def block(self) -> tuple[Stmt, ...]:
        self.expect("{")
        out = []
        while not self.at("}"):
            if self.tok.kind == "EOF":
                raise self.error("unterminated block")
            out.append(self.statement())
        self.expect("}")
        return tuple(out)

    def branch(self) -> tuple[Stmt, ...]:
        return self.block() if self.at("{") else (self.statement(),)

    def statement(self) -> Stmt:
        t = self.tok
        if t.kind == "ANNOT_OPEN":
            raise self.error("annotations are not allowed inside method bodies")
        if self.at("return"):
            self.next()
            value = None if self.at(";") else self.expr()
            self.expect(";")
            return Return(value, span=t.span)
        if self.at("if"):
            self.next()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.branch()
            orelse = None
            if self.at("else"):
                self.next()
                orelse = self.branch()
            return If(cond, then, orelse, span=t.span)
        if t.text in ("int", "boolean") or (t.kind == "IDENT" and self.peek().kind == "IDENT"):
            typ = self.type_ref()
            name = self.ident("variable name").text
            init = None
            if self.at("="):
                self.next()
                init = self.expr()
            self.expect(";")
            return VarDecl(typ, name, init, span=t.span)
        e = self.expr()
        if self.at("="):
            if not isinstance(e, (Name, FieldAccess)):
                raise self.error("invalid assignment target", t)
            self.next()
            value = self.expr()
            self.expect(";")
            return Assign(e, value, span=t.span)
        self.expect(";")
        return ExprStmt(e, span=t.span)

    # -- expressions

    def expr(self) -> Expr:
        left = self.binary(0)
        if self.at("==>"):
            op = self.next()
            right = self.expr()  # right associative
            return Binary("==>", left, right, span=op.span)
        return left

    def binary(self, level: int) -> Expr:
        if level == len(BINARY_LEVELS):
            return self.unary()
        left = self.binary(level + 1)
        ops = BINARY_LEVELS[level]
        while True:
            if self.tok.kind == "OP" and self.tok.text in ops:
                op = self.next()
                left = Binary(op.text, left, self.binary(level + 1), span=op.span)
            elif level == 3 and self.at("instanceof"):
                op = self.next()
                left = InstanceOf(left, self.ident("class name").text, span=op.span)
            else:
                return left

    def unary(self) -> Expr:
        t = self.tok
        if self.at("!"):
            self.next()
            return Unary("!", self.unary(), span=t.span)
        if self.at("-"):
            self.next()
            operand = self.unary()
            if isinstance(operand, IntLit) and operand.value >= 0:
                return IntLit(-operand.value, span=t.span)
            return Unary("-", operand, span=t.span)
        if self.at("(") and self.peek().kind == "IDENT" and self.peek(2).text == ")":
            follower = self.peek(3)
            if follower.kind in CAST_FOLLOWERS or (
                follower.kind in ("KEYWORD", "OP") and follower.text in CAST_FOLLOWER_WORDS
            ):
                self.next()
                cls = self.next().text
                self.next()
                return Cast(cls, self.unary(), span=t.span)
        return self.postfix()

    def postfix(self) -> Expr:
        e = self.primary()
        while self.at("."):
            self.next()
            name = self.ident("member name")
            if self.at("("):
                e = Call(e, name.text, self.args(), span=name.span)
            else:
                e = FieldAccess(e, name.text, span=name.span)
        return e

    def args(self) -> tuple[Expr, ...]:
        self.expect("(")
        out = []
        while not self.at(")"):
            if out:
                self.expect(",")
            out.append(self.expr())
        self.expect(")")
        return tuple(out)

    def primary(self) -> Expr:
        t = self.tok
        if t.kind == "INT":
            self.next()
            return IntLit(int(t.text), span=t.span)
        if t.kind == "STRING":
            self.next()
            return StringLit(bytes(t.text[1:-1], "utf-8").decode("unicode_escape"), span=t.span)
        if t.kind == "BACKSLASH":
            self.next()
            if t.text == "\\result":
                return Result(span=t.span)
            self.expect("(")
            inner = self.expr()
            self.expect(")")
            return Old(inner, span=t.span)
        if t.kind == "KEYWORD":
            if t.text in ("true", "false"):
                self.next()
                return BoolLit(t.text == "true", span=t.span)
            if t.text == "null":
                self.next()
                return NullLit(span=t.span)
            if t.text == "this":
                self.next()
                return This(span=t.span)
            if t.text == "super":
                self.next()
                if not self.at("."):
                    raise self.error("'super' must be followed by a member access")
                return Super(span=t.span)
            if t.text == "new":
                self.next()
                cls = self.ident("class name").text
                return New(cls, self.args(), span=t.span)
        if t.kind == "IDENT":
            self.next()
            if self.at("("):
                return Call(None, t.text, self.args(), span=t.span)
            return Name(t.text, span=t.span)
        if self.at("("):
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "IDENT" and t.text in ANNOTATION_KEYWORDS:
            raise self.error(f"unexpected annotation keyword '{t.text}'")
        raise self.error(f"unexpected '{t.text or t.kind}' in expression")


def parse_unchecked(text: str) -> Program:
    """Syntax only; no well-formedness validation."""
    return Parser(text).program()


def parse(text: str, origin: str = "<memory>") -> Program:
    """Parse and validate. Raises ParseError or WellFormednessError."""
    from .check import WellFormednessError, validate

    program = parse_unchecked(text)
    errors = validate(program)
    if errors:
        raise WellFormednessError(errors)
    return program


def parse_file(path) -> Program:
    path = Path(path)
    return parse(path.read_text(encoding="utf-8"), str(path))


def parse_expr(text: str) -> Expr:
    p = Parser(text)
    e = p.expr()
    if p.tok.kind != "EOF":
        raise p.error(f"trailing input '{p.tok.text}'")
    return e


__all__ = ["parse", "parse_unchecked", "parse_file", "parse_expr", "ParseError", "TRUE", "FALSE"]
