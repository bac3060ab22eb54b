"""Well-formedness validation and static resolution of member accesses.

`Analyzer` type-checks a whole program once. Besides diagnostics it records
every resolved field/method access, every implicit subtype coercion and
every syntactic use of a class name; the law provisos are phrased as
queries over those records.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from .hierarchy import (
    BUILTINS,
    BuiltinMethod,
    ResolutionError,
    is_class,
    lookup_field,
    lookup_method,
    method_param_types,
    method_return_type,
    subtype_of,
    supers,
)
from .lexer import Diagnostic, FrontendError
from .nodes import (
    PRIMITIVES,
    Assign,
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
    MetaVar,
    Name,
    New,
    NullLit,
    Old,
    Program,
    Result,
    Return,
    Span,
    StringLit,
    Super,
    This,
    TypeRef,
    Unary,
    VarDecl,
    Visibility,
)


class WellFormednessError(FrontendError):
    """The program parsed but violates a static rule."""


@dataclass(frozen=True)
class Location:
    cls: str
    member: str
    part: str  # body | pre | post | inv | init | main

    @property
    def in_spec(self) -> bool:
        return self.part in ("pre", "post", "inv")

    def __str__(self) -> str:
        return f"{self.cls}.{self.member} ({self.part})"


@dataclass(frozen=True)
class Access:
    kind: str  # "field" | "method"
    name: str
    owner: str  # declaring class
    receiver: str  # static type of the receiver
    via: str  # implicit | this | cast-this | super | expr
    node: Expr
    where: Location
    visibility: Visibility = Visibility.PUBLIC

    def __str__(self) -> str:
        from .printer import expr_str

        return f"{self.where}: {expr_str(self.node)}"


@dataclass(frozen=True)
class Coercion:
    actual: str
    expected: str
    where: Location


@dataclass(frozen=True)
class TypeUse:
    name: str
    where: Location


@dataclass
class Ctx:
    cls: Optional[str]
    where: Location
    anchor: Optional[Span] = None
    locals: dict = field(default_factory=dict)
    spec_vis: Optional[Visibility] = None
    result: Optional[str] = None  # return type visible as \result
    pure: bool = False
    static: bool = False
    returns: Optional[str] = None  # declared return type for `return` statements


def _via(target: Optional[Expr]) -> str:
    if target is None:
        return "implicit"
    if isinstance(target, This):
        return "this"
    if isinstance(target, Super):
        return "super"
    if isinstance(target, Cast) and isinstance(target.expr, This):
        return "cast-this"
    return "expr"


class Analyzer:
    def __init__(self, program: Program):
        self.program = program
        self.errors: list[Diagnostic] = []
        self.accesses: list[Access] = []
        self.coercions: list[Coercion] = []
        self.type_uses: list[TypeUse] = []
        self.sound_classes: set[str] = set()

    # -- reporting

    def err(self, message: str, node=None, ctx: Optional[Ctx] = None) -> None:
        span = getattr(node, "span", None) or (ctx.anchor if ctx else None) or Span(1, 1, 1)
        self.errors.append(Diagnostic("error", message, span))

    # -- driver

    def run(self) -> "Analyzer":
        p = self.program
        seen: set[str] = set()
        for cls in p:
            if cls.name in seen:
                self.err(f"duplicate class '{cls.name}'", cls)
            seen.add(cls.name)
            if cls.name in BUILTINS:
                self.err(f"class '{cls.name}' redefines a built-in class", cls)
        if p.main not in p:
            self.err(f"Main class '{p.main}' is not declared")
        for cls in p:
            if cls.superclass != "Object" and cls.superclass not in p:
                self.err(f"unknown superclass '{cls.superclass}' of '{cls.name}'", cls)
                continue
            try:
                supers(p, cls.name)
            except ResolutionError as exc:
                self.err(str(exc), cls)
                continue
            self.sound_classes.add(cls.name)
        for cls in p:
            if cls.name in self.sound_classes:
                self.check_class(cls)
        return self

    # -- declarations

    def known_type(self, t: TypeRef, ctx: Ctx) -> Optional[str]:
        if t.name in PRIMITIVES:
            return t.name
        self.type_uses.append(TypeUse(t.name, ctx.where))
        if not is_class(self.program, t.name):
            self.err(f"unknown type '{t.name}'", t, ctx)
            return None
        return t.name

    def check_class(self, cls: ClassDecl) -> None:
        p = self.program
        name = cls.name
        if cls.superclass != "Object":
            self.type_uses.append(TypeUse(cls.superclass, Location(name, "extends", "decl")))
        if cls.main is not None and name != p.main:
            self.err(f"main method declared outside the Main class '{p.main}'", cls.main)

        def unique(items, what):
            names = set()
            for item in items:
                if item.name in names:
                    self.err(f"duplicate {what} '{item.name}' in '{name}'", item)
                names.add(item.name)

        unique(cls.attributes, "attribute")
        unique(cls.methods, "method")
        arities = set()
        for c in cls.constructors:
            if len(c.params) in arities:
                self.err(f"duplicate constructor arity in '{name}'", c)
            arities.add(len(c.params))

        for i, inv in enumerate(cls.invariants):
            ctx = Ctx(name, Location(name, f"invariant#{i}", "inv"), inv.span, spec_vis=inv.visibility)
            self.expect_bool(inv.pred, ctx)

        for a in cls.attributes:
            ctx = Ctx(name, Location(name, a.name, "init"), a.span)
            t = self.known_type(a.type, ctx)
            if a.nullable and a.type.primitive:
                self.err(f"primitive attribute '{a.name}' cannot be nullable", a, ctx)
            if a.init is not None:
                self.coerce(self.expr(a.init, ctx), t, a.init, ctx)

        for i, c in enumerate(cls.constructors):
            label = f"{name}#{i}"
            locals_ = self.params(c.params, Ctx(name, Location(name, label, "body"), c.span))
            for case in c.spec_cases:
                self.spec_case(case, name, label, locals_, c.visibility, None, c.span)
            ctx = Ctx(name, Location(name, label, "body"), c.span, dict(locals_), returns="void")
            self.stmts(c.body, ctx)

        for m in cls.methods:
            rtype = None
            base = Ctx(name, Location(name, m.name, "body"), m.span)
            if m.return_type is not None:
                rtype = self.known_type(m.return_type, base)
            locals_ = self.params(m.params, base)
            for case in m.spec_cases:
                self.spec_case(case, name, m.name, locals_, m.visibility, rtype or (
                    None if m.return_type is None else "?"), m.span)
            ctx = Ctx(
                name,
                Location(name, m.name, "body"),
                m.span,
                dict(locals_),
                pure=m.pure,
                returns=rtype if m.return_type is not None else "void",
            )
            self.stmts(m.body, ctx)
            self.check_override(cls, m)

        if cls.main is not None:
            ctx = Ctx(name, Location(name, "main", "main"), cls.main.span, {cls.main.param: "String[]"},
                      static=True, returns="void")
            self.stmts(cls.main.body, ctx)

    def params(self, params, ctx: Ctx) -> dict:
        out = {}
        for prm in params:
            if prm.name in out:
                self.err(f"duplicate parameter '{prm.name}'", prm.type, ctx)
            out[prm.name] = self.known_type(prm.type, ctx)
        return out

    def spec_case(self, case, cls, member, locals_, vis, rtype, anchor) -> None:
        pre = Ctx(cls, Location(cls, member, "pre"), anchor, dict(locals_), spec_vis=vis)
        self.expect_bool(case.pre, pre)
        post = Ctx(cls, Location(cls, member, "post"), anchor, dict(locals_), spec_vis=vis,
                   result=rtype if rtype is not None else "void")
        self.expect_bool(case.post, post)

    def check_override(self, cls: ClassDecl, m) -> None:
        found = lookup_method(self.program, cls.superclass, m.name)
        if found is None:
            return
        owner, parent = found
        if isinstance(parent, BuiltinMethod):
            return
        if parent.visibility is Visibility.PRIVATE:
            return
        if parent.signature != m.signature:
            self.err(
                f"method '{cls.name}.{m.name}' redefines '{owner}.{m.name}' with a different signature",
                m,
            )
        if m.visibility < parent.visibility:
            self.err(f"method '{cls.name}.{m.name}' narrows the visibility of '{owner}.{m.name}'", m)
        if parent.pure and not m.pure:
            self.err(f"method '{cls.name}.{m.name}' must stay pure like '{owner}.{m.name}'", m)

    # -- statements

    def stmts(self, body, ctx: Ctx) -> None:
        for s in body:
            self.stmt(s, ctx)

    def stmt(self, s, ctx: Ctx) -> None:
        if isinstance(s, VarDecl):
            t = self.known_type(s.type, ctx)
            if s.name in ctx.locals:
                self.err(f"variable '{s.name}' is already defined", s, ctx)
            if s.init is not None:
                self.coerce(self.expr(s.init, ctx), t, s.init, ctx)
            ctx.locals[s.name] = t
        elif isinstance(s, Assign):
            target = s.target
            if ctx.pure and (
                isinstance(target, FieldAccess)
                or (isinstance(target, Name) and target.name not in ctx.locals)
            ):
                self.err("pure method assigns to a field", s, ctx)
            t = self.expr(target, ctx)
            self.coerce(self.expr(s.value, ctx), t, s.value, ctx)
        elif isinstance(s, ExprStmt):
            if not isinstance(s.expr, (Call, New)):
                self.err("expression statement must be a call or an instantiation", s, ctx)
            self.expr(s.expr, ctx)
        elif isinstance(s, Return):
            if s.value is None:
                if ctx.returns not in ("void", None):
                    self.err("missing return value", s, ctx)
            else:
                t = self.expr(s.value, ctx)
                if ctx.returns == "void":
                    self.err("void member returns a value", s, ctx)
                else:
                    self.coerce(t, ctx.returns, s.value, ctx)
        elif isinstance(s, If):
            self.expect_bool(s.cond, ctx)
            self.stmts(s.then, replace(ctx, locals=dict(ctx.locals)))
            if s.orelse is not None:
                self.stmts(s.orelse, replace(ctx, locals=dict(ctx.locals)))
        else:  # pragma: no cover
            self.err(f"unknown statement {type(s).__name__}", s, ctx)

    # -- expressions

    def assignable(self, actual: Optional[str], expected: Optional[str]) -> bool:
        if actual is None or expected is None or actual == expected:
            return True
        if actual in PRIMITIVES or expected in PRIMITIVES or expected == "void":
            return False
        if actual == "null":
            return True
        try:
            return subtype_of(self.program, actual, expected)
        except ResolutionError:
            return True

    def coerce(self, actual, expected, node, ctx: Ctx) -> None:
        if not self.assignable(actual, expected):
            self.err(f"type '{actual}' is not compatible with '{expected}'", node, ctx)
        elif actual and expected and actual != expected and actual not in PRIMITIVES | {"null"}:
            self.coercions.append(Coercion(actual, expected, ctx.where))

    def expect_bool(self, e: Expr, ctx: Ctx) -> None:
        t = self.expr(e, ctx)
        if t is not None and t != "boolean":
            self.err(f"expected a boolean expression, found '{t}'", e, ctx)

    def member_visible(self, owner: str, vis: Visibility, name: str, node, ctx: Ctx) -> None:
        if vis is Visibility.PRIVATE and owner != ctx.cls:
            self.err(f"'{name}' is private in '{owner}'", node, ctx)
        if ctx.spec_vis is not None and vis < ctx.spec_vis:
            self.err(
                f"{vis.name.lower()} member '{name}' used in a "
                f"{ctx.spec_vis.name.lower()} specification",
                node,
                ctx,
            )

    def receiver(self, target: Optional[Expr], node, ctx: Ctx) -> Optional[str]:
        if target is None:
            if ctx.static:
                self.err(f"no receiver for '{node.name}' in static context", node, ctx)
                return None
            return ctx.cls
        if isinstance(target, Super):
            if ctx.static:
                self.err("'super' in static context", target, ctx)
                return None
            return self.program[ctx.cls].superclass
        t = self.expr(target, ctx)
        if t is None:
            return None
        if t in PRIMITIVES or t in ("null", "void", "String[]"):
            self.err(f"cannot access '{node.name}' on a value of type '{t}'", node, ctx)
            return None
        return t

    def field(self, target, name: str, node, ctx: Ctx) -> Optional[str]:
        recv = self.receiver(target, node, ctx)
        if recv is None:
            return None
        found = lookup_field(self.program, recv, name) if recv not in BUILTINS else None
        if found is None:
            self.err(f"cannot resolve field '{name}' in '{recv}'", node, ctx)
            return None
        owner, attr = found
        self.member_visible(owner, attr.visibility, name, node, ctx)
        self.accesses.append(
            Access("field", name, owner, recv, _via(target), node, ctx.where, attr.visibility)
        )
        return attr.type.name

    def expr(self, e: Expr, ctx: Ctx) -> Optional[str]:
        if isinstance(e, BoolLit):
            return "boolean"
        if isinstance(e, IntLit):
            return "int"
        if isinstance(e, StringLit):
            return "String"
        if isinstance(e, NullLit):
            return "null"
        if isinstance(e, This):
            if ctx.static:
                self.err("'this' in static context", e, ctx)
                return None
            return ctx.cls
        if isinstance(e, Super):
            self.err("'super' must be used as a member receiver", e, ctx)
            return None
        if isinstance(e, MetaVar):
            self.err(f"meta-variable '{e.name}' in a program", e, ctx)
            return None
        if isinstance(e, Result):
            if ctx.result is None:
                self.err("'\\result' outside a postcondition", e, ctx)
                return None
            if ctx.result == "void":
                self.err("'\\result' in the postcondition of a void member", e, ctx)
                return None
            return None if ctx.result == "?" else ctx.result
        if isinstance(e, Old):
            if ctx.result is None:
                self.err("'\\old' outside a postcondition", e, ctx)
            return self.expr(e.expr, ctx)
        if isinstance(e, Name):
            if e.name in ctx.locals:
                return ctx.locals[e.name]
            if ctx.static:
                self.err(f"cannot resolve '{e.name}'", e, ctx)
                return None
            return self.field(None, e.name, e, ctx)
        if isinstance(e, FieldAccess):
            return self.field(e.target, e.name, e, ctx)
        if isinstance(e, Call):
            return self.call(e, ctx)
        if isinstance(e, New):
            return self.new(e, ctx)
        if isinstance(e, Unary):
            t = self.expr(e.operand, ctx)
            want = "boolean" if e.op == "!" else "int"
            if t is not None and t != want:
                self.err(f"operator '{e.op}' expects {want}", e, ctx)
            return want
        if isinstance(e, Binary):
            lt, rt = self.expr(e.left, ctx), self.expr(e.right, ctx)
            if e.op in ("&&", "||", "==>"):
                for t, side in ((lt, e.left), (rt, e.right)):
                    if t is not None and t != "boolean":
                        self.err(f"operator '{e.op}' expects boolean operands", side, ctx)
                return "boolean"
            if e.op in ("==", "!="):
                if not (self.assignable(lt, rt) or self.assignable(rt, lt)):
                    self.err(f"incomparable types '{lt}' and '{rt}'", e, ctx)
                return "boolean"
            for t, side in ((lt, e.left), (rt, e.right)):
                if t is not None and t != "int":
                    self.err(f"operator '{e.op}' expects int operands", side, ctx)
            return "boolean" if e.op in ("<", ">", "<=", ">=") else "int"
        if isinstance(e, InstanceOf):
            t = self.expr(e.expr, ctx)
            self.class_ref(e.cls, e, ctx)
            if t in PRIMITIVES:
                self.err("instanceof on a primitive value", e, ctx)
            return "boolean"
        if isinstance(e, Cast):
            t = self.expr(e.expr, ctx)
            self.class_ref(e.cls, e, ctx)
            if t in PRIMITIVES:
                self.err("cast of a primitive value", e, ctx)
            return e.cls
        self.err(f"unsupported expression {type(e).__name__}", e, ctx)  # pragma: no cover
        return None

    def class_ref(self, name: str, node, ctx: Ctx) -> bool:
        self.type_uses.append(TypeUse(name, ctx.where))
        if not is_class(self.program, name):
            self.err(f"unknown class '{name}'", node, ctx)
            return False
        return True

    def call(self, e: Call, ctx: Ctx) -> Optional[str]:
        recv = self.receiver(e.target, e, ctx)
        arg_types = [self.expr(a, ctx) for a in e.args]
        if recv is None:
            return None
        found = lookup_method(self.program, recv, e.name)
        if found is None:
            self.err(f"cannot resolve method '{e.name}' in '{recv}'", e, ctx)
            return None
        owner, m = found
        self.member_visible(owner, m.visibility, e.name, e, ctx)
        if ctx.spec_vis is not None and not m.pure:
            self.err(f"non-pure method '{e.name}' used in a specification", e, ctx)
        params = method_param_types(m)
        if len(params) != len(arg_types):
            self.err(f"'{e.name}' expects {len(params)} argument(s)", e, ctx)
        else:
            for a, t, arg in zip(arg_types, params, e.args):
                self.coerce(a, t, arg, ctx)
        self.accesses.append(
            Access("method", e.name, owner, recv, _via(e.target), e, ctx.where, m.visibility)
        )
        rt = method_return_type(m)
        return rt

    def new(self, e: New, ctx: Ctx) -> Optional[str]:
        arg_types = [self.expr(a, ctx) for a in e.args]
        if not self.class_ref(e.cls, e, ctx):
            return None
        if e.cls in BUILTINS:
            sigs = BUILTINS[e.cls].constructors
        else:
            decl = self.program[e.cls]
            sigs = [tuple(p.type.name for p in c.params) for c in decl.constructors] or [()]
            for c in decl.constructors:
                if len(c.params) == len(arg_types) and c.visibility is Visibility.PRIVATE \
                        and ctx.cls != e.cls:
                    self.err(f"constructor of '{e.cls}' is private", e, ctx)
        for sig in sigs:
            if len(sig) == len(arg_types) and all(
                self.assignable(a, t) for a, t in zip(arg_types, sig)
            ):
                return e.cls
        self.err(f"no constructor of '{e.cls}' matches {len(arg_types)} argument(s)", e, ctx)
        return e.cls


def analyze(program: Program) -> Analyzer:
    return Analyzer(program).run()


def validate(program: Program) -> list[Diagnostic]:
    """All well-formedness diagnostics; empty when the program is well formed."""
    return analyze(program).errors


def is_well_formed(program: Program) -> bool:
    return not validate(program)
