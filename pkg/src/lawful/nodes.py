"""Abstract syntax for the mini-language and its contract sublanguage.

All nodes are frozen dataclasses. Structural equality ignores source spans,
so a reparsed program compares equal to the original.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional, Union


@dataclass(frozen=True)
class Span:
    line: int
    column: int
    length: int = 1


def _span() -> Optional[Span]:
    return field(default=None, compare=False, repr=False, kw_only=True)


class Visibility(enum.IntEnum):
    PRIVATE = 0
    DEFAULT = 1
    PROTECTED = 2
    PUBLIC = 3

    @property
    def keyword(self) -> str:
        return "" if self is Visibility.DEFAULT else self.name.lower()

    @classmethod
    def parse(cls, text: str) -> "Visibility":
        text = text.strip().lower()
        if text in ("", "default", "package"):
            return cls.DEFAULT
        return cls[text.upper()]


PRIMITIVES = frozenset({"int", "boolean"})


@dataclass(frozen=True)
class TypeRef:
    name: str
    span: Optional[Span] = _span()

    @property
    def primitive(self) -> bool:
        return self.name in PRIMITIVES

    def __str__(self) -> str:
        return self.name


# ---------------------------------------------------------------- expressions


@dataclass(frozen=True)
class Expr:
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool


@dataclass(frozen=True)
class IntLit(Expr):
    value: int


@dataclass(frozen=True)
class StringLit(Expr):
    value: str


@dataclass(frozen=True)
class NullLit(Expr):
    pass


@dataclass(frozen=True)
class This(Expr):
    pass


@dataclass(frozen=True)
class Super(Expr):
    pass


@dataclass(frozen=True)
class Result(Expr):
    pass


@dataclass(frozen=True)
class Name(Expr):
    """A bare identifier: a local, a parameter, or a field of `this`."""

    name: str


@dataclass(frozen=True)
class FieldAccess(Expr):
    target: Expr
    name: str


@dataclass(frozen=True)
class Call(Expr):
    target: Optional[Expr]  # None means an implicit `this` receiver
    name: str
    args: tuple[Expr, ...] = ()


@dataclass(frozen=True)
class New(Expr):
    cls: str
    args: tuple[Expr, ...] = ()


@dataclass(frozen=True)
class Unary(Expr):
    op: str  # "!" or "-"
    operand: Expr


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class InstanceOf(Expr):
    expr: Expr
    cls: str


@dataclass(frozen=True)
class Cast(Expr):
    cls: str
    expr: Expr


@dataclass(frozen=True)
class Old(Expr):
    expr: Expr


@dataclass(frozen=True)
class MetaVar(Expr):
    """Placeholder used only inside law schemas."""

    name: str


Predicate = Expr

TRUE = BoolLit(True)
FALSE = BoolLit(False)

LOGICAL_OPS = ("&&", "||", "==>")
COMPARISON_OPS = ("==", "!=", "<", ">", "<=", ">=")
ARITHMETIC_OPS = ("+", "-", "*", "/", "%")


def neg(e: Expr) -> Expr:
    return Unary("!", e)


def conj(a: Expr, b: Expr) -> Expr:
    return Binary("&&", a, b)


def disj(a: Expr, b: Expr) -> Expr:
    return Binary("||", a, b)


def implies(a: Expr, b: Expr) -> Expr:
    return Binary("==>", a, b)


def conj_all(preds: list[Expr]) -> Expr:
    """Left-nested conjunction; `true` for an empty list."""
    if not preds:
        return TRUE
    out = preds[0]
    for p in preds[1:]:
        out = conj(out, p)
    return out


# ----------------------------------------------------------------- statements


@dataclass(frozen=True)
class Stmt:
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class VarDecl(Stmt):
    type: TypeRef
    name: str
    init: Optional[Expr] = None


@dataclass(frozen=True)
class Assign(Stmt):
    target: Expr
    value: Expr


@dataclass(frozen=True)
class ExprStmt(Stmt):
    expr: Expr


@dataclass(frozen=True)
class Return(Stmt):
    value: Optional[Expr] = None


@dataclass(frozen=True)
class If(Stmt):
    cond: Expr
    then: tuple[Stmt, ...]
    orelse: Optional[tuple[Stmt, ...]] = None


Body = tuple[Stmt, ...]

# -------------------------------------------------------------- declarations


@dataclass(frozen=True)
class Param:
    name: str
    type: TypeRef


@dataclass(frozen=True)
class SpecCase:
    pre: Expr = TRUE
    post: Expr = TRUE


@dataclass(frozen=True)
class Invariant:
    visibility: Visibility
    pred: Expr
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Attribute:
    name: str
    type: TypeRef
    visibility: Visibility = Visibility.DEFAULT
    nullable: bool = False
    init: Optional[Expr] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Constructor:
    visibility: Visibility
    params: tuple[Param, ...] = ()
    spec_cases: tuple[SpecCase, ...] = ()
    body: Body = ()
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Method:
    name: str
    params: tuple[Param, ...] = ()
    return_type: Optional[TypeRef] = None  # None is void
    visibility: Visibility = Visibility.DEFAULT
    pure: bool = False
    spec_cases: tuple[SpecCase, ...] = ()
    body: Body = ()
    span: Optional[Span] = _span()

    @property
    def signature(self) -> tuple:
        return tuple(p.type.name for p in self.params), (
            self.return_type.name if self.return_type else "void"
        )


@dataclass(frozen=True)
class MainMethod:
    """The `public static void main(String[] args)` entry point."""

    param: str = "args"
    body: Body = ()
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class ClassDecl:
    name: str
    superclass: str = "Object"
    attributes: tuple[Attribute, ...] = ()
    constructors: tuple[Constructor, ...] = ()
    methods: tuple[Method, ...] = ()
    invariants: tuple[Invariant, ...] = ()
    public: bool = False
    main: Optional[MainMethod] = None
    span: Optional[Span] = _span()

    def attribute(self, name: str) -> Optional[Attribute]:
        return next((a for a in self.attributes if a.name == name), None)

    def method(self, name: str) -> Optional[Method]:
        return next((m for m in self.methods if m.name == name), None)

    def with_attribute(self, attr: Attribute, index: Optional[int] = None) -> "ClassDecl":
        attrs = list(self.attributes)
        attrs.insert(len(attrs) if index is None else index, attr)
        return replace(self, attributes=tuple(attrs))

    def without_attribute(self, name: str) -> "ClassDecl":
        return replace(self, attributes=tuple(a for a in self.attributes if a.name != name))

    def replace_attribute(self, name: str, new: Attribute) -> "ClassDecl":
        return replace(
            self, attributes=tuple(new if a.name == name else a for a in self.attributes)
        )

    def without_method(self, name: str) -> "ClassDecl":
        return replace(self, methods=tuple(m for m in self.methods if m.name != name))

    def replace_method(self, name: str, new: Method) -> "ClassDecl":
        return replace(self, methods=tuple(new if m.name == name else m for m in self.methods))


@dataclass(frozen=True)
class Program:
    """A set of class declarations plus the designated Main class."""

    classes: tuple[ClassDecl, ...]
    main: str

    def __iter__(self) -> Iterator[ClassDecl]:
        return iter(self.classes)

    def __contains__(self, name: object) -> bool:
        return any(c.name == name for c in self.classes)

    def get(self, name: str) -> Optional[ClassDecl]:
        return next((c for c in self.classes if c.name == name), None)

    def __getitem__(self, name: str) -> ClassDecl:
        cls = self.get(name)
        if cls is None:
            raise KeyError(name)
        return cls

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.classes]

    def replace_class(self, new: ClassDecl) -> "Program":
        return replace(
            self, classes=tuple(new if c.name == new.name else c for c in self.classes)
        )

    def add_class(self, new: ClassDecl) -> "Program":
        # Main stays last so the printed order matches the parsed order.
        others = [c for c in self.classes if c.name != self.main]
        mains = [c for c in self.classes if c.name == self.main]
        return replace(self, classes=tuple(others + [new] + mains))

    def remove_class(self, name: str) -> "Program":
        return replace(self, classes=tuple(c for c in self.classes if c.name != name))


Node = Union[Expr, Stmt]
