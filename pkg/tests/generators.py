"""Seeded random programs and spec tables for the property tests."""

from __future__ import annotations

import random

from lawful.nodes import (
    Assign,
    Attribute,
    Binary,
    BoolLit,
    Call,
    Cast,
    ClassDecl,
    Constructor,
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
    StringLit,
    This,
    TypeRef,
    Unary,
    VarDecl,
    Visibility,
)

BOOL_OPS = ("&&", "||", "==>")
REL_OPS = ("==", "!=", "<", ">", "<=", ">=")
ARITH_OPS = ("+", "-", "*", "/", "%")


class ProgramGen:
    """Syntactically valid programs; not necessarily well-typed."""

    def __init__(self, seed: int):
        self.r = random.Random(seed)

    def ident(self, prefix: str) -> str:
        return f"{prefix}{self.r.randrange(6)}"

    def int_expr(self, depth: int):
        r = self.r
        if depth <= 0 or r.random() < 0.35:
            return r.choice([
                IntLit(r.randrange(100)),
                Name(self.ident("x")),
                FieldAccess(This(), self.ident("f")),
                Call(None, self.ident("g")),
            ])
        k = r.randrange(3)
        if k == 0:
            return Binary(r.choice(ARITH_OPS), self.int_expr(depth - 1), self.int_expr(depth - 1))
        if k == 1:
            inner = self.int_expr(depth - 1)
            # the parser folds a minus applied to a literal
            return IntLit(-inner.value) if isinstance(inner, IntLit) else Unary("-", inner)
        return Call(FieldAccess(This(), self.ident("f")), "intValue")

    def pred(self, depth: int, post: bool = False):
        r = self.r
        if depth <= 0 or r.random() < 0.25:
            k = r.randrange(7 if post else 5)
            if k == 0:
                return BoolLit(r.random() < 0.5)
            if k == 1:
                return Call(None, self.ident("p"))
            if k == 2:
                return InstanceOf(This(), self.ident("K"))
            if k == 3:
                return Binary(r.choice(REL_OPS), self.int_expr(1), self.int_expr(1))
            if k == 4:
                return Call(Cast(self.ident("K"), This()), self.ident("q"))
            if k == 5:
                return Binary("!=", Result(), NullLit())
            return Old(Call(None, self.ident("p")))
        k = r.randrange(4)
        if k == 0:
            return Unary("!", self.pred(depth - 1, post))
        if k == 1 and post:
            return Old(self.pred(depth - 1, False))
        return Binary(r.choice(BOOL_OPS), self.pred(depth - 1, post), self.pred(depth - 1, post))

    def stmt(self, depth: int):
        r = self.r
        k = r.randrange(5 if depth > 0 else 4)
        if k == 0:
            return Assign(FieldAccess(This(), self.ident("f")), self.int_expr(2))
        if k == 1:
            return VarDecl(TypeRef("int"), self.ident("v"), self.int_expr(1))
        if k == 2:
            return ExprStmt(Call(None, self.ident("g"), (self.int_expr(1),)))
        if k == 3:
            return Return(self.int_expr(2))
        orelse = tuple(self.stmt(depth - 1) for _ in range(r.randrange(2))) if r.random() < 0.6 else None
        return If(self.pred(2), tuple(self.stmt(depth - 1) for _ in range(1 + r.randrange(2))), orelse)

    def vis(self):
        return self.r.choice(list(Visibility))

    def cls(self, name: str, sup: str, methods_above: set[str]) -> ClassDecl:
        r = self.r
        attrs, seen = [], set()
        for _ in range(r.randrange(3)):
            a = self.ident("f")
            if a in seen:
                continue
            seen.add(a)
            if r.random() < 0.5:
                attrs.append(Attribute(a, TypeRef("int"), self.vis(), False,
                                       IntLit(r.randrange(9)) if r.random() < 0.3 else None))
            else:
                attrs.append(Attribute(a, TypeRef("Integer"), self.vis(), r.random() < 0.5))
        invs = tuple(Invariant(self.vis(), self.pred(2)) for _ in range(r.randrange(3)))
        ctors = ()
        if r.random() < 0.5:
            ctors = (Constructor(Visibility.PUBLIC, (Param("x0", TypeRef("int")),),
                                 (), (Assign(FieldAccess(This(), "f0"), Name("x0")),)),)
        methods, names = [], set()
        for _ in range(r.randrange(4)):
            m = r.choice(sorted(methods_above)) if methods_above and r.random() < 0.4 else self.ident("m")
            if m in names:
                continue
            names.add(m)
            cases = tuple(SpecCase(self.pred(2), self.pred(2, post=True)) for _ in range(r.randrange(3)))
            rt = r.choice([None, TypeRef("int"), TypeRef("boolean"), TypeRef("Integer")])
            body = tuple(self.stmt(2) for _ in range(r.randrange(3)))
            params = tuple(Param(f"x{i}", TypeRef(r.choice(["int", "Integer"]))) for i in range(r.randrange(3)))
            methods.append(Method(m, params, rt, self.vis(), r.random() < 0.3, cases, body))
        return ClassDecl(name, sup, tuple(attrs), ctors, tuple(methods), invs, r.random() < 0.2)

    def program(self) -> Program:
        r = self.r
        classes, declared = [], {}
        for i in range(1 + r.randrange(4)):
            name = f"K{i}"
            sup = r.choice(["Object"] + [c.name for c in classes])
            above = set(declared.get(sup, ()))
            decl = self.cls(name, sup, above)
            declared[name] = above | {m.name for m in decl.methods}
            classes.append(decl)
        body = (
            VarDecl(TypeRef("K0"), "k", New("K0")),
            ExprStmt(Call(Name("k"), self.ident("m"), (StringLit("s"), NullLit()))),
        )
        classes.append(ClassDecl("Main", public=True, main=MainMethod(body=body)))
        return Program(tuple(classes), "Main")


def spec_program(seed: int, max_classes: int = 4, max_cases: int = 3, max_atoms: int = 4) -> Program:
    """A random chain/tree of classes whose only contents are contracts.

    Every class declares the pure atoms p0..p{k-1} through a root class and
    may add an invariant and spec cases for a shared method `m`.
    """
    r = random.Random(seed)
    atoms = [f"p{i}" for i in range(1 + r.randrange(max_atoms))]
    n = 1 + r.randrange(max_classes)

    def pred(depth: int):
        if depth <= 0 or r.random() < 0.3:
            k = r.randrange(3 + n)
            if k == 0:
                return BoolLit(r.random() < 0.5)
            if k < 3:
                return Call(None, r.choice(atoms))
            return InstanceOf(This(), f"T{k - 3}")
        k = r.randrange(4)
        if k == 0:
            return Unary("!", pred(depth - 1))
        return Binary(r.choice(BOOL_OPS), pred(depth - 1), pred(depth - 1))

    root_methods = tuple(
        Method(a, (), TypeRef("boolean"), Visibility.PUBLIC, True, (), (Return(BoolLit(True)),)) for a in atoms
    )
    classes = []
    for i in range(n):
        sup = "Object" if i == 0 else f"T{r.randrange(i)}"
        invs = tuple(Invariant(r.choice([Visibility.PUBLIC, Visibility.PRIVATE]), pred(2))
                     for _ in range(r.randrange(2)))
        methods = root_methods if i == 0 else ()
        if i == 0 or r.random() < 0.7:
            cases = tuple(SpecCase(pred(2), pred(2)) for _ in range(1 + r.randrange(max_cases)))
            methods = methods + (Method("m", (), None, Visibility.PUBLIC, False, cases, ()),)
        classes.append(ClassDecl(f"T{i}", sup, methods=methods, invariants=invs))
    classes.append(ClassDecl("Main", public=True, main=MainMethod()))
    return Program(tuple(classes), "Main")
