"""Supporting laws on classes and attributes.

The provisos here are reconstructions of the classical object-oriented
laws of the same names, adapted to the contract rules of this language.
"""

from __future__ import annotations

from dataclasses import replace

from ..hierarchy import BUILTINS, lookup_field, subclasses, supers
from ..nodes import (
    Binary,
    Call,
    Cast,
    ClassDecl,
    FieldAccess,
    InstanceOf,
    Name,
    Super,
    This,
    Unary,
    VarDecl,
    Visibility,
)
from ..queries import walk
from .base import (
    BACKWARD,
    BOTH,
    CLASS,
    FLAG,
    FORWARD,
    MEMBER,
    NAME,
    Law,
    Match,
    Param,
    Proviso,
    SchemaMismatch,
    get_class,
    node_text,
    retarget,
    spec_visibility,
)


def _real(program, names):
    return [u for u in names if u not in BUILTINS]


def _class_nodes(cls: ClassDecl):
    for inv in cls.invariants:
        yield from walk(inv.pred)
    for a in cls.attributes:
        if a.init is not None:
            yield from walk(a.init)
    for member in cls.constructors + cls.methods:
        for case in member.spec_cases:
            yield from walk(case.pre)
            yield from walk(case.post)
        for s in member.body:
            yield from walk(s)
    if cls.main is not None:
        for s in cls.main.body:
            yield from walk(s)


def _local_names(cls: ClassDecl) -> set[str]:
    names = set()
    for member in cls.constructors + cls.methods:
        names.update(p.name for p in member.params)
    if cls.main is not None:
        names.add(cls.main.param)
    names.update(node.name for _, node, _ in _class_nodes(cls) if isinstance(node, VarDecl))
    return names


def _capture(m: Match, cls: str, name: str) -> list[str]:
    """Parameters or locals named `name` in cls or its subclasses."""
    p = m.program
    return [
        f"{d}: local or parameter '{name}'"
        for d in subclasses(p, cls, proper=False)
        if name in _local_names(p[d])
    ]


def _field_accesses(m: Match, owner: str, name: str):
    return [a for a in m.analysis.accesses if a.kind == "field" and a.owner == owner and a.name == name]


# ------------------------------------------------------------ class elimination


class ClassElimination(Law):
    """An unreferenced class can be removed; a fresh empty class can be introduced."""

    id = "class-elimination"
    name = "class elimination"
    lhs = "cds; class C extends D { }"
    rhs = "cds"
    params = (
        Param("C", CLASS, "class removed (->) or introduced (<-)"),
        Param("super", CLASS, "superclass of an introduced class", default="Object"),
        Param("public", FLAG, "introduce the class as public", default="false"),
    )
    reconstructed = True

    def provisos(self):
        return (
            Proviso("C is not referenced outside itself", FORWARD, self._references, True),
            Proviso("C is not declared", BACKWARD,
                    lambda m: [m.C] if m.C in m.program or m.C in BUILTINS else [], True),
            Proviso("the superclass is declared", BACKWARD,
                    lambda m: [] if m.sup == "Object" or m.sup in m.program else [m.sup], True),
        )

    def _references(self, m: Match):
        return [f"{u.where}" for u in m.analysis.type_uses if u.name == m.C and u.where.cls != m.C]

    def match(self, program, direction, b):
        C = b["C"]
        if direction == FORWARD:
            get_class(program, C, "class")
            if C == program.main:
                raise SchemaMismatch(f"'{C}' is the Main class")
        return Match(self, program, direction, b, dict(C=C, sup=b["super"]))

    def rewrite(self, m: Match):
        if m.direction == FORWARD:
            return m.program.remove_class(m.C)
        return m.program.add_class(ClassDecl(m.C, m.sup, public=m.binding["public"]))


# ------------------------------------------------------------ change superclass


class ChangeSuperclassObject(Law):
    """`class C extends Object` becomes `class C extends D`."""

    id = "change-superclass-object"
    name = "change superclass: from Object to another class"
    lhs = "class C extends Object { ... }"
    rhs = "class C extends D { ... }"
    params = (
        Param("C", CLASS, "class whose superclass changes"),
        Param("D", CLASS, "new superclass"),
    )
    reconstructed = True

    def provisos(self):
        return (
            Proviso("D is not a subclass of C", FORWARD,
                    lambda m: [m.D] if m.D in subclasses(m.program, m.C, proper=False) else [], True),
            Proviso("no member of supers(D) is captured by C or its subclasses", FORWARD,
                    self._capture, True),
            Proviso("supers(D) declare no inherited invariants", FORWARD, self._invariants, True),
            Proviso("super does not appear in C", BACKWARD,
                    lambda m: [f"{m.C}: {node_text(n)}" for _, n, _ in _class_nodes(m.program[m.C])
                               if isinstance(n, Super)], True),
            Proviso("C and its subclasses use no member of supers(D)", BACKWARD, self._uses, True),
            Proviso("no value of type C is used as a supers(D) value", BACKWARD, self._coercions, True),
        )

    def match(self, program, direction, b):
        C, D = b["C"], b["D"]
        cls = get_class(program, C, "class")
        get_class(program, D, "class")
        want = "Object" if direction == FORWARD else D
        if cls.superclass != want:
            raise SchemaMismatch(f"'{C}' extends '{cls.superclass}', not '{want}'")
        return Match(self, program, direction, b, dict(C=C, D=D))

    def _lineage(self, m: Match):
        return _real(m.program, supers(m.program, m.D)) if m.D not in subclasses(
            m.program, m.C, proper=False) else []

    def _capture(self, m: Match):
        p = m.program
        above = set()
        for u in self._lineage(m):
            above |= {a.name for a in p[u].attributes} | {x.name for x in p[u].methods}
        out = []
        for d in subclasses(p, m.C, proper=False):
            mine = {a.name for a in p[d].attributes} | {x.name for x in p[d].methods}
            out += [f"{d}.{n}" for n in sorted(mine & above)]
        return out

    def _invariants(self, m: Match):
        return [
            f"{u} invariant #{i}"
            for u in self._lineage(m)
            for i, inv in enumerate(m.program[u].invariants)
            if inv.visibility is not Visibility.PRIVATE
        ]

    def _uses(self, m: Match):
        p = m.program
        lineage = set(_real(p, supers(p, m.D)))
        below = set(subclasses(p, m.C, proper=False))
        return [str(a) for a in m.analysis.accesses if a.receiver in below and a.owner in lineage]

    def _coercions(self, m: Match):
        p = m.program
        lineage = set(_real(p, supers(p, m.D)))
        below = set(subclasses(p, m.C, proper=False))
        out = [f"{c.where}: {c.actual} used as {c.expected}" for c in m.analysis.coercions
               if c.actual in below and c.expected in lineage]
        for cls in p:
            for _, node, _ in _class_nodes(cls):
                if isinstance(node, (InstanceOf, Cast)) and node.cls in lineage:
                    out.append(f"{cls.name}: {node_text(node)}")
        return out

    def rewrite(self, m: Match):
        p = m.program
        target = m.D if m.direction == FORWARD else "Object"
        return p.replace_class(replace(p[m.C], superclass=target))


# ------------------------------------------------------------ attribute visibility


class AttributeVisibility(Law):
    """Change an attribute's visibility between two fixed levels."""

    reconstructed = True
    params = (
        Param("C", CLASS, "declaring class"),
        Param("a", MEMBER, "attribute name", owner="C"),
    )

    def __init__(self, left: Visibility, right: Visibility):
        self.left, self.right = left, right
        lname = "default" if left is Visibility.DEFAULT else left.name.lower()
        rname = "default" if right is Visibility.DEFAULT else right.name.lower()
        self.id = f"attr-visibility-{lname}-to-{rname}"
        self.name = f"change attribute visibility: from {lname} to {rname}"
        self.lhs = f"class C {{ {left.keyword} T a; }}".replace("  ", " ")
        self.rhs = f"class C {{ {right.keyword} T a; }}".replace("  ", " ")

    def _widening_tag(self):
        return FORWARD if self.right > self.left else BACKWARD

    def _narrowing_tag(self):
        return BACKWARD if self.right > self.left else FORWARD

    def provisos(self):
        return (
            Proviso("no subclass of C declares an attribute a", self._widening_tag(), self._shadow, True),
            Proviso("every access to a is allowed at the new visibility", self._narrowing_tag(),
                    self._access, True),
            Proviso("no specification is more visible than a", self._narrowing_tag(), self._specs, True),
        )

    def match(self, program, direction, b):
        C, a = b["C"], b["a"]
        attr = get_class(program, C, "class").attribute(a)
        if attr is None:
            raise SchemaMismatch(f"'{C}' declares no attribute '{a}'")
        want, new = (self.left, self.right) if direction == FORWARD else (self.right, self.left)
        if attr.visibility is not want:
            raise SchemaMismatch(f"'{C}.{a}' is {attr.visibility.name.lower()}, not {want.name.lower()}")
        return Match(self, program, direction, b, dict(C=C, attr=attr, new=new))

    def _shadow(self, m: Match):
        p = m.program
        return [f"{d}.{m.attr.name}" for d in subclasses(p, m.C) if p[d].attribute(m.attr.name)]

    def _access(self, m: Match):
        if m.new is not Visibility.PRIVATE:
            return []  # a single package: default and wider reach every class
        return [str(a) for a in _field_accesses(m, m.C, m.attr.name) if a.where.cls != m.C]

    def _specs(self, m: Match):
        out = []
        for a in _field_accesses(m, m.C, m.attr.name):
            vis = spec_visibility(m.program, a.where)
            if vis is not None and vis > m.new:
                out.append(f"{a} ({vis.name.lower()} specification)")
        return out

    def rewrite(self, m: Match):
        p = m.program
        return p.replace_class(p[m.C].replace_attribute(m.attr.name, replace(m.attr, visibility=m.new)))


# ------------------------------------------------------------ nullable


def _mentions_attr(node, name: str) -> bool:
    if isinstance(node, Name):
        return node.name == name
    if isinstance(node, FieldAccess) and node.name == name:
        t = node.target
        return isinstance(t, This) or (isinstance(t, Cast) and isinstance(t.expr, This))
    return False


def _positive_conjuncts(pred):
    if isinstance(pred, Binary) and pred.op == "&&":
        yield from _positive_conjuncts(pred.left)
        yield from _positive_conjuncts(pred.right)
    elif not (isinstance(pred, Binary) and pred.op in ("||", "==>")) and not (
        isinstance(pred, Unary) and pred.op == "!"
    ):
        yield pred


def dereferences(pred, name: str) -> bool:
    """True if `pred` forces `name` non-null: a member of it is used in a positive conjunct."""
    for atom in _positive_conjuncts(pred):
        for _, node, _ in walk(atom):
            if isinstance(node, (FieldAccess, Call)) and node.target is not None \
                    and _mentions_attr(node.target, name):
                return True
    return False


class MakeAttributeNullable(Law):
    """Add (->) or drop (<-) the nullable annotation of a reference attribute."""

    id = "make-attribute-nullable"
    name = "make attribute nullable"
    lhs = "class C { T a; }"
    rhs = "class C { /*@ nullable @*/ T a; }"
    params = (
        Param("C", CLASS, "declaring class"),
        Param("a", MEMBER, "attribute name", owner="C"),
    )
    reconstructed = True

    def provisos(self):
        return (
            Proviso("T is not a primitive type", BOTH,
                    lambda m: [f"{m.C}.{m.attr.name}: {m.attr.type}"] if m.attr.type.primitive else [], True),
            Proviso("an inherited invariant of C dereferences a", BACKWARD, self._guarded, True),
        )

    def _guarded(self, m: Match):
        p = m.program
        leaf = not subclasses(p, m.C)
        for inv in p[m.C].invariants:
            if (inv.visibility is not Visibility.PRIVATE or leaf) and dereferences(inv.pred, m.attr.name):
                return []
        return [f"{m.C}.{m.attr.name}"]

    def match(self, program, direction, b):
        C, a = b["C"], b["a"]
        attr = get_class(program, C, "class").attribute(a)
        if attr is None:
            raise SchemaMismatch(f"'{C}' declares no attribute '{a}'")
        if attr.nullable != (direction == BACKWARD):
            state = "already" if attr.nullable else "not"
            raise SchemaMismatch(f"'{C}.{a}' is {state} nullable")
        return Match(self, program, direction, b, dict(C=C, attr=attr))

    def rewrite(self, m: Match):
        p = m.program
        new = replace(m.attr, nullable=m.direction == FORWARD)
        return p.replace_class(p[m.C].replace_attribute(m.attr.name, new))


# ------------------------------------------------------------ renaming and merging


class RenameAttribute(Law):
    """Rename an attribute together with every access that resolves to it."""

    id = "rename-attribute"
    name = "rename attribute"
    lhs = "class C { T a; } ... x.a ..."
    rhs = "class C { T b; } ... x.b ..."
    params = (
        Param("C", CLASS, "declaring class"),
        Param("a", MEMBER, "current name (->)", owner="C"),
        Param("to", NAME, "new name (->)"),
    )
    reconstructed = True

    def provisos(self):
        return (
            Proviso("the new name is not declared in supers(C) or below C", BOTH, self._declared, True),
            Proviso("the new name is not a local or parameter below C", BOTH,
                    lambda m: _capture(m, m.C, m.new), True),
        )

    def match(self, program, direction, b):
        C = b["C"]
        old, new = (b["a"], b["to"]) if direction == FORWARD else (b["to"], b["a"])
        attr = get_class(program, C, "class").attribute(old)
        if attr is None:
            raise SchemaMismatch(f"'{C}' declares no attribute '{old}'")
        return Match(self, program, direction, b, dict(C=C, old=old, new=new, attr=attr))

    def _declared(self, m: Match):
        p = m.program
        scope = _real(p, supers(p, m.C)) + subclasses(p, m.C)
        return [f"{u}.{m.new}" for u in scope if p[u].attribute(m.new) is not None]

    def rewrite(self, m: Match):
        p = retarget(m.program, _field_accesses(m, m.C, m.old), m.new)
        return p.replace_class(p[m.C].replace_attribute(m.old, replace(m.attr, name=m.new)))


class MergeAttributeIntoInherited(Law):
    """Drop C's attribute b in favour of an inherited attribute a of the same type.

    Sound when no object that may have type C ever uses the inherited a,
    so the two fields never hold different values that anyone observes.
    """

    id = "merge-attribute-into-inherited"
    name = "merge attribute into inherited attribute"
    lhs = "class A { T a; }  class C extends ... A { T b; } ... x.b ..."
    rhs = "class A { T a; }  class C extends ... A { } ... x.a ..."
    directions = (FORWARD,)
    params = (
        Param("C", CLASS, "class that declares b"),
        Param("b", MEMBER, "attribute removed", owner="C"),
        Param("a", NAME, "inherited attribute that takes over"),
    )
    reconstructed = True

    def provisos(self):
        return (
            Proviso("b and a have the same type and nullability", FORWARD, self._same, True),
            Proviso("a is visible in C", FORWARD,
                    lambda m: [f"{m.owner}.{m.inherited.name}"]
                    if m.inherited.visibility is Visibility.PRIVATE else [], True),
            Proviso("b has no initializer", FORWARD,
                    lambda m: [f"{m.C}.{m.attr.name}"] if m.attr.init is not None else [], True),
            Proviso("a is not redeclared in C or below", FORWARD, self._redeclared, True),
            Proviso("a is not used on objects that may have type C", FORWARD, self._used, True),
            Proviso("no specification using b is more visible than a", FORWARD, self._specs, True),
            Proviso("a is not a local or parameter below C", FORWARD,
                    lambda m: _capture(m, m.C, m.inherited.name), True),
        )

    def match(self, program, direction, b):
        C = b["C"]
        cls = get_class(program, C, "class")
        attr = cls.attribute(b["b"])
        if attr is None:
            raise SchemaMismatch(f"'{C}' declares no attribute '{b['b']}'")
        found = lookup_field(program, cls.superclass, b["a"]) if cls.superclass not in BUILTINS else None
        if found is None:
            raise SchemaMismatch(f"'{C}' inherits no attribute '{b['a']}'")
        owner, inherited = found
        return Match(self, program, direction, b, dict(C=C, attr=attr, owner=owner, inherited=inherited))

    def _same(self, m: Match):
        a, b = m.inherited, m.attr
        if (a.type, a.nullable) == (b.type, b.nullable):
            return []
        return [f"{m.C}.{b.name}: {b.type}{' nullable' if b.nullable else ''} vs "
                f"{m.owner}.{a.name}: {a.type}{' nullable' if a.nullable else ''}"]

    def _redeclared(self, m: Match):
        p = m.program
        return [f"{d}.{m.inherited.name}" for d in subclasses(p, m.C, proper=False)
                if p[d].attribute(m.inherited.name) is not None]

    def _used(self, m: Match):
        p = m.program
        maybe_c = set(supers(p, m.C)) | set(subclasses(p, m.C, proper=False))
        return [str(a) for a in _field_accesses(m, m.owner, m.inherited.name) if a.receiver in maybe_c]

    def _specs(self, m: Match):
        out = []
        for a in _field_accesses(m, m.C, m.attr.name):
            vis = spec_visibility(m.program, a.where)
            if vis is not None and vis > m.inherited.visibility:
                out.append(str(a))
        return out

    def rewrite(self, m: Match):
        p = retarget(m.program, _field_accesses(m, m.C, m.attr.name), m.inherited.name)
        return p.replace_class(p[m.C].without_attribute(m.attr.name))


ATTRIBUTE_LAWS = (
    ClassElimination(),
    ChangeSuperclassObject(),
    AttributeVisibility(Visibility.PRIVATE, Visibility.PUBLIC),
    AttributeVisibility(Visibility.PUBLIC, Visibility.DEFAULT),
    AttributeVisibility(Visibility.DEFAULT, Visibility.PROTECTED),
    MakeAttributeNullable(),
    RenameAttribute(),
    MergeAttributeIntoInherited(),
)
