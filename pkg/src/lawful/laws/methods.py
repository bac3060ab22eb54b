"""Supporting laws on methods, conditionals and contracts.

Provisos are reconstructions. The two simplification laws are semantic:
they accept any replacement the equivalence oracle cannot tell apart from
the original for the exact types the program instantiates.
"""

from __future__ import annotations

from dataclasses import replace

from ..hierarchy import lookup_method, subclasses, subtype_of
from ..nodes import If, InstanceOf, SpecCase, This, Unary, Visibility, neg
from ..queries import SuperRef, occurs_in
from .base import (
    BACKWARD,
    BOTH,
    CLASS,
    FORWARD,
    INT,
    MEMBER,
    PRED,
    VIS,
    Law,
    Match,
    Param,
    Proviso,
    SchemaMismatch,
    contracts_preserved,
    get_class,
    ill_formed,
    node_text,
    require_direct_subclass,
    strict_subtype,
    uncast_this,
)


def _method_trees(meth):
    for case in meth.spec_cases:
        yield case.pre
        yield case.post
    yield from meth.body


def _supers_in(meth, label):
    return [f"{label}: {node_text(o.node)}" for t in _method_trees(meth) for o in occurs_in(t, SuperRef())]


# ------------------------------------------------------------ move original method


class MoveOriginalMethod(Law):
    """Move a method that only C declares up to C's direct superclass B."""

    id = "move-original-method"
    name = "move original method to superclass"
    lhs = "class B { mds }  class C extends B { rt m(pds) { mbody } mds' }"
    rhs = "class B { rt m(pds) { mbody } mds }  class C extends B { mds' }"
    params = (
        Param("B", CLASS, "superclass"),
        Param("C", CLASS, "direct subclass"),
        Param("m", MEMBER, "method name", owner="C"),
    )
    reconstructed = True

    def provisos(self):
        return (
            Proviso("m is not declared in B nor its superclasses", FORWARD,
                    lambda m: [f"{found[0]}.{m.name}"] if (found := lookup_method(m.program, m.B, m.name))
                    else [], True),
            Proviso("super does not appear in m", BOTH, lambda m: _supers_in(m.meth, m.label), True),
            Proviso("m references no private member", FORWARD, self._private, True),
            Proviso("m has no uncast occurrences of this", FORWARD,
                    lambda m: [x for t in _method_trees(m.meth) for x in uncast_this(m, t, m.C, m.label)],
                    True),
            Proviso("contracts of m are preserved below B", FORWARD,
                    lambda m: contracts_preserved(m, m.B, m.name), True),
            Proviso("m is not called on receivers outside C", BACKWARD, self._foreign_calls, True),
            Proviso("no class outside C redefines m below B", BACKWARD, self._redefined, True),
        )

    def match(self, program, direction, b):
        B, C, name = b["B"], b["C"], b["m"]
        require_direct_subclass(program, C, B)
        src, dst = (C, B) if direction == FORWARD else (B, C)
        meth = program[src].method(name)
        if meth is None:
            raise SchemaMismatch(f"'{src}' declares no method '{name}'")
        if program[dst].method(name) is not None:
            raise SchemaMismatch(f"'{dst}' already declares '{name}'")
        return Match(self, program, direction, b,
                     dict(B=B, C=C, src=src, dst=dst, name=name, meth=meth, label=f"{src}.{name}"))

    def _private(self, m: Match):
        return [
            f"{m.label}: {node_text(a.node)}"
            for t in _method_trees(m.meth)
            for a in m.accesses_within(t)
            if a.visibility is Visibility.PRIVATE
        ]

    def _foreign_calls(self, m: Match):
        p = m.program
        return [
            str(a) for a in m.analysis.accesses
            if a.kind == "method" and a.name == m.name and a.owner == m.B
            and strict_subtype(p, a.receiver, m.B, m.C)
        ]

    def _redefined(self, m: Match):
        p = m.program
        return [f"{d}.{m.name}" for d in subclasses(p, m.B)
                if not subtype_of(p, d, m.C) and p[d].method(m.name) is not None]

    def rewrite(self, m: Match):
        p = m.program
        src = p[m.src].without_method(m.name)
        dst = p[m.dst]
        dst = replace(dst, methods=dst.methods + (m.meth,))
        return p.replace_class(src).replace_class(dst)


# ------------------------------------------------------------ conditionals


def _type_test_of(cond):
    """(class, negated) for `this instanceof D` or `!(this instanceof D)`."""
    negated = False
    if isinstance(cond, Unary) and cond.op == "!":
        cond, negated = cond.operand, True
    if isinstance(cond, InstanceOf) and isinstance(cond.expr, This):
        return cond.cls, negated
    return None


class SimplifyConditional(Law):
    """Collapse a type-test conditional whose outcome does not matter or is fixed."""

    id = "simplify-conditional"
    name = "simplify conditional commands"
    lhs = "rt m(pds) { if (!(this instanceof D)) { s } else { s' } }"
    rhs = "rt m(pds) { s }   (s == s', or the type test is constant on C)"
    params = (
        Param("C", CLASS, "class declaring the method"),
        Param("m", MEMBER, "method name", owner="C"),
        Param("D", CLASS, "class tested when wrapping (<-)", default="Object"),
    )
    reconstructed = True

    def provisos(self):
        return (
            Proviso("the tested class is declared", BACKWARD,
                    lambda m: [] if m.D == "Object" or m.D in m.program else [m.D], True),
        )

    def match(self, program, direction, b):
        C, name = b["C"], b["m"]
        meth = get_class(program, C, "class").method(name)
        if meth is None:
            raise SchemaMismatch(f"'{C}' declares no method '{name}'")
        parts = dict(C=C, name=name, meth=meth, D=b["D"])
        if direction == BACKWARD:
            return Match(self, program, direction, b, parts)
        body = meth.body
        if not (len(body) == 1 and isinstance(body[0], If) and body[0].orelse is not None):
            raise SchemaMismatch(f"the body of '{C}.{name}' is not a single if-else")
        stmt = body[0]
        test = _type_test_of(stmt.cond)
        if test is None:
            raise SchemaMismatch(f"the condition in '{C}.{name}' is not a type test on this")
        if stmt.then == stmt.orelse:
            parts["kept"] = stmt.then
        else:
            d, negated = test
            below = subclasses(program, C, proper=False)
            try:
                verdicts = {subtype_of(program, t, d) for t in below}
            except LookupError:
                verdicts = {False}
            if len(verdicts) != 1:
                raise SchemaMismatch(f"'this instanceof {d}' is not constant in '{C}'")
            holds = verdicts.pop() != negated
            parts["kept"] = stmt.then if holds else stmt.orelse
        return Match(self, program, direction, b, parts)

    def rewrite(self, m: Match):
        p = m.program
        if m.direction == FORWARD:
            body = m.kept
        else:
            body = (If(neg(InstanceOf(This(), m.D)), m.meth.body, m.meth.body),)
        return p.replace_class(p[m.C].replace_method(m.name, replace(m.meth, body=body)))


# ------------------------------------------------------------ invariants


class InvariantVisibilityChange(Law):
    """Change the visibility of one invariant (-> from `from` to `to`)."""

    id = "invariant-visibility-change"
    name = "change invariant visibility"
    lhs = "class C { //@ from invariant psi; }"
    rhs = "class C { //@ to invariant psi; }"
    params = (
        Param("C", CLASS, "declaring class"),
        Param("inv", INT, "invariant index", default="0"),
        Param("from", VIS, "visibility on the left"),
        Param("to", VIS, "visibility on the right"),
    )
    reconstructed = True

    def provisos(self):
        return (
            Proviso("members used by the invariant are at least as visible", BOTH, self._members, True),
            Proviso("C has no subclasses when privacy changes", BOTH, self._subclasses, True),
        )

    def match(self, program, direction, b):
        C, idx = b["C"], b["inv"]
        cls = get_class(program, C, "class")
        if not 0 <= idx < len(cls.invariants):
            raise SchemaMismatch(f"'{C}' has no invariant #{idx}")
        old, new = (b["from"], b["to"]) if direction == FORWARD else (b["to"], b["from"])
        decl = cls.invariants[idx]
        if decl.visibility is not old:
            raise SchemaMismatch(
                f"invariant #{idx} of '{C}' is {decl.visibility.name.lower()}, not {old.name.lower()}"
            )
        return Match(self, program, direction, b, dict(C=C, idx=idx, decl=decl, old=old, new=new))

    def _members(self, m: Match):
        return [
            f"{m.C} invariant #{m.idx}: {node_text(a.node)} is {a.visibility.name.lower()}"
            for a in m.accesses_within(m.decl.pred)
            if a.visibility < m.new
        ]

    def _subclasses(self, m: Match):
        crosses = (m.old is Visibility.PRIVATE) != (m.new is Visibility.PRIVATE)
        subs = subclasses(m.program, m.C)
        return list(subs) if crosses else []

    def rewrite(self, m: Match):
        p = m.program
        invs = list(p[m.C].invariants)
        invs[m.idx] = replace(m.decl, visibility=m.new)
        return p.replace_class(replace(p[m.C], invariants=tuple(invs)))


class InvariantSimplification(Law):
    """Replace an invariant by a predicate with the same meaning for C's objects."""

    id = "invariant-simplification"
    name = "simplify invariant"
    lhs = "class C { //@ invariant psi; }"
    rhs = "class C { //@ invariant psi'; }   (psi == psi' for every instantiated T <= C)"
    directions = (FORWARD,)
    params = (
        Param("C", CLASS, "declaring class"),
        Param("inv", INT, "invariant index", default="0"),
        Param("pred", PRED, "replacement predicate"),
    )
    reconstructed = True

    def provisos(self):
        return (
            Proviso("the replacement is well-formed", FORWARD, ill_formed, True),
            Proviso("extended invariants are preserved for instantiated T <= C", FORWARD,
                    lambda m: contracts_preserved(m, m.C), True),
        )

    def match(self, program, direction, b):
        C, idx = b["C"], b["inv"]
        cls = get_class(program, C, "class")
        if not 0 <= idx < len(cls.invariants):
            raise SchemaMismatch(f"'{C}' has no invariant #{idx}")
        return Match(self, program, direction, b, dict(C=C, idx=idx))

    def rewrite(self, m: Match):
        p = m.program
        invs = list(p[m.C].invariants)
        invs[m.idx] = replace(invs[m.idx], pred=m.binding["pred"])
        return p.replace_class(replace(p[m.C], invariants=tuple(invs)))


class SpecSimplification(Law):
    """Replace all specification cases of a method by one equivalent case."""

    id = "spec-simplification"
    name = "simplify method specification"
    lhs = "class C { //@ requires p1; ensures q1; also ... rt m(pds) { ... } }"
    rhs = "class C { //@ requires pre; ensures post; rt m(pds) { ... } }"
    directions = (FORWARD,)
    params = (
        Param("C", CLASS, "declaring class"),
        Param("m", MEMBER, "method name", owner="C"),
        Param("pre", PRED, "replacement precondition", default="true"),
        Param("post", PRED, "replacement postcondition", default="true"),
    )
    reconstructed = True

    def provisos(self):
        return (
            Proviso("the replacement is well-formed", FORWARD, ill_formed, True),
            Proviso("extended specifications of m are preserved for instantiated T <= C", FORWARD,
                    lambda m: contracts_preserved(m, m.C, m.name), True),
        )

    def match(self, program, direction, b):
        C, name = b["C"], b["m"]
        meth = get_class(program, C, "class").method(name)
        if meth is None:
            raise SchemaMismatch(f"'{C}' declares no method '{name}'")
        return Match(self, program, direction, b, dict(C=C, name=name, meth=meth))

    def rewrite(self, m: Match):
        p = m.program
        case = SpecCase(m.binding["pre"], m.binding["post"])
        return p.replace_class(p[m.C].replace_method(m.name, replace(m.meth, spec_cases=(case,))))


METHOD_LAWS = (
    MoveOriginalMethod(),
    SimplifyConditional(),
    InvariantVisibilityChange(),
    InvariantSimplification(),
    SpecSimplification(),
)
