"""The three laws that pull contracts and members up a class hierarchy."""

from __future__ import annotations

from dataclasses import replace

from ..hierarchy import subclasses
from ..nodes import (
    Binary,
    Cast,
    Expr,
    If,
    InstanceOf,
    Invariant,
    MetaVar,
    SpecCase,
    This,
    Visibility,
    conj,
    neg,
)
from ..queries import SuperCall, SuperRef, match, occurs_in, substitute
from .base import (
    BACKWARD,
    BOTH,
    CLASS,
    FORWARD,
    INT,
    MEMBER,
    Law,
    Match,
    Param,
    Proviso,
    SchemaMismatch,
    node_text,
    require_direct_subclass,
    strict_subtype,
    uncast_this,
)


def _type_test(c: str) -> Expr:
    return InstanceOf(This(), c)


def _split_guarded(pred: Expr, c: str):
    """Split `psi1' && (this instanceof C ==> psi_inv)` into its parts.

    Returns (psi1_prime or None, psi2, psi_inv) or None when the shape differs.
    """
    def guarded(e):
        return (
            isinstance(e, Binary)
            and e.op == "==>"
            and e.left == _type_test(c)
        )

    if guarded(pred):
        return None, pred, pred.right
    if isinstance(pred, Binary) and pred.op == "&&" and guarded(pred.right):
        return pred.left, pred.right, pred.right.right
    return None


def _supers_text(tree, label: str) -> list[str]:
    return [f"{label}: {node_text(o.node)}" for o in occurs_in(tree, SuperRef())]


# ---------------------------------------------------------------- Law 1


class MoveInvariant(Law):
    """Pull the guarded part of a subclass invariant up into its superclass."""

    id = "law1-move-invariant"
    name = "move invariant to superclass"
    lhs = "class B extends A { inv psi1; ... }  class C extends B { inv psi1' && psi2; ... }"
    rhs = "class B extends A { inv psi1 && psi2; ... }  class C extends B { inv psi1'; ... }"
    where = ("psi2 == this instanceof C ==> psi_inv",)
    params = (
        Param("B", CLASS, "superclass receiving the invariant"),
        Param("C", CLASS, "direct subclass giving it up"),
        Param("inv", INT, "index of C's invariant", default="0"),
        Param("binv", INT, "index of B's invariant", default="0"),
    )

    def provisos(self):
        return (
            Proviso("super does not appear in psi2", BOTH, lambda m: _supers_text(m.psi2, m.label)),
            Proviso(
                "psi2 has no uncast occurrences of this",
                FORWARD,
                lambda m: uncast_this(m, m.psi_inv, m.C, m.label),
            ),
        )

    def _invariant(self, cls, idx: int, role: str, allow_missing: bool):
        if idx < 0:
            raise SchemaMismatch(f"invariant index {idx} is negative")
        if idx >= len(cls.invariants):
            if allow_missing and not cls.invariants:
                return None
            raise SchemaMismatch(f"{role} '{cls.name}' has no invariant #{idx}")
        inv = cls.invariants[idx]
        if inv.visibility is Visibility.PRIVATE:
            raise SchemaMismatch(f"invariant #{idx} of '{cls.name}' is private and is not inherited")
        return inv

    def match(self, program, direction, b):
        B, C = b["B"], b["C"]
        require_direct_subclass(program, C, B)
        bcls, ccls = program[B], program[C]
        parts = dict(B=B, C=C)
        if direction == FORWARD:
            inv = self._invariant(ccls, b["inv"], "class", False)
            split = _split_guarded(inv.pred, C)
            if split is None:
                raise SchemaMismatch(
                    f"invariant #{b['inv']} of '{C}' is not of the form psi1' && (this instanceof {C} ==> psi_inv)"
                )
            parts["psi1p"], parts["psi2"], parts["psi_inv"] = split
            parts["binv_decl"] = self._invariant(bcls, b["binv"], "class", True)
            parts["label"] = f"{C} invariant #{b['inv']}"
        else:
            inv = self._invariant(bcls, b["binv"], "class", False)
            split = _split_guarded(inv.pred, C)
            if split is None:
                raise SchemaMismatch(
                    f"invariant #{b['binv']} of '{B}' is not of the form psi1 && (this instanceof {C} ==> psi_inv)"
                )
            parts["psi1"], parts["psi2"], parts["psi_inv"] = split
            parts["cinv_decl"] = self._invariant(ccls, b["inv"], "class", True)
            parts["label"] = f"{B} invariant #{b['binv']}"
        return Match(self, program, direction, b, parts)

    def rewrite(self, m: Match):
        p, b = m.program, m.binding
        bcls, ccls = p[m.B], p[m.C]
        if m.direction == FORWARD:
            bcls = _merge_into(bcls, b["binv"], m.binv_decl, m.psi2)
            ccls = _strip(ccls, b["inv"], m.psi1p)
        else:
            ccls = _merge_into(ccls, b["inv"], m.cinv_decl, m.psi2)
            bcls = _strip(bcls, b["binv"], m.psi1)
        return p.replace_class(bcls).replace_class(ccls)


def _merge_into(cls, idx, decl, psi2):
    invs = list(cls.invariants)
    if decl is None:
        # the schema's invariant carries no modifier
        invs.insert(min(idx, len(invs)), Invariant(Visibility.DEFAULT, psi2))
    else:
        invs[idx] = replace(decl, pred=conj(decl.pred, psi2))
    return replace(cls, invariants=tuple(invs))


def _strip(cls, idx, rest):
    invs = list(cls.invariants)
    if rest is None:
        del invs[idx]
    else:
        invs[idx] = replace(invs[idx], pred=rest)
    return replace(cls, invariants=tuple(invs))


# ---------------------------------------------------------------- Law 2


class MoveRefAttribute(Law):
    """Move a nullable reference-typed attribute from a subclass to its superclass."""

    id = "law2-move-ref-attribute"
    name = "move reference type attribute to superclass"
    lhs = "class B extends A { ads ... }  class C extends B { /*@ nullable @*/ T a; ads' ... }"
    rhs = "class B extends A { /*@ nullable @*/ T a; ads ... }  class C extends B { ads' ... }"
    params = (
        Param("B", CLASS, "superclass"),
        Param("C", CLASS, "direct subclass"),
        Param("a", MEMBER, "attribute name", owner="C"),
    )

    def provisos(self):
        return (
            Proviso("D.a does not occur inside specifications (D <= B, D not <= C)", BACKWARD,
                    lambda m: self._foreign_uses(m, spec=True)),
            Proviso("T is not a primitive type", BOTH,
                    lambda m: [] if not m.attr.type.primitive else [f"{m.src}.{m.attr.name}: {m.attr.type}"]),
            Proviso("a is not declared in ads", FORWARD,
                    lambda m: [f"{m.B}.{m.attr.name}"] if m.program[m.B].attribute(m.attr.name) else []),
            Proviso("a is not declared by the subclasses of B", FORWARD, self._sibling_decls),
            Proviso("D.a does not occur in code (D <= B, D not <= C)", BACKWARD,
                    lambda m: self._foreign_uses(m, spec=False)),
        )

    def match(self, program, direction, b):
        B, C, a = b["B"], b["C"], b["a"]
        require_direct_subclass(program, C, B)
        src = C if direction == FORWARD else B
        attr = program[src].attribute(a)
        if attr is None:
            raise SchemaMismatch(f"'{src}' declares no attribute '{a}'")
        if not attr.type.primitive and not attr.nullable:
            raise SchemaMismatch(f"attribute '{src}.{a}' is not declared nullable")
        if attr.visibility is Visibility.PRIVATE:
            raise SchemaMismatch(f"attribute '{src}.{a}' is private")
        if direction == BACKWARD and program[C].attribute(a) is not None:
            raise SchemaMismatch(f"'{C}' already declares '{a}'")
        return Match(self, program, direction, b, dict(B=B, C=C, src=src, attr=attr))

    def _sibling_decls(self, m: Match):
        p = m.program
        return [
            f"{d}.{m.attr.name}"
            for d in subclasses(p, m.B)
            if d != m.C and p[d].attribute(m.attr.name) is not None
        ]

    def _foreign_uses(self, m: Match, spec: bool):
        p = m.program
        return [
            str(acc)
            for acc in m.analysis.accesses
            if acc.kind == "field"
            and acc.name == m.attr.name
            and acc.owner == m.B
            and acc.where.in_spec == spec
            and strict_subtype(p, acc.receiver, m.B, m.C)
        ]

    def rewrite(self, m: Match):
        p = m.program
        dst = m.B if m.direction == FORWARD else m.C
        src_cls = p[m.src].without_attribute(m.attr.name)
        dst_cls = p[dst].with_attribute(m.attr, 0)
        return p.replace_class(src_cls).replace_class(dst_cls)


# ---------------------------------------------------------------- Law 3

def _theta(c: str):
    return neg(_type_test(c)), _type_test(c)


def _rhs_cases(c: str) -> tuple[SpecCase, ...]:
    t1, t2 = _theta(c)
    psi1, psi2, psi1p, psi2p = (MetaVar(n) for n in ("psi1", "psi2", "psi1p", "psi2p"))
    return (
        SpecCase(conj(t1, psi1), conj(t1, psi2)),
        SpecCase(conj(t2, psi1p), conj(t2, psi2p)),
        SpecCase(conj(t2, psi1), conj(t2, psi2)),
    )


class MoveRedefinedMethod(Law):
    """Merge a redefinition in C into the superclass method, split by a type test."""

    id = "law3-move-redefined-method"
    name = "move redefined method to superclass"
    lhs = ("class B extends A { requires psi1; ensures psi2; rt m(pds) { mbody } }  "
           "class C extends B { also requires psi1'; ensures psi2'; rt m(pds) { mbody' } }")
    rhs = ("class B extends A { requires theta1 && psi1; ensures theta1 && psi2; also "
           "requires theta2 && psi1'; ensures theta2 && psi2'; also requires theta2 && psi1; "
           "ensures theta2 && psi2; rt m(pds) { if (!(this instanceof C)) { mbody } else { mbody' } } }  "
           "class C extends B { ... }")
    where = ("theta1 == !(this instanceof C)", "theta2 == this instanceof C")
    params = (
        Param("B", CLASS, "superclass"),
        Param("C", CLASS, "direct subclass"),
        Param("m", MEMBER, "method name", owner="C"),
    )

    def provisos(self):
        return (
            Proviso("super does not appear in psi1' nor in psi2'", BOTH,
                    lambda m: _supers_text(m.case_p.pre, m.label_p) + _supers_text(m.case_p.post, m.label_p)),
            Proviso("psi1' and psi2' have no uncast occurrences of this", FORWARD,
                    lambda m: uncast_this(m, m.case_p.pre, m.C, m.label_p)
                    + uncast_this(m, m.case_p.post, m.C, m.label_p)),
            Proviso("super and private attributes do not appear in mbody'", BOTH, self._super_private),
            Proviso("super.m does not appear in mds'", BOTH, self._super_m),
            Proviso("mbody' has no uncast this nor private ((C) this) members", FORWARD, self._cast_this),
            Proviso("m(pds) is not declared in mds'", BACKWARD,
                    lambda m: [f"{m.C}.{m.name}"] if m.program[m.C].method(m.name) else []),
        )

    def match(self, program, direction, b):
        B, C, name = b["B"], b["C"], b["m"]
        require_direct_subclass(program, C, B)
        bm = program[B].method(name)
        if bm is None:
            raise SchemaMismatch(f"'{B}' declares no method '{name}'")
        parts = dict(B=B, C=C, name=name, bm=bm)
        if direction == FORWARD:
            cm = program[C].method(name)
            if cm is None:
                raise SchemaMismatch(f"'{C}' declares no method '{name}'")
            for meth, owner in ((bm, B), (cm, C)):
                if len(meth.spec_cases) != 1:
                    raise SchemaMismatch(
                        f"'{owner}.{name}' must have exactly one specification case, found {len(meth.spec_cases)}"
                    )
            if (bm.params, bm.return_type, bm.visibility, bm.pure) != (
                cm.params, cm.return_type, cm.visibility, cm.pure
            ):
                raise SchemaMismatch(f"'{C}.{name}' does not redefine '{B}.{name}' with the same header")
            parts.update(case=bm.spec_cases[0], case_p=cm.spec_cases[0], body=bm.body, body_p=cm.body)
        else:
            binding: dict = {}
            cases = _rhs_cases(C)
            if len(bm.spec_cases) != len(cases):
                raise SchemaMismatch(f"'{B}.{name}' does not carry the three merged specification cases")
            for pattern, case in zip(cases, bm.spec_cases):
                for pat, term in ((pattern.pre, case.pre), (pattern.post, case.post)):
                    binding = match(pat, term, binding)
                    if binding is None:
                        raise SchemaMismatch(
                            f"the specification of '{B}.{name}' does not match the merged shape"
                        )
            body = bm.body
            if not (len(body) == 1 and isinstance(body[0], If) and body[0].orelse is not None
                    and body[0].cond == _theta(C)[0]):
                raise SchemaMismatch(
                    f"the body of '{B}.{name}' is not if (!(this instanceof {C})) {{ ... }} else {{ ... }}"
                )
            parts.update(
                case=SpecCase(binding["psi1"], binding["psi2"]),
                case_p=SpecCase(binding["psi1p"], binding["psi2p"]),
                body=body[0].then,
                body_p=body[0].orelse,
            )
        parts["label_p"] = f"{C}.{name} (spec)" if direction == FORWARD else f"{B}.{name} (spec, theta2 case)"
        parts["label_body"] = f"{C}.{name} (body)" if direction == FORWARD else f"{B}.{name} (else branch)"
        return Match(self, program, direction, b, parts)

    def _super_private(self, m: Match):
        out = []
        for stmt in m.body_p:
            out += _supers_text(stmt, m.label_body)
            out += [
                f"{m.label_body}: {node_text(a.node)}"
                for a in m.accesses_within(stmt)
                if a.kind == "field" and a.visibility is Visibility.PRIVATE
            ]
        return out

    def _super_m(self, m: Match):
        p = m.program
        out = []
        trees = [m.body_p] + [meth.body for meth in p[m.C].methods if meth.name != m.name]
        for body in trees:
            for stmt in body:
                out += [f"{m.C}: {node_text(o.node)}" for o in occurs_in(stmt, SuperCall(m.name))]
        return out

    def _cast_this(self, m: Match):
        out = []
        for stmt in m.body_p:
            out += uncast_this(m, stmt, m.C, m.label_body)
            for a in m.accesses_within(stmt):
                target = getattr(a.node, "target", None)
                if (
                    a.via == "cast-this"
                    and isinstance(target, Cast)
                    and target.cls == m.C
                    and a.visibility is Visibility.PRIVATE
                ):
                    out.append(f"{m.label_body}: {node_text(a.node)}")
        return out

    def rewrite(self, m: Match):
        p = m.program
        bcls, ccls = p[m.B], p[m.C]
        if m.direction == FORWARD:
            mapping = {"psi1": m.case.pre, "psi2": m.case.post,
                       "psi1p": m.case_p.pre, "psi2p": m.case_p.post}
            cases = tuple(
                SpecCase(substitute(c.pre, mapping), substitute(c.post, mapping)) for c in _rhs_cases(m.C)
            )
            body = (If(_theta(m.C)[0], m.body, m.body_p),)
            merged = replace(m.bm, spec_cases=cases, body=body)
            return p.replace_class(bcls.replace_method(m.name, merged)).replace_class(
                ccls.without_method(m.name)
            )
        original = replace(m.bm, spec_cases=(m.case,), body=m.body)
        redefined = replace(m.bm, spec_cases=(m.case_p,), body=m.body_p, span=None)
        ccls = replace(ccls, methods=ccls.methods + (redefined,))
        return p.replace_class(bcls.replace_method(m.name, original)).replace_class(ccls)


CORE_LAWS = (MoveInvariant(), MoveRefAttribute(), MoveRedefinedMethod())
