import random
from dataclasses import replace
from pathlib import Path

import pytest
import sympy
from sympy.logic.inference import satisfiable

from lawful import parse, parse_file
from lawful.laws import apply_law
from lawful.nodes import Binary, BoolLit, Call, InstanceOf, Old, This, Unary
from lawful.oracle import (
    AtomCapExceeded,
    AtomTable,
    EquivalenceReport,
    abstract,
    check_law_equivalence,
    compare,
    equivalent,
    evaluate_predicate,
    normalize_atom,
)
from lawful.parser import parse_expr
from lawful.hierarchy import subtype_of

CORPUS = Path(__file__).resolve().parents[1] / "corpus"
L3 = "law3-move-redefined-method"


@pytest.fixture(scope="module")
def law1():
    return parse_file(CORPUS / "law1_schematic.mjml")


def test_type_test_is_constant(law1):
    table = AtomTable()
    f = abstract(parse_expr("this instanceof C ==> ((C) this).psiInv()"), "B", law1, (), table)
    assert f[1] == ("const", False)
    assert equivalent(parse_expr("this instanceof C ==> ((C) this).psiInv()"), BoolLit(True), "B", law1)
    assert not equivalent(parse_expr("this instanceof C ==> ((C) this).psiInv()"), BoolLit(True), "E", law1)


def test_constant_true():
    table = AtomTable()
    assert abstract(BoolLit(True), "Object", None, (), table) == ("const", True)
    assert len(table) == 0


def test_old_splits_the_state(law1):
    table = AtomTable()
    f = abstract(parse_expr("\\old(psi1()) ==> psi1()"), "B", law1, (), table, "post")
    assert len(table) == 2
    diff = compare(f, ("const", True), table)
    assert diff == ({"\\old(this.psi1())": True, "this.psi1()": False}, False, True)


def test_old_distributes(law1):
    a = parse_expr("\\old(psi1() && !psi1p())")
    b = parse_expr("\\old(psi1()) && !\\old(psi1p())")
    assert equivalent(a, b, "C", law1, state="post")


def test_cast_and_implicit_receiver_normalize(law1):
    assert normalize_atom(parse_expr("((C) this).psiInv()")) == normalize_atom(parse_expr("psiInv()"))
    assert normalize_atom(parse_expr("x"), ["x"]) == parse_expr("x")


def test_atom_cap():
    pred = parse_expr(" && ".join(f"p{i}()" for i in range(5)))
    table = AtomTable()
    f = abstract(pred, "Object", None, (), table)
    with pytest.raises(AtomCapExceeded):
        compare(f, ("const", True), table, atom_cap=4)
    assert compare(f, f, table, atom_cap=5) is None


def test_identical_programs_are_equivalent():
    p = parse_file(CORPUS / "integers.mjml")
    report = check_law_equivalence(p, p)
    assert report.equivalent
    assert report.to_text().endswith("EQUIVALENT\n")


def test_mutated_law3_rhs_has_counterexample():
    before = parse_file(CORPUS / "law3_schematic.mjml")
    after = apply_law(before, L3, "->", {"B": "B", "C": "C", "m": "m"})
    meth = after["B"].method("m")
    mutated = after.replace_class(after["B"].replace_method("m", replace(meth, spec_cases=meth.spec_cases[:2])))
    report = check_law_equivalence(before, mutated, ["B", "C"])
    assert not report.equivalent
    assert report.per_type["B"].methods["m"] == {"pre": True, "post": True}
    assert report.per_type["C"].methods["m"]["pre"] is False
    cex = report.counterexamples[0]
    assert (cex.type, cex.subject) == ("C", "m.pre")
    assert cex.assignment == {"this.psi1()": True, "this.psi1p()": False}
    assert (cex.before, cex.after) == (True, False)


def test_report_is_deterministic_and_serializable():
    before = parse_file(CORPUS / "law3_schematic.mjml")
    after = apply_law(before, L3, "->", {"B": "B", "C": "C", "m": "m"})
    meth = after["B"].method("m")
    mutated = after.replace_class(after["B"].replace_method("m", replace(meth, spec_cases=meth.spec_cases[1:])))
    r1 = check_law_equivalence(before, mutated)
    r2 = check_law_equivalence(before, mutated)
    assert r1.to_json() == r2.to_json()
    data = r1.to_dict()
    assert data["equivalent"] is False
    assert set(data["types"]) == {"A", "B", "C", "D", "E", "Main"}
    assert all(c["assignment"] for c in data["counterexamples"])
    assert isinstance(r1, EquivalenceReport)


# ------------------------------------------------------------ independent cross-checks

ATOMS = ["p0", "p1", "p2"]


def random_pred(r: random.Random, depth: int, post: bool):
    if depth == 0 or r.random() < 0.3:
        k = r.randrange(5)
        if k == 0:
            return BoolLit(r.random() < 0.5)
        if k == 1:
            return InstanceOf(This(), r.choice(["A", "B", "C"]))
        atom = Call(None, r.choice(ATOMS))
        return Old(atom) if post and r.random() < 0.4 else atom
    k = r.randrange(4)
    if k == 0:
        return Unary("!", random_pred(r, depth - 1, post))
    return Binary(r.choice(["&&", "||", "==>"]), random_pred(r, depth - 1, post), random_pred(r, depth - 1, post))


HIERARCHY = parse(
    "class A { public /*@ pure @*/ boolean p0() { return true; }\n"
    " public /*@ pure @*/ boolean p1() { return true; }\n"
    " public /*@ pure @*/ boolean p2() { return true; } }\n"
    "class B extends A { }\nclass C extends B { }\n"
    "public class Main { public static void main(String[] args) { } }\n"
)


def to_sympy(e, exact, st="cur"):
    """Straight recursive translation; shares nothing with the enumeration path."""
    if isinstance(e, BoolLit):
        return sympy.true if e.value else sympy.false
    if isinstance(e, Unary):
        return sympy.Not(to_sympy(e.operand, exact, st))
    if isinstance(e, Binary):
        a, b = to_sympy(e.left, exact, st), to_sympy(e.right, exact, st)
        return {"&&": sympy.And, "||": sympy.Or, "==>": sympy.Implies}[e.op](a, b)
    if isinstance(e, Old):
        return to_sympy(e.expr, exact, "pre" if st == "post" else st)
    if isinstance(e, InstanceOf):
        return sympy.true if subtype_of(HIERARCHY, exact, e.cls) else sympy.false
    return sympy.Symbol(f"{st}_{e.name}")


@pytest.mark.parametrize("seed", range(60))
def test_enumeration_agrees_with_sympy(seed):
    r = random.Random(seed)
    post = seed % 2 == 1
    state = "post" if post else "cur"
    a, b = random_pred(r, 3, post), random_pred(r, 3, post)
    exact = r.choice(["A", "B", "C"])
    expected = not satisfiable(sympy.Xor(to_sympy(a, exact, state), to_sympy(b, exact, state)))
    assert equivalent(a, b, exact, HIERARCHY, state=state) == expected

    table = AtomTable()
    diff = compare(abstract(a, exact, HIERARCHY, (), table, state),
                   abstract(b, exact, HIERARCHY, (), table, state), table)
    assert (diff is None) == expected
    if diff is not None:
        # replay the counterexample by direct evaluation
        assignment, before, after = diff
        valuation = {key: assignment.get(table.label(i), False) for i, key in enumerate(table.keys)}
        assert evaluate_predicate(a, exact, HIERARCHY, valuation, (), state) == before
        assert evaluate_predicate(b, exact, HIERARCHY, valuation, (), state) == after
