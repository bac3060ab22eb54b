from pathlib import Path

import pytest

from lawful import parse, parse_file
from lawful.hierarchy import ResolutionError, supers
from lawful.nodes import SpecCase
from lawful.oracle import equivalent
from lawful.parser import parse_expr
from lawful.printer import expr_str
from lawful.specs import (
    UnknownMethod,
    added_invariant,
    added_spec,
    extended_invariant,
    extended_spec,
    join_specs,
    methods_of,
)

CORPUS = Path(__file__).resolve().parents[1] / "corpus"
MAIN = "public class Main { public static void main(String[] args) { } }\n"


@pytest.fixture(scope="module")
def law1():
    return parse_file(CORPUS / "law1_schematic.mjml")


def case(pre, post):
    return SpecCase(parse_expr(pre), parse_expr(post))


def test_supers_order(law1):
    assert supers(law1, "Object") == ["Object"]
    assert supers(law1, "C") == ["C", "B", "A", "Object"]
    with pytest.raises(ResolutionError):
        supers(law1, "Nope")


def test_join_shape():
    joined = join_specs(case("p1()", "p2()"), case("q1()", "q2()"), "B")
    assert expr_str(joined.pre) == "p1() || q1()"
    assert expr_str(joined.post) == "(\\old(q1()) ==> q2()) && (\\old(p1()) ==> p2())"


def test_join_with_default_is_neutral(law1):
    joined = join_specs(case("true", "true"), case("psi1()", "psi1p()"), "C")
    assert equivalent(joined.pre, parse_expr("true"), "C", law1)
    assert equivalent(joined.post, parse_expr("\\old(psi1()) ==> psi1p()"), "C", law1, state="post")


def test_extended_invariant_law1_lhs(law1):
    assert expr_str(extended_invariant(law1, "C")) == (
        "psi1() && (psi1p() && (this instanceof C ==> ((C) this).psiInv()))"
    )
    assert expr_str(extended_invariant(law1, "A")) == "true"


def test_private_invariants_are_not_inherited():
    p = parse(
        "class A { //@ private invariant true && false;\n //@ invariant true;\n}\n"
        "class B extends A { }\n" + MAIN
    )
    assert expr_str(added_invariant(p, "A")) == "true && false && true"
    assert expr_str(added_invariant(p, "A", viewer="B")) == "true"
    assert expr_str(extended_invariant(p, "B")) == "true"


SPECS = (
    "class A {\n"
    "  //@ requires x > 0;\n"
    "  //@ ensures \\result > 0;\n"
    "  public int m(int x) { return x; }\n"
    "  public int plain() { return 0; }\n"
    "  private int hidden() { return 0; }\n"
    "}\n"
    "class B extends A {\n"
    "  //@ also\n"
    "  //@ requires x < 0;\n"
    "  //@ ensures \\result < 0;\n"
    "  public int m(int x) { return x; }\n"
    "  public int plain() { return 1; }\n"
    "}\n" + MAIN
)


def test_added_spec_defaults():
    p = parse(SPECS)
    assert added_spec(p, "A", "plain") == SpecCase()
    # an unspecified override adds nothing
    assert added_spec(p, "B", "plain") is None
    assert added_spec(p, "B", "hidden") is None


def test_extended_spec_folds_root_first():
    p = parse(SPECS)
    ext = extended_spec(p, "B", "m")
    assert [u for u, _ in ext.contributions] == ["A", "B"]
    assert expr_str(ext.pre) == "x > 0 || x < 0"
    assert expr_str(ext.post) == "(\\old(x < 0) ==> \\result < 0) && (\\old(x > 0) ==> \\result > 0)"
    with pytest.raises(UnknownMethod):
        extended_spec(p, "B", "nothing")


def test_methods_of_hides_private_members_of_supertypes():
    p = parse(SPECS)
    assert methods_of(p, "A") == ["m", "plain", "hidden"]
    assert methods_of(p, "B") == ["m", "plain"]


def test_final_program_supers():
    from lawful.scripts import parse_script, run_script

    steps = parse_script((CORPUS.parent / "recipes" / "extract_superclass.script").read_text())
    result = run_script(parse_file(CORPUS / "integers.mjml"), steps).program
    assert supers(result, "PositiveIntegerData") == ["PositiveIntegerData", "IntegerData", "Object"]
