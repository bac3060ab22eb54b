"""Acceptance criteria, one test each. Every test prints a PASS/FAIL line."""

from __future__ import annotations

import re
import time
from contextlib import contextmanager
from pathlib import Path

import pytest

from generators import ProgramGen, spec_program
from lawful import parse_file, parse_unchecked, pretty_print
from lawful.check import validate
from lawful.laws import apply_law, check_provisos, get_law
from lawful.nodes import Binary, BoolLit, Old
from lawful.oracle import AtomTable, abstract, check_law_equivalence, compare, formula_vars
from lawful.printer import expr_str, print_class
from lawful.scripts import parse_script, run_script
from lawful.specs import added_invariant, contributing_cases, extended_invariant, extended_spec, join_specs

ROOT = Path(__file__).resolve().parents[1]
CORPUS = ROOT / "corpus"
L1, L2, L3 = "law1-move-invariant", "law2-move-ref-attribute", "law3-move-redefined-method"


@pytest.fixture
def verdict(capsys):
    @contextmanager
    def run(label: str):
        start = time.perf_counter()
        try:
            yield
        except BaseException:
            with capsys.disabled():
                print(f"\nFAIL  {label} ({time.perf_counter() - start:.2f}s)")
            raise
        with capsys.disabled():
            print(f"\nPASS  {label} ({time.perf_counter() - start:.2f}s)")

    return run


def _ws(text: str) -> str:
    return re.sub(r"\s+", " ", text).strip()


# ---------------------------------------------------------------- criterion 1


def test_extract_superclass_recipe(verdict):
    with verdict("criterion 1: extract-superclass recipe reproduces the golden IntegerData"):
        source = parse_file(CORPUS / "integers.mjml")
        steps = parse_script((ROOT / "recipes" / "extract_superclass.script").read_text())
        start = time.perf_counter()
        result = run_script(source, steps).program
        elapsed = time.perf_counter() - start

        golden = (CORPUS / "golden" / "IntegerData.mjml").read_text()
        assert _ws(print_class(result["IntegerData"], result)) == _ws(golden)
        for name in ("PositiveIntegerData", "EvenIntegerData"):
            cls = result[name]
            assert cls.superclass == "IntegerData"
            assert cls.method("getValue") is None
            shared = [inv for inv in cls.invariants if _ws(expr_str(inv.pred)) == "value.intValue() > -1"]
            assert not shared, name
            assert not any(a.name == "value" for a in cls.attributes)
        assert validate(result) == []
        assert elapsed < 2.0, elapsed


# ---------------------------------------------------------------- criterion 2


def test_law1_proof_replay(verdict):
    with verdict("criterion 2: Law 1 replay, extended invariants equal for A, B, C, D"):
        before = parse_file(CORPUS / "law1_schematic.mjml")
        start = time.perf_counter()
        after = apply_law(before, L1, "->", {"B": "B", "C": "C"})
        report = check_law_equivalence(before, after, ["A", "B", "C", "D"])
        elapsed = time.perf_counter() - start

        assert report.equivalent, report.to_text()
        for t in "ABCD":
            assert report.per_type[t].invariant_equiv
            table = AtomTable()
            fa = abstract(extended_invariant(before, t), t, before, (), table)
            fb = abstract(extended_invariant(after, t), t, after, (), table)
            assert 2 ** len(formula_vars(fa) | formula_vars(fb)) <= 2 ** 6
        # the moved invariant now lives in B, guarded by the type test
        assert expr_str(after["B"].invariants[0].pred) == "psi1() && (this instanceof C ==> ((C) this).psiInv())"
        assert expr_str(after["C"].invariants[0].pred) == "psi1p()"
        assert elapsed < 1.0, elapsed


# ---------------------------------------------------------------- criterion 3


def test_law3_proof_replay(verdict):
    with verdict("criterion 3: Law 3 replay, extendedSpec(m) pre/post equal at B and C"):
        before = parse_file(CORPUS / "law3_schematic.mjml")
        start = time.perf_counter()
        after = apply_law(before, L3, "->", {"B": "B", "C": "C", "m": "m"})
        report = check_law_equivalence(before, after, ["B", "C"])
        elapsed = time.perf_counter() - start

        assert report.equivalent, report.to_text()
        for t in "BC":
            assert report.per_type[t].methods["m"] == {"pre": True, "post": True}
        assert len(after["B"].method("m").spec_cases) == 3
        assert after["C"].method("m") is None
        assert elapsed < 5.0, elapsed


# ---------------------------------------------------------------- criterion 4

NEGATIVE = [
    ("law1_super_in_psi2", L1, "->", {"B": "B", "C": "C"}, "super does not appear in psi2"),
    ("law1_uncast_this", L1, "->", {"B": "B", "C": "C"}, "psi2 has no uncast occurrences of this"),
    ("law2_primitive", L2, "->", {"B": "B", "C": "C", "a": "a"}, "T is not a primitive type"),
    ("law2_declared_in_b", L2, "->", {"B": "B", "C": "C", "a": "a"}, "a is not declared in ads"),
    ("law2_sibling_declares", L2, "->", {"B": "B", "C": "C", "a": "a"},
     "a is not declared by the subclasses of B"),
    ("law2_spec_use", L2, "<-", {"B": "B", "C": "C", "a": "a"},
     "D.a does not occur inside specifications (D <= B, D not <= C)"),
    ("law2_code_use", L2, "<-", {"B": "B", "C": "C", "a": "a"},
     "D.a does not occur in code (D <= B, D not <= C)"),
    ("law3_super_in_spec", L3, "->", {"B": "B", "C": "C", "m": "m"},
     "super does not appear in psi1' nor in psi2'"),
    ("law3_uncast_spec", L3, "->", {"B": "B", "C": "C", "m": "m"},
     "psi1' and psi2' have no uncast occurrences of this"),
    ("law3_super_in_body", L3, "->", {"B": "B", "C": "C", "m": "m"},
     "super and private attributes do not appear in mbody'"),
    ("law3_super_m_in_mds", L3, "->", {"B": "B", "C": "C", "m": "m"}, "super.m does not appear in mds'"),
    ("law3_uncast_body", L3, "->", {"B": "B", "C": "C", "m": "m"},
     "mbody' has no uncast this nor private ((C) this) members"),
    ("law3_declared_in_c", L3, "<-", {"B": "B", "C": "C", "m": "m"}, "m(pds) is not declared in mds'"),
]


def test_proviso_negative_suite(verdict):
    with verdict("criterion 4: each directed proviso of Laws 1-3 has a program failing exactly it"):
        covered = set()
        caught = []
        for name, law, direction, binding, check in NEGATIVE:
            program = parse_file(CORPUS / "provisos" / f"{name}.mjml")
            report = check_provisos(program, law, direction, binding)
            assert [c.name for c in report.failures] == [check], (name, report.to_text())
            covered.add((law, direction, check))

            forced = apply_law(program, law, direction, binding, force=True)
            if validate(forced):
                caught.append((name, "well-formedness"))
            elif not check_law_equivalence(program, forced).equivalent:
                caught.append((name, "oracle"))

        # a both-ways proviso is exercised in one direction only
        declared = {(law, p.name) for law in (L1, L2, L3) for p in get_law(law).provisos()}
        assert {(law, check) for law, _, check in covered} == declared
        assert len(covered) >= 10
        assert len(caught) >= 3, caught


# ---------------------------------------------------------------- criterion 5


def _implies(a, b, t, program, table_state="cur"):
    table = AtomTable()
    fa = abstract(a, t, program, (), table, table_state)
    fab = abstract(Binary("&&", a, b), t, program, (), table, table_state)
    return compare(fa, fab, table) is None


def _equiv(a, b, t, program, state):
    table = AtomTable()
    return compare(abstract(a, t, program, (), table, state), abstract(b, t, program, (), table, state), table) is None


def _same_spec(s1, s2, t, program):
    return _equiv(s1.pre, s2.pre, t, program, "cur") and _equiv(s1.post, s2.post, t, program, "post")


def _disjunction(preds):
    out = preds[0]
    for p in preds[1:]:
        out = Binary("||", out, p)
    return out


def test_spec_semantics_properties(verdict):
    with verdict("criterion 5: join/extendedSpec/extendedInvariant properties on 250 random tables"):
        start = time.perf_counter()
        checked = 0
        for seed in range(250):
            program = spec_program(seed)
            assert validate(program) == [], seed
            types = [c.name for c in program if c.name != "Main"]
            assert len(types) <= 4
            for t in types:
                cases = contributing_cases(program, t, "m")
                assert 1 <= len(cases)
                for a in cases:
                    for b in cases:
                        assert _same_spec(join_specs(a, b, t), join_specs(b, a, t), t, program), seed
                        for c in cases[:2]:
                            left = join_specs(join_specs(a, b, t), c, t)
                            right = join_specs(a, join_specs(b, c, t), t)
                            assert _same_spec(left, right, t, program), seed

                ext = extended_spec(program, t, "m")
                assert _equiv(ext.pre, _disjunction([c.pre for c in cases]), t, program, "cur"), seed
                for c in cases:
                    assert _implies(Binary("&&", Old(c.pre), ext.post), c.post, t, program, "post"), seed

                added = added_invariant(program, t) or BoolLit(True)
                assert _implies(extended_invariant(program, t), added, t, program), seed
                checked += 1
        elapsed = time.perf_counter() - start
        assert checked >= 200
        assert elapsed < 30.0, elapsed


# ---------------------------------------------------------------- criterion 6


def corpus_files():
    return sorted(p for p in CORPUS.rglob("*.mjml"))


def test_frontend_round_trip(verdict):
    with verdict("criterion 6: parse(print(p)) == p and print is idempotent, corpus + 200 generated"):
        files = corpus_files()
        assert len(files) >= 15
        assert {"positive_integer.mjml", "even_integer.mjml"} <= {f.name for f in files}
        for path in files:
            program = parse_unchecked(path.read_text())
            text = pretty_print(program)
            again = parse_unchecked(text)
            assert again == program, path
            assert pretty_print(again) == text, path
        for seed in range(200):
            program = ProgramGen(seed).program()
            text = pretty_print(program)
            again = parse_unchecked(text)
            assert again == program, seed
            assert pretty_print(again) == text, seed
