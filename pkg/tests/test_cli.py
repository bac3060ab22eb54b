import json
import subprocess
import sys
from pathlib import Path

import pytest

from lawful import parse, parse_file
from lawful.cli import main
from lawful.diff import diff_programs, format_diff
from lawful.laws import apply_law
from lawful.scripts import ScriptError, StepFailure, parse_binding_text, parse_script, run_script

ROOT = Path(__file__).resolve().parents[1]
CORPUS = ROOT / "corpus"
RECIPE = ROOT / "recipes" / "extract_superclass.script"


# ------------------------------------------------------------ binding and script formats


def test_binding_text_keeps_anchors():
    text = "# comment\nB = IntegerData\n  a = PositiveIntegerData#value\npred = x > 0 # not a comment\n"
    assert parse_binding_text(text) == {
        "B": "IntegerData",
        "a": "PositiveIntegerData#value",
        "pred": "x > 0 # not a comment",
    }


@pytest.mark.parametrize(
    "text, message",
    [
        ("B = 1\nB = 2\n", "line 2: duplicate key 'B'"),
        ("just words\n", "line 1: expected 'key = value'"),
    ],
)
def test_binding_text_errors(text, message):
    with pytest.raises(ScriptError, match=message):
        parse_binding_text(text)


def test_script_parsing():
    steps = parse_script(RECIPE.read_text())
    assert len(steps) == 24
    assert steps[0].law_id == "class-elimination" and steps[0].direction == "<-"
    assert steps[7].binding == {"B": "IntegerData", "a": "PositiveIntegerData#value"}


@pytest.mark.parametrize(
    "text, message",
    [
        ("  B = 1\n", "line 1: binding line before the first step"),
        ("step nolaw ->\n", "unknown law 'nolaw'"),
        ("step law1-move-invariant sideways\n", "line 1"),
        ("stop law1-move-invariant ->\n", "expected 'step <law-id> <direction>'"),
    ],
)
def test_script_errors(text, message):
    with pytest.raises(ScriptError, match=message):
        parse_script(text)


def test_failing_step_is_identified():
    steps = parse_script(RECIPE.read_text())
    broken = steps[:7] + steps[8:]  # skip the Law 2 step
    with pytest.raises(StepFailure) as info:
        run_script(parse_file(CORPUS / "integers.mjml"), broken)
    assert (info.value.step.index, info.value.step.law_id) == (10, "merge-attribute-into-inherited")


def test_verified_script_records_oracle_runs():
    result = run_script(parse_file(CORPUS / "integers.mjml"), parse_script(RECIPE.read_text()), verify=True)
    labels = [label for label, _ in result.verified]
    assert labels == [
        "step 12 (law3-move-redefined-method)",
        "step 18 (law1-move-invariant)",
        "step 21 (law1-move-invariant)",
        "whole script",
    ]
    assert all(r.equivalent for _, r in result.verified)


# ------------------------------------------------------------ diff


def test_diff_of_law2():
    p = parse(
        "class B { }\nclass C extends B { /*@ nullable @*/ Integer a; }\n"
        "public class Main { public static void main(String[] args) { } }\n"
    )
    q = apply_law(p, "law2-move-ref-attribute", "->", {"B": "B", "C": "C", "a": "a"})
    assert diff_programs(p, p) == []
    assert format_diff(diff_programs(p, q)) == (
        "+ attribute B.a: /*@ nullable @*/ Integer a;\n"
        "- attribute C.a: /*@ nullable @*/ Integer a;\n"
    )


# ------------------------------------------------------------ command line


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_check_reports_every_file(capsys):
    code, out, err = run(capsys, "check", str(CORPUS / "integers.mjml"), str(CORPUS / "bad_uncast_this.mjml"),
                         str(CORPUS / "law1_schematic.mjml"))
    assert code == 4
    assert out.count(": ok") == 2
    assert "cannot resolve field 'v' in 'B'" in err


def test_check_exit_codes(capsys, tmp_path):
    broken = tmp_path / "broken.mjml"
    broken.write_text("class A { int x }")
    assert run(capsys, "check", str(broken))[0] == 3
    assert run(capsys, "check", str(tmp_path / "missing.mjml"))[0] == 8
    assert run(capsys, "frobnicate")[0] == 2


def test_apply_writes_output(capsys, tmp_path):
    out = tmp_path / "out.mjml"
    code, _, _ = run(capsys, "apply", str(CORPUS / "law3_schematic.mjml"), "law3-move-redefined-method", "->",
                     str(ROOT / "recipes" / "law3_schematic.binding"), "--out", str(out))
    assert code == 0
    assert parse_file(out)["C"].method("m") is None


def test_apply_exit_codes(capsys):
    prim = str(CORPUS / "provisos" / "law2_primitive.mjml")
    law2 = "law2-move-ref-attribute"
    code, _, err = run(capsys, "apply", prim, law2, "forward", "--set", "B=B", "--set", "a=C#a")
    assert code == 6 and "[FAIL] (<->) T is not a primitive type" in err
    assert run(capsys, "apply", prim, law2, "->", "--set", "B=B")[0] == 9
    assert run(capsys, "apply", prim, law2, "->", "--set", "B=C", "--set", "a=C#a")[0] == 5
    assert run(capsys, "apply", prim, law2, "->", "--set", "nonsense")[0] == 2


def test_report_only_structured(capsys):
    code, out, _ = run(capsys, "apply", str(CORPUS / "provisos" / "law2_primitive.mjml"), "law2-move-ref-attribute",
                       "fwd", "--set", "B=B", "--set", "a=C#a", "--report-only", "--format", "structured")
    data = json.loads(out)
    assert code == 6
    assert data["passed"] is False
    assert [c["name"] for c in data["checks"] if not c["passed"]] == ["T is not a primitive type"]


def test_force_bypasses_provisos(capsys):
    path = str(CORPUS / "provisos" / "law2_declared_in_b.mjml")
    code, out, _ = run(capsys, "apply", path, "law2-move-ref-attribute", "->", "--set", "B=B", "--set", "a=C#a",
                       "--force")
    assert code == 0 and out.count("Integer a;") == 2


def test_script_and_verify(capsys, tmp_path):
    out = tmp_path / "final.mjml"
    code, _, err = run(capsys, "script", str(RECIPE), str(CORPUS / "integers.mjml"), "--verify", "--out", str(out))
    assert code == 0
    assert "verified whole script: equivalent" in err
    code, text, _ = run(capsys, "verify", str(CORPUS / "integers.mjml"), str(out))
    assert code == 0 and text.endswith("EQUIVALENT\n")


def test_verify_structured_and_inequivalent(capsys):
    code, out, _ = run(capsys, "verify", str(CORPUS / "law1_schematic.mjml"), str(CORPUS / "law3_schematic.mjml"),
                       "--format", "structured")
    assert code == 7
    assert json.loads(out)["equivalent"] is False
    assert run(capsys, "verify", str(CORPUS / "law1_schematic.mjml"), str(CORPUS / "law1_schematic.mjml"),
               "--scope", "A,Nope")[0] == 2


def test_atom_cap_is_enforced(capsys):
    a = str(CORPUS / "law3_schematic.mjml")
    assert run(capsys, "verify", a, a, "--atom-cap", "1")[0] == 10


def test_laws_listing(capsys):
    code, out, _ = run(capsys, "laws", "--format", "structured")
    assert code == 0
    ids = [law["id"] for law in json.loads(out)]
    assert "law3-move-redefined-method" in ids
    code, out, _ = run(capsys, "laws", "law2-move-ref-attribute")
    assert "binding: B, C, a" in out
    assert run(capsys, "laws", "law99")[0] == 9


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "lawful.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("lawful ")
