"""Binding files and derivation scripts.

A binding file holds `key = value` lines. A script is a sequence of
`step <law-id> <direction>` headers, each followed by indented binding
lines. A line whose first non-blank character is `#` is a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .laws import LawError, apply_law, get_law, normalize_direction
from .laws.core import MoveInvariant, MoveRedefinedMethod
from .nodes import Program
from .oracle import DEFAULT_ATOM_CAP, EquivalenceReport, check_law_equivalence

_PAIR = re.compile(r"^\s*(\w+)\s*=\s*(.*?)\s*$")
_STEP = re.compile(r"^step\s+(\S+)\s+(\S+)\s*$")


class ScriptError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _strip_comment(line: str) -> str:
    # whole-line comments only: '#' also separates class and member in anchors
    return "" if line.lstrip().startswith("#") else line.rstrip()


def parse_binding_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        m = _PAIR.match(line)
        if m is None:
            raise ScriptError(n, f"expected 'key = value', got '{raw.strip()}'")
        key, value = m.groups()
        if key in out:
            raise ScriptError(n, f"duplicate key '{key}'")
        out[key] = value
    return out


@dataclass(frozen=True)
class Step:
    index: int
    law_id: str
    direction: str
    binding: dict = field(hash=False)
    line: int = 0

    def __str__(self) -> str:
        args = ", ".join(f"{k}={v}" for k, v in self.binding.items())
        return f"step {self.index} {self.law_id} {self.direction} ({args})"


def parse_script(text: str) -> list[Step]:
    steps: list[Step] = []
    current: Optional[dict] = None
    for n, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        if not line[0].isspace():
            m = _STEP.match(line)
            if m is None:
                raise ScriptError(n, f"expected 'step <law-id> <direction>', got '{line.strip()}'")
            law_id, arrow = m.groups()
            try:
                get_law(law_id)
                direction = normalize_direction(arrow)
            except LawError as exc:
                raise ScriptError(n, str(exc)) from None
            current = {}
            steps.append(Step(len(steps) + 1, law_id, direction, current, n))
            continue
        if current is None:
            raise ScriptError(n, "binding line before the first step")
        m = _PAIR.match(line)
        if m is None:
            raise ScriptError(n, f"expected 'key = value', got '{line.strip()}'")
        key, value = m.groups()
        if key in current:
            raise ScriptError(n, f"duplicate key '{key}'")
        current[key] = value
    return steps


class StepFailure(Exception):
    def __init__(self, step: Step, cause: Exception):
        super().__init__(f"{step}: {cause}")
        self.step = step
        self.cause = cause


class VerificationFailure(Exception):
    def __init__(self, label: str, report: EquivalenceReport):
        super().__init__(f"{label}: contracts differ")
        self.label = label
        self.report = report


@dataclass
class ScriptResult:
    program: Program
    verified: list[tuple[str, EquivalenceReport]] = field(default_factory=list)


_ORACLE_LAWS = (MoveInvariant, MoveRedefinedMethod)


def run_script(program: Program, steps: list[Step], verify: bool = False,
               atom_cap: int = DEFAULT_ATOM_CAP) -> ScriptResult:
    """Apply the steps in order, stopping at the first failing one."""
    result = ScriptResult(program)
    current = program
    for step in steps:
        try:
            after = apply_law(current, step.law_id, step.direction, step.binding)
        except LawError as exc:
            raise StepFailure(step, exc) from exc
        if verify and isinstance(get_law(step.law_id), _ORACLE_LAWS):
            _verify(result, f"step {step.index} ({step.law_id})", current, after, atom_cap)
        current = after
    if verify and steps:
        _verify(result, "whole script", program, current, atom_cap)
    result.program = current
    return result


def _verify(result, label, before, after, atom_cap):
    report = check_law_equivalence(before, after, atom_cap=atom_cap)
    result.verified.append((label, report))
    if not report.equivalent:
        raise VerificationFailure(label, report)
