"""The law catalogue and the checked application entry points."""

from __future__ import annotations

from typing import Mapping, Union

from ..check import validate
from ..hierarchy import subclasses
from ..nodes import Program
from .attributes import ATTRIBUTE_LAWS
from .base import (
    BACKWARD,
    BOTH,
    FORWARD,
    Binding,
    BindingError,
    Check,
    IllFormedResult,
    Law,
    LawError,
    Match,
    ProvisoFailure,
    ProvisoReport,
    SchemaMismatch,
    normalize_direction,
)
from .core import CORE_LAWS, MoveInvariant, MoveRedefinedMethod, MoveRefAttribute
from .methods import METHOD_LAWS

_CATALOGUE: tuple[Law, ...] = CORE_LAWS + ATTRIBUTE_LAWS + METHOD_LAWS
_BY_ID = {law.id: law for law in _CATALOGUE}
assert len(_BY_ID) == len(_CATALOGUE), "law ids must be unique"


def catalogue() -> list[Law]:
    return list(_CATALOGUE)


def get_law(law: Union[str, Law]) -> Law:
    if isinstance(law, Law):
        return law
    try:
        return _BY_ID[law]
    except KeyError:
        raise BindingError(f"unknown law '{law}'") from None


def _prepare(program, law, direction, binding):
    law = get_law(law)
    direction = normalize_direction(direction)
    if direction not in law.directions:
        raise BindingError(f"{law.id} cannot be applied in direction {direction}")
    if isinstance(binding, Binding):
        binding = binding.complete(law)
    else:
        binding = Binding.parse(law, binding)
    return law.match(program, direction, binding)


def _report(m: Match) -> ProvisoReport:
    checks = []
    for p in m.law.provisos_for(m.direction):
        locations = tuple(p.check(m))
        checks.append(Check(p.name, p.tag, not locations, locations))
    return ProvisoReport(m.law.id, m.direction, tuple(checks))


def check_provisos(program: Program, law, direction: str,
                   binding: Union[Binding, Mapping[str, str]]) -> ProvisoReport:
    """Evaluate every proviso tagged with `direction` or both directions.

    Raises BindingError or SchemaMismatch; never modifies the program.
    """
    return _report(_prepare(program, law, direction, binding))


def apply_law(program: Program, law, direction: str,
              binding: Union[Binding, Mapping[str, str]], force: bool = False) -> Program:
    """Rewrite `program` with one law.

    With `force`, provisos and the well-formedness assertion are skipped;
    this exists only to demonstrate why the provisos are needed.
    """
    m = _prepare(program, law, direction, binding)
    if force:
        return m.law.rewrite(m)
    report = _report(m)
    if not report.passed:
        raise ProvisoFailure(report)
    result = m.result
    errors = validate(result)
    if errors:
        raise IllFormedResult(m.law.id, errors)
    return result


def propose_bindings(program: Program, law) -> list[dict[str, str]]:
    """Bindings under which the program matches the source side of a core law.

    A convenience for exploring a program; nothing is applied.
    """
    law = get_law(law)
    out = []
    for cls in program:
        b = cls.superclass
        if b not in program:
            continue
        c = cls.name
        if isinstance(law, MoveInvariant):
            for i in range(len(cls.invariants)):
                out.append({"B": b, "C": c, "inv": str(i)})
        elif isinstance(law, MoveRefAttribute):
            out.extend({"B": b, "C": c, "a": a.name} for a in cls.attributes)
        elif isinstance(law, MoveRedefinedMethod):
            out.extend({"B": b, "C": c, "m": m.name} for m in cls.methods if program[b].method(m.name))
    viable = []
    for raw in out:
        try:
            _prepare(program, law, FORWARD, raw)
        except LawError:
            continue
        viable.append(raw)
    return viable


__all__ = [
    "FORWARD", "BACKWARD", "BOTH", "Binding", "BindingError", "Check", "IllFormedResult", "Law",
    "LawError", "ProvisoFailure", "ProvisoReport", "SchemaMismatch", "apply_law", "catalogue",
    "check_provisos", "get_law", "propose_bindings", "subclasses",
]
