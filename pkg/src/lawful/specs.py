"""Specification inheritance: added and extended invariants and method specs.

Joins are folded root-first over the supertypes of a class, which keeps
results deterministic; the join is commutative and associative only up to
logical equivalence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .hierarchy import BUILTINS, ResolutionError, supers
from .nodes import (
    TRUE,
    Expr,
    Method,
    Old,
    Program,
    SpecCase,
    Visibility,
    conj,
    conj_all,
    disj,
    implies,
)

__all__ = [
    "supers",
    "join_specs",
    "added_invariant",
    "added_spec",
    "extended_invariant",
    "extended_spec",
    "methods_of",
    "ExtendedSpec",
    "UnknownMethod",
]


class UnknownMethod(LookupError):
    pass


@dataclass(frozen=True)
class ExtendedSpec:
    type: str
    method: str
    pre: Expr
    post: Expr
    contributions: tuple[tuple[str, SpecCase], ...] = ()


def join_specs(s1: SpecCase, s2: SpecCase, u: Optional[str] = None) -> SpecCase:
    """Join two specification cases for receiver type `u`.

    `s1` supplies the unprimed pair and `s2` the primed one:
    pre is `pre || pre'`, post is `(\\old(pre') ==> post') && (\\old(pre) ==> post)`.
    """
    pre = disj(s1.pre, s2.pre)
    post = conj(implies(Old(s2.pre), s2.post), implies(Old(s1.pre), s1.post))
    return SpecCase(pre, post)


def _inherited(owner: str, viewer: str, vis: Visibility) -> bool:
    return owner == viewer or vis is not Visibility.PRIVATE


def added_invariant(program: Program, u: str, viewer: Optional[str] = None) -> Optional[Expr]:
    """Conjunction of the invariants declared in `u` that `viewer` inherits.

    None when `u` contributes nothing.
    """
    viewer = viewer or u
    if u in BUILTINS:
        return None
    preds = [
        inv.pred for inv in program[u].invariants if _inherited(u, viewer, inv.visibility)
    ]
    return conj_all(preds) if preds else None


def extended_invariant(program: Program, t: str) -> Expr:
    """Root-first conjunction of every added invariant along supers(t)."""
    parts = [
        inv for u in reversed(supers(program, t)) if (inv := added_invariant(program, u, t)) is not None
    ]
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = conj(out, p)
    return out


def _declared(program: Program, u: str, m: str) -> Optional[Method]:
    if u in BUILTINS:
        return None
    return program[u].method(m)


def _overrides_something(program: Program, u: str, m: str) -> bool:
    for w in supers(program, u)[1:]:
        decl = _declared(program, w, m)
        if decl is not None and decl.visibility is not Visibility.PRIVATE:
            return True
    return False


def added_spec(program: Program, u: str, m: str, viewer: Optional[str] = None) -> Optional[SpecCase]:
    """Join of the spec cases `u` declares for `m`; None if `u` contributes nothing."""
    viewer = viewer or u
    decl = _declared(program, u, m)
    if decl is None or not _inherited(u, viewer, decl.visibility):
        return None
    if not decl.spec_cases:
        if _overrides_something(program, u, m):
            return None
        return SpecCase(TRUE, TRUE)
    out = decl.spec_cases[0]
    for case in decl.spec_cases[1:]:
        out = join_specs(out, case, u)
    return out


def methods_of(program: Program, t: str) -> list[str]:
    """Instance method names of supers(t) that `t` sees, in root-first order."""
    names: list[str] = []
    for u in reversed(supers(program, t)):
        if u in BUILTINS:
            continue
        for meth in program[u].methods:
            if _inherited(u, t, meth.visibility) and meth.name not in names:
                names.append(meth.name)
    return names


def extended_spec(program: Program, t: str, m: str) -> ExtendedSpec:
    contributions = []
    for u in reversed(supers(program, t)):
        spec = added_spec(program, u, m, t)
        if spec is not None:
            contributions.append((u, spec))
    if not contributions:
        if not any(_declared(program, u, m) for u in supers(program, t)):
            raise UnknownMethod(f"method '{m}' is not declared in supers({t})")
        # only unspecified overrides of a private or absent root: default spec
        return ExtendedSpec(t, m, TRUE, TRUE, ())
    acc = contributions[0][1]
    for _, spec in contributions[1:]:
        acc = join_specs(acc, spec, t)
    return ExtendedSpec(t, m, acc.pre, acc.post, tuple(contributions))


def contributing_cases(program: Program, t: str, m: str) -> list[SpecCase]:
    """Every individual spec case that feeds extended_spec(t, m)."""
    out = []
    for u, _ in extended_spec(program, t, m).contributions:
        decl = _declared(program, u, m)
        out.extend(decl.spec_cases or (SpecCase(TRUE, TRUE),))
    return out


def known_type(program: Program, t: str) -> bool:
    try:
        supers(program, t)
        return True
    except ResolutionError:
        return False
