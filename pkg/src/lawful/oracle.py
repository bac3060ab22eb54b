"""Brute-force equivalence oracle over a Boolean abstraction of contracts.

Every non-connective subterm of a predicate becomes a propositional atom,
except type tests on the receiver, which are fixed by the assumed exact
dynamic type. Equivalence is decided by enumerating all assignments.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .hierarchy import BUILTINS, ResolutionError, subtype_of, supers
from .nodes import (
    Binary,
    BoolLit,
    Call,
    Cast,
    Expr,
    FieldAccess,
    InstanceOf,
    Name,
    Old,
    Program,
    This,
    Unary,
)
from .printer import expr_str
from .queries import transform
from .specs import UnknownMethod, extended_invariant, extended_spec, methods_of

DEFAULT_ATOM_CAP = 16


class AtomCapExceeded(RuntimeError):
    """Raised instead of enumerating more than `cap` propositional variables."""


# Formulas are small tuples:
#   ("const", bool) | ("var", index) | ("not", f) | ("and"|"or"|"imp", f, g)
Formula = tuple

_CONNECTIVES = {"&&": "and", "||": "or", "==>": "imp"}


class AtomTable:
    """Propositional variables, keyed by (state, normalized atom).

    state is "cur" for single-state predicates, "pre" for atoms under
    `\\old` in a postcondition and "post" for the remaining post-state atoms.
    """

    def __init__(self) -> None:
        self.keys: list[tuple[str, Expr]] = []
        self._index: dict[tuple[str, Expr], int] = {}

    def var(self, state: str, atom: Expr) -> int:
        key = (state, atom)
        if key not in self._index:
            self._index[key] = len(self.keys)
            self.keys.append(key)
        return self._index[key]

    def label(self, i: int) -> str:
        state, atom = self.keys[i]
        text = expr_str(atom)
        return f"\\old({text})" if state == "pre" else text

    def __len__(self) -> int:
        return len(self.keys)


def normalize_atom(e: Expr, params: Iterable[str] = ()) -> Expr:
    """Make implicit receivers explicit and drop casts applied to `this`."""
    params = frozenset(params)

    def step(node):
        if isinstance(node, Cast) and isinstance(node.expr, This):
            return This()
        if isinstance(node, Name) and node.name not in params:
            return FieldAccess(This(), node.name)
        if isinstance(node, Call) and node.target is None:
            return Call(This(), node.name, node.args)
        return None

    return transform(e, step)


def _type_test(program: Program, exact: str, cls: str) -> bool:
    try:
        return subtype_of(program, exact, cls)
    except ResolutionError:
        return False


def abstract(
    pred: Expr,
    exact_type: str,
    hierarchy: Program,
    params: Iterable[str] = (),
    table: Optional[AtomTable] = None,
    state: str = "cur",
) -> Formula:
    """Boolean abstraction of `pred` for an object of exact type `exact_type`."""
    table = table if table is not None else AtomTable()
    params = tuple(params)

    def go(e: Expr, st: str) -> Formula:
        if isinstance(e, BoolLit):
            return ("const", e.value)
        if isinstance(e, Unary) and e.op == "!":
            return ("not", go(e.operand, st))
        if isinstance(e, Binary) and e.op in _CONNECTIVES:
            return (_CONNECTIVES[e.op], go(e.left, st), go(e.right, st))
        if isinstance(e, Old):
            return go(e.expr, "pre" if st in ("post", "pre") else st)
        if isinstance(e, InstanceOf):
            scrutinee = normalize_atom(e.expr, params)
            if isinstance(scrutinee, This):
                # dynamic type is immutable, so this holds under \old too
                return ("const", _type_test(hierarchy, exact_type, e.cls))
        return ("var", table.var(st, normalize_atom(e, params)))

    return go(pred, state)


def formula_vars(f: Formula) -> set[int]:
    if f[0] == "var":
        return {f[1]}
    if f[0] == "const":
        return set()
    return set().union(*(formula_vars(g) for g in f[1:]))


def evaluate(f: Formula, cols: dict[int, np.ndarray], rows: int) -> np.ndarray:
    tag = f[0]
    if tag == "const":
        return np.full(rows, f[1], dtype=bool)
    if tag == "var":
        return cols[f[1]]
    if tag == "not":
        return ~evaluate(f[1], cols, rows)
    a, b = evaluate(f[1], cols, rows), evaluate(f[2], cols, rows)
    if tag == "and":
        return a & b
    if tag == "or":
        return a | b
    return ~a | b  # imp


@dataclass(frozen=True)
class Counterexample:
    type: str
    subject: str
    assignment: dict
    before: Optional[bool]
    after: Optional[bool]

    def to_dict(self) -> dict:
        return {
            "type": self.type,
            "subject": self.subject,
            "assignment": self.assignment,
            "before": self.before,
            "after": self.after,
        }


def compare(
    fa: Formula, fb: Formula, table: AtomTable, atom_cap: int = DEFAULT_ATOM_CAP
) -> Optional[tuple[dict, bool, bool]]:
    """None when equivalent; else the first differing assignment.

    Assignments are enumerated lexicographically over atom index, false
    before true.
    """
    used = sorted(formula_vars(fa) | formula_vars(fb))
    n = len(used)
    if n > atom_cap:
        raise AtomCapExceeded(f"{n} atoms exceed the cap of {atom_cap}")
    rows = 1 << n
    idx = np.arange(rows, dtype=np.int64)
    cols = {v: ((idx >> (n - 1 - k)) & 1).astype(bool) for k, v in enumerate(used)}
    va, vb = evaluate(fa, cols, rows), evaluate(fb, cols, rows)
    diff = np.flatnonzero(va != vb)
    if diff.size == 0:
        return None
    r = int(diff[0])
    assignment = {table.label(v): bool(cols[v][r]) for v in used}
    return assignment, bool(va[r]), bool(vb[r])


def equivalent(a: Expr, b: Expr, exact_type: str, program: Program, params=(), atom_cap=DEFAULT_ATOM_CAP,
               state: str = "cur", program_b: Optional[Program] = None) -> bool:
    table = AtomTable()
    fa = abstract(a, exact_type, program, params, table, state)
    fb = abstract(b, exact_type, program_b or program, params, table, state)
    return compare(fa, fb, table, atom_cap) is None


@dataclass
class TypeReport:
    type: str
    invariant_equiv: bool = True
    methods: dict[str, dict[str, bool]] = field(default_factory=dict)

    @property
    def equivalent(self) -> bool:
        return self.invariant_equiv and all(
            v["pre"] and v["post"] for v in self.methods.values()
        )


@dataclass
class EquivalenceReport:
    per_type: dict[str, TypeReport] = field(default_factory=dict)
    counterexamples: list[Counterexample] = field(default_factory=list)

    @property
    def equivalent(self) -> bool:
        return all(t.equivalent for t in self.per_type.values())

    def to_dict(self) -> dict:
        return {
            "equivalent": self.equivalent,
            "types": {
                name: {
                    "invariant": t.invariant_equiv,
                    "methods": t.methods,
                }
                for name, t in self.per_type.items()
            },
            "counterexamples": [c.to_dict() for c in self.counterexamples],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)

    def to_text(self) -> str:
        lines = []
        for name, t in self.per_type.items():
            mark = "ok" if t.equivalent else "DIFFERS"
            lines.append(f"type {name}: {mark}")
            lines.append(f"  invariant: {'equivalent' if t.invariant_equiv else 'differs'}")
            for m, v in t.methods.items():
                pre = "equivalent" if v["pre"] else "differs"
                post = "equivalent" if v["post"] else "differs"
                lines.append(f"  method {m}: pre {pre}, post {post}")
        for c in self.counterexamples:
            values = ", ".join(f"{k}={'T' if v else 'F'}" for k, v in c.assignment.items())
            lines.append(
                f"counterexample [{c.type} {c.subject}]: {values or '(no atoms)'}"
                f" -> before={c.before} after={c.after}"
            )
        lines.append("EQUIVALENT" if self.equivalent else "NOT EQUIVALENT")
        return "\n".join(lines) + "\n"


def _params(program: Program, t: str, m: str) -> set[str]:
    out = set()
    for u in supers(program, t):
        if u in BUILTINS:
            continue
        decl = program[u].method(m)
        if decl is not None:
            out.update(p.name for p in decl.params)
    return out


def guarded_post(spec) -> Expr:
    """The postcondition as an obligation: `\\old(pre) ==> post`."""
    if isinstance(spec.pre, BoolLit) and spec.pre.value:
        return spec.post
    return Binary("==>", Old(spec.pre), spec.post)


def _compare_into(report, tr, subject, fa, fb, table, cap) -> bool:
    diff = compare(fa, fb, table, cap)
    if diff is None:
        return True
    assignment, before, after = diff
    report.counterexamples.append(Counterexample(tr.type, subject, assignment, before, after))
    return False


def check_type(before: Program, after: Program, t: str, report: EquivalenceReport,
               atom_cap: int = DEFAULT_ATOM_CAP, methods: Optional[Iterable[str]] = None,
               invariant: bool = True) -> TypeReport:
    tr = TypeReport(t)
    if invariant:
        table = AtomTable()
        fa = abstract(extended_invariant(before, t), t, before, (), table)
        fb = abstract(extended_invariant(after, t), t, after, (), table)
        tr.invariant_equiv = _compare_into(report, tr, "invariant", fa, fb, table, atom_cap)
    if methods is None:
        names = methods_of(before, t)
        names += [m for m in methods_of(after, t) if m not in names]
    else:
        names = list(methods)
    for m in names:
        try:
            sa = extended_spec(before, t, m)
            sb = extended_spec(after, t, m)
        except UnknownMethod:
            tr.methods[m] = {"pre": False, "post": False}
            report.counterexamples.append(Counterexample(t, f"{m} (declared on one side only)", {}, None, None))
            continue
        params = _params(before, t, m) | _params(after, t, m)
        table = AtomTable()
        pre_ok = _compare_into(
            report, tr, f"{m}.pre",
            abstract(sa.pre, t, before, params, table, "cur"),
            abstract(sb.pre, t, after, params, table, "cur"),
            table, atom_cap,
        )
        # a lone case keeps its raw post; guard it so both sides read as \old(pre) ==> post
        table = AtomTable()
        post_ok = _compare_into(
            report, tr, f"{m}.post",
            abstract(guarded_post(sa), t, before, params, table, "post"),
            abstract(guarded_post(sb), t, after, params, table, "post"),
            table, atom_cap,
        )
        tr.methods[m] = {"pre": pre_ok, "post": post_ok}
    report.per_type[t] = tr
    return tr


def check_law_equivalence(
    before: Program,
    after: Program,
    scope: Optional[Iterable[str]] = None,
    atom_cap: int = DEFAULT_ATOM_CAP,
) -> EquivalenceReport:
    """Compare extended invariants and specs per exact dynamic type.

    The default scope is every class declared in both programs.
    """
    if scope is None:
        scope = [c.name for c in before if c.name in after]
    report = EquivalenceReport()
    for t in scope:
        check_type(before, after, t, report, atom_cap)
    return report


def evaluate_predicate(pred: Expr, exact_type: str, program: Program, valuation: dict,
                       params: Iterable[str] = (), state: str = "cur") -> bool:
    """Direct recursive evaluation under an atom valuation keyed like AtomTable.

    An independent path used to re-check enumeration results.
    """
    params = tuple(params)

    def go(e: Expr, st: str) -> bool:
        if isinstance(e, BoolLit):
            return e.value
        if isinstance(e, Unary) and e.op == "!":
            return not go(e.operand, st)
        if isinstance(e, Binary) and e.op == "&&":
            return go(e.left, st) and go(e.right, st)
        if isinstance(e, Binary) and e.op == "||":
            return go(e.left, st) or go(e.right, st)
        if isinstance(e, Binary) and e.op == "==>":
            return (not go(e.left, st)) or go(e.right, st)
        if isinstance(e, Old):
            return go(e.expr, "pre" if st in ("post", "pre") else st)
        if isinstance(e, InstanceOf) and isinstance(normalize_atom(e.expr, params), This):
            return _type_test(program, exact_type, e.cls)
        return valuation[(st, normalize_atom(e, params))]

    return go(pred, state)
