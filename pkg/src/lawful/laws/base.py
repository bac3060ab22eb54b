"""Law, binding and proviso-report types shared by the whole catalogue."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Iterable, Mapping, Optional

from ..check import Access, Analyzer, Location, analyze
from ..hierarchy import BUILTINS, lookup_field, subclasses, subtype_of, supers
from ..lexer import FrontendError
from ..nodes import (
    Call,
    ClassDecl,
    Expr,
    FieldAccess,
    Name,
    New,
    Program,
    Visibility,
)
from ..parser import parse_expr
from ..printer import expr_str
from ..queries import UncastThis, occurs_in, rewrite, walk

FORWARD = "->"
BACKWARD = "<-"
BOTH = "<->"

_ARROWS = {"->": FORWARD, "→": FORWARD, "<-": BACKWARD, "←": BACKWARD}


def normalize_direction(text: str) -> str:
    try:
        return _ARROWS[text.strip()]
    except KeyError:
        raise BindingError(f"unknown direction '{text}' (use -> or <-)") from None


class LawError(Exception):
    pass


class BindingError(LawError):
    """The binding is incomplete or names something that does not exist."""


class SchemaMismatch(LawError):
    """The program does not have the shape of the law's source side."""


class ProvisoFailure(LawError):
    def __init__(self, report: "ProvisoReport"):
        super().__init__(report.summary())
        self.report = report


class IllFormedResult(LawError):
    """A checked application produced an ill-formed program (a catalogue bug)."""

    def __init__(self, law_id: str, diagnostics):
        self.diagnostics = list(diagnostics)
        text = "; ".join(d.message for d in self.diagnostics[:3])
        super().__init__(f"{law_id} produced an ill-formed program: {text}")


# ------------------------------------------------------------------ bindings

CLASS, MEMBER, PRED, INT, NAME, VIS, FLAG = "class", "member", "pred", "int", "name", "vis", "flag"


@dataclass(frozen=True)
class Param:
    key: str
    kind: str
    doc: str = ""
    default: Optional[str] = None
    owner: Optional[str] = None  # class key that a member anchor may fill in

    @property
    def required(self) -> bool:
        return self.default is None


@dataclass(frozen=True)
class Binding:
    classes: Mapping[str, str] = field(default_factory=dict)
    members: Mapping[str, str] = field(default_factory=dict)
    preds: Mapping[str, Expr] = field(default_factory=dict)
    options: Mapping[str, object] = field(default_factory=dict)

    def __getitem__(self, key: str):
        for table in (self.classes, self.members, self.preds, self.options):
            if key in table:
                return table[key]
        raise KeyError(key)

    def get(self, key: str, default=None):
        try:
            return self[key]
        except KeyError:
            return default

    def as_text(self) -> dict[str, str]:
        out: dict[str, str] = dict(self.classes)
        out.update(self.members)
        for k, v in self.options.items():
            if isinstance(v, Visibility):
                out[k] = v.name.lower()
            elif isinstance(v, bool):
                out[k] = "true" if v else "false"
            else:
                out[k] = str(v)
        out.update({k: expr_str(v) for k, v in self.preds.items()})
        return out

    @classmethod
    def parse(cls, law: "Law", raw: Mapping[str, str]) -> "Binding":
        """Interpret raw `key = value` text against the law's parameter kinds."""
        known = {p.key: p for p in law.params}
        extra = sorted(set(raw) - set(known))
        if extra:
            raise BindingError(f"{law.id}: unknown binding key(s): {', '.join(extra)}")
        raw = {**{p.key: p.default for p in law.params if not p.required}, **raw}
        classes: dict[str, str] = {}
        members: dict[str, str] = {}
        preds: dict[str, Expr] = {}
        options: dict[str, object] = {}
        for p in law.params:
            if p.key not in raw:
                continue
            value = str(raw[p.key]).strip()
            if p.kind == CLASS:
                classes[p.key] = value
            elif p.kind == MEMBER:
                owner, _, member = value.rpartition("#")
                if owner and p.owner:
                    given = raw.get(p.owner)
                    if given is not None and given.strip() != owner:
                        raise BindingError(
                            f"{law.id}: anchor '{value}' disagrees with {p.owner} = {given.strip()}"
                        )
                    classes.setdefault(p.owner, owner)
                members[p.key] = member
            elif p.kind == PRED:
                try:
                    preds[p.key] = parse_expr(value)
                except FrontendError as exc:
                    raise BindingError(f"{law.id}: cannot parse predicate '{p.key}': {exc}") from None
            elif p.kind == INT:
                try:
                    options[p.key] = int(value)
                except ValueError:
                    raise BindingError(f"{law.id}: '{p.key}' must be an integer") from None
            elif p.kind == VIS:
                try:
                    options[p.key] = Visibility.parse(value)
                except KeyError:
                    raise BindingError(f"{law.id}: '{value}' is not a visibility") from None
            elif p.kind == FLAG:
                if value.lower() not in ("true", "false", "yes", "no", "1", "0"):
                    raise BindingError(f"{law.id}: '{p.key}' must be true or false")
                options[p.key] = value.lower() in ("true", "yes", "1")
            else:
                options[p.key] = value
        b = cls(classes, members, preds, options)
        missing = [p.key for p in law.params if p.required and b.get(p.key) is None]
        if missing:
            raise BindingError(f"{law.id}: binding is missing {', '.join(missing)}")
        return b

    def complete(self, law: "Law") -> "Binding":
        """Fill defaults and re-validate a programmatically built binding."""
        return Binding.parse(law, self.as_text())


# ------------------------------------------------------------------ reports


@dataclass(frozen=True)
class Check:
    name: str
    tag: str
    passed: bool
    locations: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {"name": self.name, "direction": self.tag, "passed": self.passed,
                "locations": list(self.locations)}


@dataclass(frozen=True)
class ProvisoReport:
    law_id: str
    direction: str
    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def summary(self) -> str:
        bad = self.failures
        if not bad:
            return f"{self.law_id} {self.direction}: all provisos hold"
        return f"{self.law_id} {self.direction}: proviso failed: " + "; ".join(c.name for c in bad)

    def to_text(self) -> str:
        lines = [f"law {self.law_id} {self.direction}"]
        for c in self.checks:
            mark = "pass" if c.passed else "FAIL"
            lines.append(f"  [{mark}] ({c.tag}) {c.name}")
            lines.extend(f"      at {loc}" for loc in c.locations)
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"law": self.law_id, "direction": self.direction, "passed": self.passed,
                "checks": [c.to_dict() for c in self.checks]}


# ------------------------------------------------------------------ matching


@dataclass
class Match:
    """A program matched against one side of a law, plus the extracted parts."""

    law: "Law"
    program: Program
    direction: str
    binding: Binding
    parts: dict = field(default_factory=dict)

    def __getattr__(self, key):
        parts = self.__dict__.get("parts", {})
        if key in parts:
            return parts[key]
        raise AttributeError(key)

    @cached_property
    def analysis(self) -> Analyzer:
        return analyze(self.program)

    @cached_property
    def result(self) -> Program:
        """The rewritten program; semantic provisos inspect it before it is returned."""
        return self.law.rewrite(self)

    def accesses_within(self, tree) -> list[Access]:
        ids = {id(node) for _, node, _ in walk(tree)}
        return [a for a in self.analysis.accesses if id(a.node) in ids]


@dataclass(frozen=True)
class Proviso:
    name: str
    tag: str
    check: Callable[[Match], Iterable[str]]  # yields offending locations
    reconstructed: bool = False


class Law:
    id: str = ""
    name: str = ""
    lhs: str = ""
    rhs: str = ""
    where: tuple[str, ...] = ()
    params: tuple[Param, ...] = ()
    directions: tuple[str, ...] = (FORWARD, BACKWARD)
    reconstructed = False

    def provisos(self) -> tuple[Proviso, ...]:
        return ()

    def match(self, program: Program, direction: str, b: Binding) -> Match:
        raise NotImplementedError

    def rewrite(self, m: Match) -> Program:
        raise NotImplementedError

    def provisos_for(self, direction: str) -> list[Proviso]:
        return [p for p in self.provisos() if p.tag in (direction, BOTH)]

    def describe(self) -> str:
        names = [f"({p.tag}) {p.name}" for p in self.provisos()]
        return "\n".join([f"{self.id}: {self.name}", f"  directions: {' '.join(self.directions)}"]
                         + [f"  proviso {n}" for n in names])


# ------------------------------------------------------------------ helpers


def get_class(program: Program, name: str, role: str) -> ClassDecl:
    if name in BUILTINS:
        raise SchemaMismatch(f"{role} '{name}' is a built-in class")
    cls = program.get(name)
    if cls is None:
        raise SchemaMismatch(f"{role} '{name}' is not declared")
    return cls


def require_direct_subclass(program: Program, c: str, b: str) -> None:
    cls = get_class(program, c, "class")
    get_class(program, b, "class")
    if cls.superclass != b:
        raise SchemaMismatch(f"'{c}' does not directly extend '{b}'")


def node_text(node) -> str:
    try:
        return expr_str(node)
    except TypeError:
        return type(node).__name__


def uncast_this(m: Match, tree, cls: str, label: str) -> list[str]:
    """Uncast uses of `this` in `tree`, a subtree of the matched program.

    Explicit `this` outside a cast counts, as does any receiver-less
    reference that resolves to a member declared in `cls` itself.
    """
    out = [f"{label}: {node_text(o.node)}" for o in occurs_in(tree, UncastThis())]
    out += [
        f"{label}: {node_text(a.node)}"
        for a in m.accesses_within(tree)
        if a.via == "implicit" and a.owner == cls
    ]
    return out


def ill_formed(m: Match) -> list[str]:
    from ..check import validate

    return [f"line {d.span.line}: {d.message}" if d.span else d.message for d in validate(m.result)]


def contracts_preserved(m: Match, cls: str, method: Optional[str] = None) -> list[str]:
    """Oracle comparison of the matched program and its rewrite.

    Compares extended invariants (or the extended spec of `method`) for every
    exact type in the semantic scope of `cls`.
    """
    from ..oracle import AtomCapExceeded, EquivalenceReport, check_type
    from ..specs import methods_of

    before, after = m.program, m.result
    report = EquivalenceReport()
    out = []
    for t in semantic_scope(before, cls):
        if t not in after:
            continue
        try:
            if method is None:
                check_type(before, after, t, report, methods=(), invariant=True)
            elif method in methods_of(before, t):
                check_type(before, after, t, report, methods=(method,), invariant=False)
        except AtomCapExceeded as exc:
            out.append(f"{t}: {exc}")
    for c in report.counterexamples:
        values = ", ".join(f"{k}={'T' if v else 'F'}" for k, v in c.assignment.items())
        out.append(f"{c.type} {c.subject}: differs when {values or 'always'}")
    return out


def instantiated_types(program: Program) -> set[str]:
    """Classes for which the program contains an instance creation."""
    found = set()
    for _, node, _ in _walk_program(program):
        if isinstance(node, New):
            found.add(node.cls)
    return found


def semantic_scope(program: Program, cls: str) -> list[str]:
    """Exact types whose contracts a semantic proviso must preserve.

    Instantiated subtypes of `cls`; every declared subtype when none is.
    """
    subs = subclasses(program, cls, proper=False)
    made = instantiated_types(program)
    scope = [t for t in subs if t in made]
    return scope or subs


def _roots(program: Program):
    for cls in program:
        for inv in cls.invariants:
            yield inv.pred
        for a in cls.attributes:
            if a.init is not None:
                yield a.init
        for c in cls.constructors:
            for case in c.spec_cases:
                yield case.pre
                yield case.post
            yield from c.body
        for meth in cls.methods:
            for case in meth.spec_cases:
                yield case.pre
                yield case.post
            yield from meth.body
        if cls.main is not None:
            yield from cls.main.body


def _walk_program(program: Program):
    for root in _roots(program):
        yield from walk(root)


def map_program(program: Program, fn) -> Program:
    """Apply `rewrite(..., fn)` to every expression and statement of the program."""

    def rw(node):
        return rewrite(node, fn)

    def body(stmts):
        return tuple(rw(s) for s in stmts)

    def cases(cs):
        return tuple(replace(c, pre=rw(c.pre), post=rw(c.post)) for c in cs)

    classes = []
    for cls in program:
        classes.append(
            replace(
                cls,
                invariants=tuple(replace(i, pred=rw(i.pred)) for i in cls.invariants),
                attributes=tuple(
                    replace(a, init=None if a.init is None else rw(a.init)) for a in cls.attributes
                ),
                constructors=tuple(
                    replace(c, spec_cases=cases(c.spec_cases), body=body(c.body))
                    for c in cls.constructors
                ),
                methods=tuple(
                    replace(mt, spec_cases=cases(mt.spec_cases), body=body(mt.body))
                    for mt in cls.methods
                ),
                main=None if cls.main is None else replace(cls.main, body=body(cls.main.body)),
            )
        )
    return replace(program, classes=tuple(classes))


def retarget(program: Program, accesses: Iterable[Access], new_name: str) -> Program:
    """Rename the member referenced by each of the given (resolved) accesses."""
    ids = {id(a.node) for a in accesses}

    def fn(original, rebuilt):
        if id(original) not in ids:
            return None
        if isinstance(rebuilt, (Name, FieldAccess, Call)):
            return replace(rebuilt, name=new_name)
        return None

    return map_program(program, fn)


def spec_visibility(program: Program, where: Location) -> Optional[Visibility]:
    """Visibility of the specification a location belongs to, if any."""
    if not where.in_spec:
        return None
    cls = program.get(where.cls)
    if cls is None:
        return None
    if where.part == "inv":
        idx = int(where.member.split("#")[1])
        return cls.invariants[idx].visibility
    if "#" in where.member:
        return cls.constructors[int(where.member.split("#")[1])].visibility
    meth = cls.method(where.member)
    return None if meth is None else meth.visibility


def declares_field(program: Program, cls: str, name: str) -> bool:
    c = program.get(cls)
    return c is not None and c.attribute(name) is not None


def field_owner(program: Program, cls: str, name: str) -> Optional[str]:
    found = lookup_field(program, cls, name)
    return None if found is None else found[0]


def strict_subtype(program: Program, d: str, b: str, c: str) -> bool:
    """D <= B and not D <= C."""
    return subtype_of(program, d, b) and not subtype_of(program, d, c)


__all__ = [
    "FORWARD", "BACKWARD", "BOTH", "normalize_direction", "LawError", "BindingError",
    "SchemaMismatch", "ProvisoFailure", "IllFormedResult", "Param", "Binding", "Check",
    "ProvisoReport", "Match", "Proviso", "Law", "supers",
]
