"""Structural member-level diff between two programs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .nodes import ClassDecl, Program
from .printer import attribute_line, class_lines, invariant_line


@dataclass(frozen=True)
class Change:
    kind: str  # added | removed | changed
    cls: str
    member: str  # "" for the class itself
    what: str  # class | superclass | attribute | invariant | constructor | method | main
    detail: str = ""

    def __str__(self) -> str:
        sign = {"added": "+", "removed": "-", "changed": "~"}[self.kind]
        where = self.cls if not self.member else f"{self.cls}.{self.member}"
        tail = f": {self.detail}" if self.detail else ""
        return f"{sign} {self.what} {where}{tail}"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "class": self.cls, "member": self.member,
                "what": self.what, "detail": self.detail}


def _method_text(cls: ClassDecl, name: str, program: Program) -> str:
    single = ClassDecl(cls.name, cls.superclass, methods=tuple(m for m in cls.methods if m.name == name))
    return "\n".join(class_lines(single, program)[1:-1])


def _members(cls: ClassDecl, program: Program) -> dict[tuple[str, str], str]:
    out: dict[tuple[str, str], str] = {}
    for i, inv in enumerate(cls.invariants):
        out[("invariant", f"invariant#{i}")] = invariant_line(inv)
    for a in cls.attributes:
        out[("attribute", a.name)] = attribute_line(a)
    for c in cls.constructors:
        single = ClassDecl(cls.name, constructors=(c,))
        out[("constructor", f"{cls.name}/{len(c.params)}")] = "\n".join(class_lines(single)[1:-1])
    for m in cls.methods:
        out[("method", m.name)] = _method_text(cls, m.name, program)
    if cls.main is not None:
        single = ClassDecl(cls.name, main=cls.main)
        out[("main", "main")] = "\n".join(class_lines(single)[1:-1])
    return out


def diff_programs(a: Program, b: Program) -> list[Change]:
    """Added, removed and changed members per class, in a stable order."""
    changes: list[Change] = []
    names = a.names + [n for n in b.names if n not in a]
    for name in names:
        ca: Optional[ClassDecl] = a.get(name)
        cb: Optional[ClassDecl] = b.get(name)
        if cb is None:
            changes.append(Change("removed", name, "", "class"))
            continue
        if ca is None:
            header = class_lines(cb, b)[0].rstrip(" {")
            changes.append(Change("added", name, "", "class", header))
            ca = ClassDecl(name, cb.superclass, public=cb.public)
        if ca.superclass != cb.superclass:
            changes.append(Change("changed", name, "", "superclass", f"{ca.superclass} -> {cb.superclass}"))
        if ca.public != cb.public:
            changes.append(Change("changed", name, "", "class", "public" if cb.public else "not public"))
        ma, mb = _members(ca, a), _members(cb, b)
        for key in list(ma) + [k for k in mb if k not in ma]:
            what, member = key
            if key not in mb:
                changes.append(Change("removed", name, member, what, ma[key].strip()))
            elif key not in ma:
                changes.append(Change("added", name, member, what, mb[key].strip()))
            elif ma[key] != mb[key]:
                changes.append(Change("changed", name, member, what, mb[key].strip()))
    return changes


def format_diff(changes: list[Change]) -> str:
    return "".join(f"{c}\n" for c in changes)
