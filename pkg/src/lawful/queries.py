"""Structural queries over expression and statement trees."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import Callable, Iterator, Optional

from .nodes import (
    Call,
    Cast,
    Expr,
    FieldAccess,
    If,
    MetaVar,
    Stmt,
    Super,
    This,
)

Path = tuple[int, ...]


def children(node) -> list:
    """Direct Expr/Stmt children of a node, in field order."""
    out = []
    for f in fields(node):
        if f.name == "span":
            continue
        value = getattr(node, f.name)
        if isinstance(value, (Expr, Stmt)):
            out.append(value)
        elif isinstance(value, tuple):
            out.extend(v for v in value if isinstance(v, (Expr, Stmt)))
    return out


def walk(node, path: Path = (), parent=None) -> Iterator[tuple[Path, object, object]]:
    """Pre-order traversal yielding (path, node, parent)."""
    yield path, node, parent
    for i, child in enumerate(children(node)):
        yield from walk(child, path + (i,), node)


def walk_body(body) -> Iterator[tuple[Path, object, object]]:
    for i, stmt in enumerate(body):
        yield from walk(stmt, (i,), None)


def transform(node, fn: Callable):
    """Bottom-up rebuild: children first, then `fn` on the rebuilt node.

    `fn` returns a replacement node or None to keep the node as is.
    """
    return rewrite(node, lambda original, rebuilt: fn(rebuilt))


def rewrite(node, fn: Callable):
    """Like transform, but `fn(original, rebuilt)` also sees the node as it was.

    Lets callers key edits on the identity of nodes recorded by an earlier
    analysis pass.
    """
    changes = {}
    for f in fields(node):
        if f.name == "span":
            continue
        value = getattr(node, f.name)
        if isinstance(value, (Expr, Stmt)):
            new = rewrite(value, fn)
            if new is not value:
                changes[f.name] = new
        elif isinstance(value, tuple) and any(isinstance(v, (Expr, Stmt)) for v in value):
            new_items = tuple(
                rewrite(v, fn) if isinstance(v, (Expr, Stmt)) else v for v in value
            )
            if any(a is not b for a, b in zip(new_items, value)):
                changes[f.name] = new_items
    rebuilt = replace(node, **changes) if changes else node
    out = fn(node, rebuilt)
    return rebuilt if out is None else out


def transform_body(body, fn: Callable) -> tuple:
    return tuple(transform(s, fn) for s in body)


# ------------------------------------------------------------ occurrence scan


class OccurrencePattern:
    def matches(self, node, parent) -> bool:  # pragma: no cover - interface
        raise NotImplementedError


@dataclass(frozen=True)
class SuperRef(OccurrencePattern):
    def matches(self, node, parent) -> bool:
        return isinstance(node, Super)


@dataclass(frozen=True)
class UncastThis(OccurrencePattern):
    """A `this` that is not the immediate operand of a cast.

    The scrutinee of `this instanceof C` counts as uncast.
    """

    def matches(self, node, parent) -> bool:
        return isinstance(node, This) and not isinstance(parent, Cast)


@dataclass(frozen=True)
class FieldAccessOn(OccurrencePattern):
    """`e.name` where `e` is cast to `cls` (any receiver when cls is None)."""

    cls: Optional[str]
    name: str

    def matches(self, node, parent) -> bool:
        if not isinstance(node, FieldAccess) or node.name != self.name:
            return False
        if self.cls is None:
            return True
        return isinstance(node.target, Cast) and node.target.cls == self.cls


@dataclass(frozen=True)
class CastThisAccess(OccurrencePattern):
    """`((cls) this).member` or `((cls) this).member(...)`."""

    cls: str
    member: str

    def matches(self, node, parent) -> bool:
        if not isinstance(node, (FieldAccess, Call)) or node.name != self.member:
            return False
        t = node.target
        return isinstance(t, Cast) and t.cls == self.cls and isinstance(t.expr, This)


@dataclass(frozen=True)
class SuperCall(OccurrencePattern):
    name: Optional[str] = None

    def matches(self, node, parent) -> bool:
        return (
            isinstance(node, Call)
            and isinstance(node.target, Super)
            and (self.name is None or node.name == self.name)
        )


@dataclass(frozen=True)
class Occurrence:
    path: Path
    node: object


def occurs_in(tree, pattern: OccurrencePattern) -> list[Occurrence]:
    """Every subterm of `tree` (an Expr, Stmt or a statement tuple) matching `pattern`."""
    walker = walk_body(tree) if isinstance(tree, tuple) else walk(tree)
    return [Occurrence(path, node) for path, node, parent in walker if pattern.matches(node, parent)]


# ---------------------------------------------------------- schema plumbing


class UnmappedMetaVariable(KeyError):
    pass


def meta_vars(tree) -> set[str]:
    return {node.name for _, node, _ in walk(tree) if isinstance(node, MetaVar)}


def substitute(pred: Expr, mapping: dict[str, Expr]) -> Expr:
    """Replace every meta-variable by its image; the result has none left."""

    def step(node):
        if isinstance(node, MetaVar):
            if node.name not in mapping:
                raise UnmappedMetaVariable(node.name)
            return mapping[node.name]
        return None

    return transform(pred, step)


def match(pattern: Expr, term: Expr, binding: Optional[dict] = None) -> Optional[dict]:
    """Unify a schema against a concrete term; None when they do not match."""
    binding = dict(binding or {})
    if isinstance(pattern, MetaVar):
        bound = binding.get(pattern.name)
        if bound is None:
            binding[pattern.name] = term
            return binding
        return binding if bound == term else None
    if type(pattern) is not type(term):
        return None
    for f in fields(pattern):
        if f.name == "span":
            continue
        a, b = getattr(pattern, f.name), getattr(term, f.name)
        if isinstance(a, Expr):
            if not isinstance(b, Expr):
                return None
            binding = match(a, b, binding)
            if binding is None:
                return None
        elif isinstance(a, tuple):
            if not isinstance(b, tuple) or len(a) != len(b):
                return None
            for x, y in zip(a, b):
                if isinstance(x, Expr):
                    binding = match(x, y, binding)
                    if binding is None:
                        return None
                elif x != y:
                    return None
        elif a != b:
            return None
    return binding


def statements(body) -> Iterator[Stmt]:
    for stmt in body:
        yield stmt
        if isinstance(stmt, If):
            yield from statements(stmt.then)
            if stmt.orelse:
                yield from statements(stmt.orelse)
