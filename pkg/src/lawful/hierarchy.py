"""Class hierarchy queries: supertypes, subtyping and member lookup."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .nodes import Attribute, Method, Program, Visibility


class ResolutionError(LookupError):
    """Raised when a class name does not resolve, or the hierarchy is cyclic."""


@dataclass(frozen=True)
class BuiltinMethod:
    name: str
    param_types: tuple[str, ...]
    return_type: str
    pure: bool = True
    visibility: Visibility = Visibility.PUBLIC


@dataclass(frozen=True)
class BuiltinClass:
    name: str
    superclass: Optional[str]
    methods: tuple[BuiltinMethod, ...] = ()
    constructors: tuple[tuple[str, ...], ...] = ((),)

    def method(self, name: str) -> Optional[BuiltinMethod]:
        return next((m for m in self.methods if m.name == name), None)


# Object is the member-less root; Integer and String stand in for the
# wrapper/library types the worked example relies on.
BUILTINS: dict[str, BuiltinClass] = {
    "Object": BuiltinClass("Object", None),
    "Integer": BuiltinClass(
        "Integer",
        "Object",
        (
            BuiltinMethod("intValue", (), "int"),
            BuiltinMethod("equals", ("Object",), "boolean"),
        ),
        (("int",),),
    ),
    "String": BuiltinClass(
        "String", "Object", (BuiltinMethod("equals", ("Object",), "boolean"),)
    ),
}


def is_class(program: Program, name: str) -> bool:
    return name in BUILTINS or name in program


def superclass(program: Program, name: str) -> Optional[str]:
    if name in BUILTINS:
        return BUILTINS[name].superclass
    cls = program.get(name)
    if cls is None:
        raise ResolutionError(f"unknown class '{name}'")
    return cls.superclass


def supers(program: Program, t: str) -> list[str]:
    """All supertypes of `t`, from `t` itself up to Object inclusive."""
    out: list[str] = []
    current: Optional[str] = t
    while current is not None:
        if current in out:
            raise ResolutionError(f"cyclic inheritance involving '{current}'")
        out.append(current)
        current = superclass(program, current)
    return out


def subtype_of(program: Program, sub: str, sup: str) -> bool:
    if not is_class(program, sup):
        raise ResolutionError(f"unknown class '{sup}'")
    return sup in supers(program, sub)


def subclasses(program: Program, t: str, proper: bool = True) -> list[str]:
    """Declared classes below `t`, in declaration order."""
    out = []
    for cls in program:
        try:
            chain = supers(program, cls.name)
        except ResolutionError:
            continue
        if t in chain and (not proper or cls.name != t):
            out.append(cls.name)
    return out


def lookup_field(program: Program, cls: str, name: str) -> Optional[tuple[str, Attribute]]:
    """Find the attribute `name` visible from class `cls` by walking upward."""
    for owner in supers(program, cls):
        decl = program.get(owner)
        if decl is None:
            continue
        attr = decl.attribute(name)
        if attr is not None:
            return owner, attr
    return None


MethodLike = Union[Method, BuiltinMethod]


def lookup_method(program: Program, cls: str, name: str) -> Optional[tuple[str, MethodLike]]:
    for owner in supers(program, cls):
        if owner in BUILTINS:
            m = BUILTINS[owner].method(name)
        else:
            m = program[owner].method(name)
        if m is not None:
            return owner, m
    return None


def method_param_types(m: MethodLike) -> tuple[str, ...]:
    if isinstance(m, BuiltinMethod):
        return m.param_types
    return tuple(p.type.name for p in m.params)


def method_return_type(m: MethodLike) -> str:
    if isinstance(m, BuiltinMethod):
        return m.return_type
    return m.return_type.name if m.return_type else "void"
