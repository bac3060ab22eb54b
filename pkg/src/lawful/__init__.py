"""Refactoring laws for a small Java+JML language, with an equivalence oracle."""

from .nodes import Program
from .parser import parse, parse_file, parse_unchecked
from .printer import pretty_print

__version__ = "0.1.0"

__all__ = ["Program", "parse", "parse_file", "parse_unchecked", "pretty_print", "__version__"]
