"""Tokenizer. Annotation comments produce real tokens, bracketed by
ANNOT_OPEN / ANNOT_CLOSE, instead of being skipped as trivia."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .nodes import Span


class Diagnostic:
    __slots__ = ("severity", "message", "span")

    def __init__(self, severity: str, message: str, span: Span):
        self.severity = severity
        self.message = message
        self.span = span

    def __repr__(self) -> str:
        return f"Diagnostic({self.severity!r}, {self.message!r}, {self.span!r})"

    def format(self, origin: str = "<memory>") -> str:
        s = self.span
        return f"{origin}:{s.line}:{s.column}: {self.severity}: {self.message}"


class FrontendError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        super().__init__("; ".join(d.message for d in diagnostics))
        self.diagnostics = diagnostics


class ParseError(FrontendError):
    """Lexical or syntax error."""


KEYWORDS = frozenset(
    """class extends public private protected static void if else return new
    this super true false null instanceof int boolean""".split()
)
ANNOTATION_KEYWORDS = frozenset({"invariant", "requires", "ensures", "also", "pure", "nullable"})

# longest operators first
OPERATORS = [
    "==>", "==", "!=", "<=", ">=", "&&", "||",
    "+", "-", "*", "/", "%", "<", ">", "!", "=",
    "(", ")", "{", "}", "[", "]", ";", ",", ".",
]


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT KEYWORD INT STRING OP BACKSLASH ANNOT_OPEN ANNOT_CLOSE EOF
    text: str
    line: int
    column: int
    annotation: bool = False

    @property
    def span(self) -> Span:
        return Span(self.line, self.column, max(len(self.text), 1))


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_INT = re.compile(r"[0-9]+")


class Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1
        self.tokens: list[Token] = []
        self.in_annotation: str | None = None  # "line" or "block"

    def error(self, message: str, length: int = 1) -> ParseError:
        return ParseError([Diagnostic("error", message, Span(self.line, self.col, length))])

    def advance(self, n: int) -> None:
        for ch in self.text[self.pos : self.pos + n]:
            if ch == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
        self.pos += n

    def emit(self, kind: str, text: str) -> None:
        self.tokens.append(Token(kind, text, self.line, self.col, self.in_annotation is not None))

    def tokenize(self) -> list[Token]:
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]
            if ch == "\n":
                if self.in_annotation == "line":
                    self.emit("ANNOT_CLOSE", "")
                    self.in_annotation = None
                self.advance(1)
                if self.in_annotation == "block":
                    self.skip_at_margin()
                continue
            if ch in " \t\r\f":
                self.advance(1)
                continue
            if self.in_annotation == "block" and text.startswith("@*/", self.pos):
                self.emit("ANNOT_CLOSE", "@*/")
                self.advance(3)
                self.in_annotation = None
                continue
            if self.in_annotation == "block" and text.startswith("*/", self.pos):
                self.emit("ANNOT_CLOSE", "*/")
                self.advance(2)
                self.in_annotation = None
                continue
            if text.startswith("//@", self.pos) and self.in_annotation is None:
                self.emit("ANNOT_OPEN", "//@")
                self.advance(3)
                self.in_annotation = "line"
                continue
            if text.startswith("/*@", self.pos) and self.in_annotation is None:
                self.emit("ANNOT_OPEN", "/*@")
                self.advance(3)
                self.in_annotation = "block"
                continue
            if text.startswith("//", self.pos):
                end = text.find("\n", self.pos)
                self.advance((len(text) if end < 0 else end) - self.pos)
                continue
            if text.startswith("/*", self.pos):
                end = text.find("*/", self.pos + 2)
                if end < 0:
                    raise self.error("unterminated comment", 2)
                self.advance(end + 2 - self.pos)
                continue
            if ch == "\\":
                m = _IDENT.match(text, self.pos + 1)
                if not m or m.group(0) not in ("old", "result"):
                    raise self.error("unknown backslash keyword")
                self.emit("BACKSLASH", "\\" + m.group(0))
                self.advance(1 + len(m.group(0)))
                continue
            if ch == '"':
                end = self.pos + 1
                while end < len(text) and text[end] not in '"\n':
                    end += 2 if text[end] == "\\" else 1
                if end >= len(text) or text[end] != '"':
                    raise self.error("unterminated string literal")
                self.emit("STRING", text[self.pos : end + 1])
                self.advance(end + 1 - self.pos)
                continue
            m = _IDENT.match(text, self.pos)
            if m:
                word = m.group(0)
                kind = "KEYWORD" if word in KEYWORDS else "IDENT"
                self.emit(kind, word)
                self.advance(len(word))
                continue
            m = _INT.match(text, self.pos)
            if m:
                self.emit("INT", m.group(0))
                self.advance(len(m.group(0)))
                continue
            for op in OPERATORS:
                if text.startswith(op, self.pos):
                    self.emit("OP", op)
                    self.advance(len(op))
                    break
            else:
                if ch == "@" and self.in_annotation:
                    self.advance(1)
                    continue
                raise self.error(f"unexpected character {ch!r}")
        if self.in_annotation == "line":
            self.emit("ANNOT_CLOSE", "")
        elif self.in_annotation == "block":
            raise self.error("unterminated annotation comment")
        self.emit("EOF", "")
        return self.tokens

    def skip_at_margin(self) -> None:
        # continuation lines of /*@ ... @*/ may start with '@' markers
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.advance(1)
        while (
            self.pos < len(self.text)
            and self.text[self.pos] == "@"
            and not self.text.startswith("@*/", self.pos)
        ):
            self.advance(1)


def tokenize(text: str) -> list[Token]:
    return Lexer(text).tokenize()
