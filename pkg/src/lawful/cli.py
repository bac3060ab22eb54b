"""Command-line driver.

Exit codes:
  0 success            5 schema mismatch       9 binding error
  1 internal error     6 proviso failure      10 oracle atom cap exceeded
  2 usage / script     7 not equivalent
  3 parse error        8 I/O error
  4 ill-formed program
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from .check import WellFormednessError
from .diff import diff_programs, format_diff
from .laws import (
    BindingError,
    IllFormedResult,
    LawError,
    ProvisoFailure,
    SchemaMismatch,
    apply_law,
    catalogue,
    check_provisos,
    get_law,
)
from .lexer import FrontendError, ParseError
from .oracle import DEFAULT_ATOM_CAP, AtomCapExceeded, check_law_equivalence
from .parser import parse
from .printer import pretty_print
from .scripts import (
    ScriptError,
    StepFailure,
    VerificationFailure,
    parse_binding_text,
    parse_script,
    run_script,
)

OK, INTERNAL, USAGE, PARSE, ILL_FORMED, MISMATCH, PROVISO, INEQUIVALENT, IO, BINDING, ATOM_CAP = (
    0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10
)


class CliError(Exception):
    def __init__(self, code: int, message: str = ""):
        super().__init__(message)
        self.code = code


def _color() -> bool:
    env = os.environ.get("LAWFUL_COLOR")
    if env is not None:
        return env.strip() not in ("", "0")
    return sys.stdout.isatty()


def _paint(text: str, code: str) -> str:
    return f"\x1b[{code}m{text}\x1b[0m" if _color() else text


def _err(message: str) -> None:
    print(message, file=sys.stderr)


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(IO, f"{path}: {exc.strerror or exc}") from None


def _load(path: str):
    text = _read(path)
    try:
        return parse(text, path)
    except ParseError as exc:
        for d in exc.diagnostics:
            _err(d.format(path))
        raise CliError(PARSE) from None
    except WellFormednessError as exc:
        for d in exc.diagnostics:
            _err(d.format(path))
        raise CliError(ILL_FORMED) from None


def _emit(text: str, out: str | None) -> None:
    """Write to `out` atomically, or to stdout."""
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    target = Path(out)
    try:
        fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.", suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except OSError as exc:
        raise CliError(IO, f"{out}: {exc.strerror or exc}") from None


def _law_error(exc: LawError, prefix: str = "") -> CliError:
    if isinstance(exc, ProvisoFailure):
        _err(prefix + _report_text(exc.report))
        return CliError(PROVISO)
    if isinstance(exc, SchemaMismatch):
        return CliError(MISMATCH, f"{prefix}schema mismatch: {exc}")
    if isinstance(exc, BindingError):
        return CliError(BINDING, f"{prefix}binding error: {exc}")
    if isinstance(exc, IllFormedResult):
        return CliError(INTERNAL, f"{prefix}internal error: {exc}")
    return CliError(INTERNAL, f"{prefix}{exc}")


def _report_text(report) -> str:
    text = report.to_text()
    return text.replace("[pass]", _paint("[pass]", "32")).replace("[FAIL]", _paint("[FAIL]", "31"))


def _binding(args) -> dict[str, str]:
    raw: dict[str, str] = {}
    if args.binding:
        try:
            raw.update(parse_binding_text(_read(args.binding)))
        except ScriptError as exc:
            raise CliError(BINDING, f"{args.binding}: {exc}") from None
    for item in args.set or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise CliError(USAGE, f"--set expects key=value, got '{item}'")
        raw[key.strip()] = value.strip()
    return raw


# ------------------------------------------------------------------ commands


def cmd_check(args) -> int:
    status = OK
    for path in args.paths:
        try:
            _load(path)
        except CliError as exc:
            if str(exc):
                _err(str(exc))
            status = status or exc.code
            continue
        if not args.quiet:
            print(f"{path}: ok")
    return status


def cmd_apply(args) -> int:
    program = _load(args.source)
    raw = _binding(args)
    try:
        if args.report_only:
            report = check_provisos(program, args.law, args.direction, raw)
            if args.format == "structured":
                print(json.dumps(report.to_dict(), indent=2))
            else:
                sys.stdout.write(_report_text(report))
            return OK if report.passed else PROVISO
        result = apply_law(program, args.law, args.direction, raw, force=args.force)
    except LawError as exc:
        raise _law_error(exc) from None
    _emit(pretty_print(result), args.out)
    return OK


def cmd_script(args) -> int:
    try:
        steps = parse_script(_read(args.script))
    except ScriptError as exc:
        raise CliError(USAGE, f"{args.script}: {exc}") from None
    program = _load(args.source)
    try:
        result = run_script(program, steps, verify=args.verify, atom_cap=args.atom_cap)
    except StepFailure as exc:
        step = exc.step
        prefix = f"step {step.index} ({step.law_id} {step.direction}, line {step.line}) failed: "
        if isinstance(exc.cause, ProvisoFailure):
            _err(prefix.rstrip(": ") + ":")
        raise _law_error(exc.cause, prefix if not isinstance(exc.cause, ProvisoFailure) else "") from None
    except VerificationFailure as exc:
        _err(f"{exc.label}: oracle found a difference")
        _err(exc.report.to_text().rstrip())
        return INEQUIVALENT
    except AtomCapExceeded as exc:
        raise CliError(ATOM_CAP, f"oracle refused: {exc}") from None
    if args.verify:
        for label, report in result.verified:
            _err(f"verified {label}: {'equivalent' if report.equivalent else 'DIFFERS'}")
    _emit(pretty_print(result.program), args.out)
    return OK


def cmd_laws(args) -> int:
    laws = catalogue()
    if args.format == "structured":
        data = [
            {
                "id": law.id,
                "name": law.name,
                "directions": list(law.directions),
                "params": [{"key": p.key, "kind": p.kind, "default": p.default} for p in law.params],
                "provisos": [{"direction": p.tag, "name": p.name} for p in law.provisos()],
                "reconstructed": law.reconstructed,
            }
            for law in laws
        ]
        print(json.dumps(data, indent=2))
        return OK
    if args.law:
        try:
            law = get_law(args.law)
        except LawError as exc:
            raise CliError(BINDING, str(exc)) from None
        print(law.describe())
        print(f"  lhs: {law.lhs}")
        print(f"  rhs: {law.rhs}")
        for w in law.where:
            print(f"  where: {w}")
        keys = ", ".join(p.key + ("" if p.required else f" (default {p.default})") for p in law.params)
        print(f"  binding: {keys}")
        return OK
    for law in laws:
        print(law.describe())
    return OK


def cmd_diff(args) -> int:
    a, b = _load(args.a), _load(args.b)
    changes = diff_programs(a, b)
    if args.format == "structured":
        print(json.dumps([c.to_dict() for c in changes], indent=2))
    else:
        sys.stdout.write(format_diff(changes))
    return OK


def cmd_verify(args) -> int:
    before, after = _load(args.before), _load(args.after)
    scope = None
    if args.scope:
        scope = [s.strip() for s in args.scope.split(",") if s.strip()]
        unknown = [s for s in scope if s not in before or s not in after]
        if unknown:
            raise CliError(USAGE, f"scope names classes missing on one side: {', '.join(unknown)}")
    try:
        report = check_law_equivalence(before, after, scope, atom_cap=args.atom_cap)
    except AtomCapExceeded as exc:
        raise CliError(ATOM_CAP, f"oracle refused: {exc}") from None
    if args.format == "structured":
        print(report.to_json())
    else:
        sys.stdout.write(report.to_text())
    return OK if report.equivalent else INEQUIVALENT


# ------------------------------------------------------------------ parser

_ARROW_WORDS = {"->": "->", "<-": "<-", "forward": "->", "backward": "<-", "fwd": "->", "bwd": "<-"}


def _direction(text: str) -> str:
    try:
        return _ARROW_WORDS[text]
    except KeyError:
        raise argparse.ArgumentTypeError("direction must be ->, <-, forward or backward") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lawful", description="Apply refactoring laws to Java+JML programs.")
    parser.add_argument("--version", action="version", version=f"lawful {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def fmt(p):
        p.add_argument("--format", choices=("text", "structured"), default="text")

    p = sub.add_parser("check", help="parse and check well-formedness")
    p.add_argument("paths", nargs="+")
    p.add_argument("-q", "--quiet", action="store_true")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("apply", help="apply one law")
    p.add_argument("source")
    p.add_argument("law")
    p.add_argument("direction", type=_direction)
    p.add_argument("binding", nargs="?", help="binding file (key = value lines)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="extra binding entry")
    p.add_argument("--out")
    p.add_argument("--report-only", action="store_true", help="only check the provisos")
    p.add_argument("--force", action="store_true", help="skip proviso and well-formedness checks")
    fmt(p)
    p.set_defaults(fn=cmd_apply)

    p = sub.add_parser("script", help="run a derivation script")
    p.add_argument("script")
    p.add_argument("source")
    p.add_argument("--out")
    p.add_argument("--verify", action="store_true", help="run the equivalence oracle")
    p.add_argument("--atom-cap", type=int, default=DEFAULT_ATOM_CAP)
    p.set_defaults(fn=cmd_script)

    p = sub.add_parser("laws", help="list the law catalogue")
    p.add_argument("law", nargs="?")
    fmt(p)
    p.set_defaults(fn=cmd_laws)

    p = sub.add_parser("diff", help="structural diff of two programs")
    p.add_argument("a")
    p.add_argument("b")
    fmt(p)
    p.set_defaults(fn=cmd_diff)

    p = sub.add_parser("verify", help="compare contracts of two programs with the oracle")
    p.add_argument("before")
    p.add_argument("after")
    p.add_argument("--scope", help="comma-separated class names")
    p.add_argument("--atom-cap", type=int, default=DEFAULT_ATOM_CAP)
    fmt(p)
    p.set_defaults(fn=cmd_verify)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    # a bare "->" would otherwise look like an option to argparse
    argv = ["forward" if a == "->" else a for a in argv]
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code not in (0, None) else OK
    try:
        return args.fn(args)
    except CliError as exc:
        if str(exc):
            _err(str(exc))
        return exc.code
    except FrontendError as exc:  # pragma: no cover - surfaced by _load
        _err(str(exc))
        return PARSE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
