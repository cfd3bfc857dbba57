"""Command-line driver: ``slc check|run|dump|enumerate``."""
from __future__ import annotations

import argparse
import sys
import threading

from . import syntax
from .compile import compile_spec, dump_spec
from .engine import DEFAULT_MAX_STEPS, Engine, format_trace
from .errors import SLError, SLRuntimeError
from .terms import parse_term, pretty_term
from .typecheck import check_spec

EXIT_OK, EXIT_DIAGNOSTIC, EXIT_STEP_LIMIT = 0, 1, 2


class _Abort(Exception):
    pass


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except OSError as exc:
        print(f"{path}: error: {exc.strerror}", file=sys.stderr)
        raise _Abort from None


def _load(path: str, warn: bool = True):
    source = _read(path)
    try:
        spec = syntax.parse_spec(source)
        if warn:
            for d in spec.warnings:
                print(d.render(path), file=sys.stderr)
        checked = check_spec(spec)
    except SLError as exc:
        for d in exc.diagnostics:
            print(d.render(path), file=sys.stderr)
        raise _Abort from None
    return checked


def _load_term(sig, path: str):
    try:
        return parse_term(sig, _read(path))
    except SLError as exc:
        for d in exc.diagnostics:
            print(d.render(path), file=sys.stderr)
        raise _Abort from None


def cmd_check(args) -> int:
    _load(args.spec)
    return EXIT_OK


def cmd_run(args) -> int:
    checked = _load(args.spec)
    compiled = compile_spec(checked)
    term = _load_term(checked.signature, args.input)
    trace = Engine(compiled, seed=args.seed).evaluate(term, args.max_steps)
    if args.quiet:
        sys.stdout.write(pretty_term(trace.final) + "\n")
    else:
        sys.stdout.write(format_trace(trace))
    if trace.limit_reached:
        print(f"{args.input}: error: step limit {args.max_steps} reached", file=sys.stderr)
        return EXIT_STEP_LIMIT
    return EXIT_OK


def cmd_dump(args) -> int:
    sys.stdout.write(dump_spec(compile_spec(_load(args.spec, warn=False))))
    return EXIT_OK


def cmd_enumerate(args) -> int:
    checked = _load(args.spec, warn=False)
    compiled = compile_spec(checked)
    term = _load_term(checked.signature, args.input)
    lines = sorted(f"{pretty_term(t)}    by {','.join(labels)}"
                   for t, labels in Engine(compiled).enumerate_steps(term))
    for line in lines:
        print(line)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="parse and type-check a specification")
    p.add_argument("spec")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("run", help="evaluate a term and print its reduction trace")
    p.add_argument("spec")
    p.add_argument("input")
    p.add_argument("--seed", type=int, default=None,
                   help="choose alternatives in a seeded random order (default: textual order)")
    p.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    p.add_argument("--quiet", action="store_true", help="print only the final term")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("dump", help="print the compiled automata")
    p.add_argument("spec")
    p.set_defaults(func=cmd_dump)

    p = sub.add_parser("enumerate", help="list every one-step successor of a term")
    p.add_argument("spec")
    p.add_argument("input")
    p.set_defaults(func=cmd_enumerate)
    return parser


def _dispatch(args) -> int:
    try:
        return args.func(args)
    except _Abort:
        return EXIT_DIAGNOSTIC
    except SLRuntimeError as exc:
        print(f"{getattr(args, 'input', args.spec)}: error: {exc}", file=sys.stderr)
        return EXIT_DIAGNOSTIC


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    # Deeply nested terms recurse through the engine; run on a thread with a large stack.
    result = []
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 200000))
    threading.stack_size(512 * 1024 * 1024)
    worker = threading.Thread(target=lambda: result.append(_dispatch(args)))
    worker.start()
    worker.join()
    return result[0] if result else EXIT_DIAGNOSTIC
