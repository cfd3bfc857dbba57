"""Compiler and small-step interpreter for syntactic-theory specifications."""
from .compile import CompiledSpec, compile_spec, dump_spec
from .engine import Engine, enumerate_steps, evaluate, format_trace, step
from .errors import SLError, SLRuntimeError, SLSyntaxError, SLTypeError
from .syntax import parse_spec, pretty_spec
from .terms import Constr, parse_term, pretty_term, typecheck_term
from .typecheck import check_spec


def load_spec(source: str) -> CompiledSpec:
    """Parse, check and compile specification text."""
    return compile_spec(check_spec(parse_spec(source)))


__all__ = [
    "CompiledSpec", "Constr", "Engine", "SLError", "SLRuntimeError", "SLSyntaxError",
    "SLTypeError", "check_spec", "compile_spec", "dump_spec", "enumerate_steps", "evaluate",
    "format_trace", "load_spec", "parse_spec", "parse_term", "pretty_spec", "pretty_term",
    "step", "typecheck_term",
]
