"""Evaluation of meta-expressions and auxiliary functions."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from . import syntax as S
from .errors import SLRuntimeError
from .terms import Constr, pretty_term

DEFAULT_MAX_DEPTH = 100000


class FreshNameSupply:
    """Run-scoped gensym yielding ``_g0``, ``_g1``, ..."""

    def __init__(self, start: int = 0):
        self.counter = start

    def next(self) -> str:
        name = f"_g{self.counter}"
        self.counter += 1
        return name


@dataclass(frozen=True)
class Recon:
    """Reconstruction function: evaluates ``body`` with ``param`` bound to the argument."""
    param: str
    body: object
    env: dict
    runtime: "Runtime"

    def __call__(self, u):
        env = dict(self.env)
        env[self.param] = u
        return eval_meta(env, self.body, self.runtime)

    def __hash__(self):
        return id(self)

    def __eq__(self, other):
        return self is other


class Decomposition(NamedTuple):
    recon: Recon
    hole: object

    def fill(self, u=None):
        return self.recon(self.hole if u is None else u)


class Runtime:
    """Mutable per-run state shared by meta-evaluation: functions, fresh names, depth."""

    def __init__(self, functions=(), supply: FreshNameSupply | None = None,
                 max_depth: int = DEFAULT_MAX_DEPTH):
        self.functions = {f.name: f for f in functions}
        self.supply = supply or FreshNameSupply()
        self.max_depth = max_depth
        self.depth = 0


def render_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple) and not isinstance(v, Decomposition):
        return "(" + ", ".join(render_value(x) for x in v) + ")"
    if isinstance(v, (Recon, Decomposition)):
        return "<context>"
    return pretty_term(v)


def match_value(p, v, bindings: dict) -> bool:
    """Naive matching of a restricted pattern against a runtime value."""
    if isinstance(p, S.Wildcard):
        return True
    if isinstance(p, S.PVar):
        bindings[p.name] = v
        return True
    if isinstance(p, S.Nullary):
        return isinstance(v, Constr) and v.name == p.cname and not v.args
    if isinstance(p, S.Applied):
        if not isinstance(v, Constr) or v.name != p.cname or not v.args:
            return False
        arg = v.args[0] if len(v.args) == 1 else v.args
        return match_value(p.arg, arg, bindings)
    if isinstance(p, S.PTuple):
        if not isinstance(v, tuple) or len(v) != len(p.items):
            return False
        return all(match_value(q, x, bindings) for q, x in zip(p.items, v))
    if isinstance(p, S.Alt):
        trial = dict(bindings)
        if match_value(p.left, v, trial):
            bindings.update(trial)
            return True
        return match_value(p.right, v, bindings)
    if isinstance(p, S.Alias):
        if match_value(p.pattern, v, bindings):
            bindings[p.name] = v
            return True
        return False
    if isinstance(p, S.TypeConstraint):
        return match_value(p.pattern, v, bindings)
    raise SLRuntimeError(f"pattern {S.pretty_pattern(p)} cannot be matched by an auxiliary function")


def call_aux(f: S.AuxFun, args: list, runtime: Runtime):
    if len(args) != len(f.params):
        raise SLRuntimeError(f"{f.name} expects {len(f.params)} argument(s), got {len(args)}")
    runtime.depth += 1
    try:
        if runtime.depth > runtime.max_depth:
            raise SLRuntimeError(f"recursion depth limit {runtime.max_depth} exceeded in {f.name}")
        env = dict(zip(f.params, args))
        if not f.scrutinee:
            subject = ()
        elif len(f.scrutinee) == 1:
            subject = env[f.scrutinee[0]]
        else:
            subject = tuple(env[s] for s in f.scrutinee)
        for clause in f.clauses:
            bindings = dict(env)
            if match_value(clause.pattern, subject, bindings):
                return eval_meta(bindings, clause.body, runtime)
        rendered = ", ".join(render_value(a) for a in args)
        raise SLRuntimeError(f"no clause of {f.name} matches ({rendered})")
    finally:
        runtime.depth -= 1


def _compare(op, a, b):
    if op == "=":
        return a == b
    if op == "<>":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


def eval_meta(env: dict, e, runtime: Runtime):
    """Strict, left-to-right evaluation of ``e`` under ``env``."""
    if isinstance(e, S.Var):
        try:
            return env[e.name]
        except KeyError:
            raise SLRuntimeError(f"unbound variable {e.name}") from None
    if isinstance(e, (S.StrLit, S.IntLit, S.BoolLit)):
        return e.value
    if isinstance(e, S.ConstrApp):
        args = [eval_meta(env, a, runtime) for a in e.args]
        if len(args) == 1 and isinstance(args[0], tuple):
            args = list(args[0])
        return Constr(e.cname, args)
    if isinstance(e, S.Tuple):
        return tuple(eval_meta(env, a, runtime) for a in e.items)
    if isinstance(e, S.Call):
        args = [eval_meta(env, a, runtime) for a in e.args]
        if e.func == "freshname":
            return runtime.supply.next()
        f = runtime.functions.get(e.func)
        if f is None:
            raise SLRuntimeError(f"unknown function {e.func}")
        return call_aux(f, args, runtime)
    if isinstance(e, S.Fill):
        recon = env.get(e.context)
        if not callable(recon):
            raise SLRuntimeError(f"{e.context} is not bound to a context")
        return recon(eval_meta(env, e.arg, runtime))
    if isinstance(e, S.If):
        branch = e.then if eval_meta(env, e.cond, runtime) else e.else_
        return eval_meta(env, branch, runtime)
    if isinstance(e, S.Let):
        value = eval_meta(env, e.value, runtime)
        inner = dict(env)
        if isinstance(e.names, str):
            inner[e.names] = value
        else:
            inner.update(zip(e.names, value))
        return eval_meta(inner, e.body, runtime)
    if isinstance(e, S.BinOp):
        a = eval_meta(env, e.left, runtime)
        b = eval_meta(env, e.right, runtime)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        return _compare(e.op, a, b)
    raise TypeError(f"not a meta-expression: {e!r}")
