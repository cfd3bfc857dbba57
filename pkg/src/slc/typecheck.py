"""Static checking: object types for patterns/meta-expressions and context types."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from . import syntax as S
from .errors import Diagnostic, SLTypeError

BUILTIN_TYPES = ("string", "int", "bool")


@dataclass(frozen=True)
class Named:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Builtin:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class TupleT:
    items: tuple

    def __str__(self):
        return " * ".join(f"({t})" if isinstance(t, TupleT) else str(t) for t in self.items)


@dataclass(frozen=True)
class TVar:
    id: int

    def __str__(self):
        return f"'t{self.id}"


@dataclass(frozen=True)
class ContextType:
    """Context type: ``hole`` is the type of the hole, ``whole`` of the filled term."""
    hole: object
    whole: object

    def __str__(self):
        return f"{self.hole} o-> {self.whole}"


ObjType = Union[Named, Builtin, TupleT, TVar]
STRING, INT, BOOL = Builtin("string"), Builtin("int"), Builtin("bool")


class _Mismatch(Exception):
    pass


class Solver:
    """Unification over object types and context types."""

    def __init__(self):
        self.subst: dict = {}
        self.counter = 0

    def fresh(self) -> TVar:
        self.counter += 1
        return TVar(self.counter)

    def shallow(self, t):
        while isinstance(t, TVar) and t.id in self.subst:
            t = self.subst[t.id]
        return t

    def resolve(self, t):
        t = self.shallow(t)
        if isinstance(t, TupleT):
            return TupleT(tuple(self.resolve(x) for x in t.items))
        if isinstance(t, ContextType):
            return ContextType(self.resolve(t.hole), self.resolve(t.whole))
        return t

    def _occurs(self, v: TVar, t) -> bool:
        t = self.shallow(t)
        if t == v:
            return True
        if isinstance(t, TupleT):
            return any(self._occurs(v, x) for x in t.items)
        if isinstance(t, ContextType):
            return self._occurs(v, t.hole) or self._occurs(v, t.whole)
        return False

    def unify(self, a, b):
        a, b = self.shallow(a), self.shallow(b)
        if a == b:
            return
        if isinstance(a, TVar):
            if self._occurs(a, b):
                raise _Mismatch("recursive")
            self.subst[a.id] = b
        elif isinstance(b, TVar):
            self.unify(b, a)
        elif isinstance(a, TupleT) and isinstance(b, TupleT) and len(a.items) == len(b.items):
            for x, y in zip(a.items, b.items):
                self.unify(x, y)
        elif isinstance(a, ContextType) and isinstance(b, ContextType):
            self.unify(a.hole, b.hole)
            self.unify(a.whole, b.whole)
        else:
            raise _Mismatch("clash")


@dataclass
class TypeEnv:
    sig: S.Signature
    solver: Solver
    vars: dict = field(default_factory=dict)
    dynamics: dict = field(default_factory=dict)
    contexts: dict = field(default_factory=dict)
    functions: dict = field(default_factory=dict)
    loc: tuple = (0, 0)
    where: str = ""

    def extend(self, bindings: dict, **changes) -> "TypeEnv":
        env = TypeEnv(self.sig, self.solver, {**self.vars, **bindings}, self.dynamics,
                      self.contexts, self.functions, self.loc, self.where)
        for k, v in changes.items():
            setattr(env, k, v)
        return env

    def show(self, t) -> str:
        return str(self.solver.resolve(t))


def _fail(env: TypeEnv, node, message: str):
    loc = getattr(node, "loc", None) or env.loc
    prefix = f"{env.where}: " if env.where else ""
    raise SLTypeError(Diagnostic(loc[0], loc[1], prefix + message))


def _type_of_name(env: TypeEnv, name: str, node=None):
    if name in BUILTIN_TYPES:
        return Builtin(name)
    if any(td.name == name for td in env.sig.typedefs):
        return Named(name)
    _fail(env, node, f"unknown type {name}")


def _constructor(env: TypeEnv, name: str, node):
    info = env.sig.constructor(name)
    if info is None:
        _fail(env, node, f"unknown constructor {name}")
    type_name, arg_names = info
    return Named(type_name), [_type_of_name(env, a, node) for a in arg_names]


def _expect(env: TypeEnv, node, found, expected, what: str):
    try:
        env.solver.unify(found, expected)
    except _Mismatch as exc:
        if str(exc) == "recursive":
            _fail(env, node, f"{what}: unresolvable recursive type")
        _fail(env, node, f"{what}: expected {env.show(expected)}, found {env.show(found)}")


# ---------------------------------------------------------------------------
# Patterns

def check_restricted(env: TypeEnv, p, what: str):
    """Reject dynamic constraints, context fillings and holes in ``p``."""
    if isinstance(p, (S.DynConstraint, S.ContextFilling)):
        _fail(env, p, f"{what} must be a restricted pattern (no dynamic constraints "
                      "or context fillings)")
    if isinstance(p, S.Hole):
        _fail(env, p, "BOX outside a context definition")
    for child in _children(p):
        check_restricted(env, child, what)


def _children(p):
    if isinstance(p, S.Applied):
        return [p.arg]
    if isinstance(p, S.PTuple):
        return list(p.items)
    if isinstance(p, S.Alt):
        return [p.left, p.right]
    if isinstance(p, (S.Alias, S.TypeConstraint, S.DynConstraint)):
        return [p.pattern]
    if isinstance(p, S.ContextFilling):
        return [p.pattern, p.filler]
    return []


def _bind(env, node, name, ty, bound, shadow):
    if name in bound or (not shadow and name in env.vars):
        _fail(env, node, f"variable {name} rebound")
    bound[name] = ty


def _pattern(env: TypeEnv, p, expected, bound: dict, shadow: bool):
    solver = env.solver
    if isinstance(p, S.Wildcard):
        return
    if isinstance(p, S.PVar):
        _bind(env, p, p.name, expected, bound, shadow)
    elif isinstance(p, S.Nullary):
        result, args = _constructor(env, p.cname, p)
        if args:
            _fail(env, p, f"constructor {p.cname} expects {len(args)} argument(s), got 0")
        _expect(env, p, result, expected, f"constructor {p.cname}")
    elif isinstance(p, S.Applied):
        result, args = _constructor(env, p.cname, p)
        if not args:
            _fail(env, p, f"constructor {p.cname} expects no arguments")
        if len(args) > 1 and isinstance(p.arg, S.PTuple) and len(p.arg.items) != len(args):
            _fail(env, p, f"constructor {p.cname} expects {len(args)} argument(s), "
                          f"got {len(p.arg.items)}")
        _expect(env, p, result, expected, f"constructor {p.cname}")
        arg_type = args[0] if len(args) == 1 else TupleT(tuple(args))
        _pattern(env, p.arg, arg_type, bound, shadow)
    elif isinstance(p, S.PTuple):
        parts = tuple(solver.fresh() for _ in p.items)
        _expect(env, p, TupleT(parts), expected, "tuple pattern")
        for q, t in zip(p.items, parts):
            _pattern(env, q, t, bound, shadow)
    elif isinstance(p, S.Alt):
        left, right = dict(bound), dict(bound)
        _pattern(env, p.left, expected, left, shadow)
        _pattern(env, p.right, expected, right, shadow)
        if set(left) != set(right):
            diff = sorted(set(left) ^ set(right))
            _fail(env, p, f"alternatives bind different variables: {', '.join(diff)}")
        for name in left:
            _expect(env, p, right[name], left[name], f"variable {name} in alternatives")
        bound.update(left)
    elif isinstance(p, S.Alias):
        _pattern(env, p.pattern, expected, bound, shadow)
        _bind(env, p, p.name, expected, bound, shadow)
    elif isinstance(p, S.TypeConstraint):
        _expect(env, p, _type_of_name(env, p.type_name, p), expected, "type constraint")
        _pattern(env, p.pattern, expected, bound, shadow)
    elif isinstance(p, S.DynConstraint):
        if p.dyn not in env.dynamics:
            _fail(env, p, f"undefined dynamic {p.dyn}")
        _require_simple(env, p, p.dyn)
        _expect(env, p, env.dynamics[p.dyn], expected, f"dynamic {p.dyn}")
        _pattern(env, p.pattern, expected, bound, shadow)
    elif isinstance(p, S.ContextFilling):
        if p.context not in env.contexts:
            _fail(env, p, f"undefined context {p.context}")
        _require_simple(env, p, p.context)
        ctx = env.contexts[p.context]
        _expect(env, p, ctx.whole, expected, f"context {p.context}")
        if isinstance(p.pattern, S.PVar):
            _bind(env, p.pattern, p.pattern.name, ContextType(ctx.hole, expected), bound, shadow)
        _pattern(env, p.filler, ctx.hole, bound, shadow)
    elif isinstance(p, S.Hole):
        _fail(env, p, "BOX outside a context definition")
    else:
        raise TypeError(f"not a pattern: {p!r}")


def _require_simple(env, p, name):
    if not isinstance(p.pattern, (S.Wildcard, S.PVar)):
        _fail(env, p, f"the pattern constrained by {name} must be a wildcard or a variable")


def infer_pattern(env: TypeEnv, p, expected, shadow: bool = False) -> TypeEnv:
    """Check ``p`` against ``expected``; return ``env`` extended with its bindings."""
    bound: dict = {}
    _pattern(env, p, expected, bound, shadow)
    return env.extend(bound)


# ---------------------------------------------------------------------------
# Context arms

def _arm(env: TypeEnv, p, whole, bound: dict):
    """Check a hole-carrying pattern whose filled type is ``whole``; return the hole type."""
    if S.count_holes(p) == 0:
        _pattern(env, p, whole, bound, True)
        return None
    if isinstance(p, S.Hole):
        return whole
    if isinstance(p, S.ContextFilling):
        if p.context not in env.contexts:
            _fail(env, p, f"undefined context {p.context}")
        _require_simple(env, p, p.context)
        ctx = env.contexts[p.context]
        _expect(env, p, ctx.whole, whole, f"context {p.context}")
        if isinstance(p.pattern, S.PVar):
            _bind(env, p.pattern, p.pattern.name, ContextType(ctx.hole, whole), bound, True)
        return _arm(env, p.filler, ctx.hole, bound)
    if isinstance(p, S.Applied):
        result, args = _constructor(env, p.cname, p)
        if not args:
            _fail(env, p, f"constructor {p.cname} expects no arguments")
        if len(args) > 1 and isinstance(p.arg, S.PTuple) and len(p.arg.items) != len(args):
            _fail(env, p, f"constructor {p.cname} expects {len(args)} argument(s), "
                          f"got {len(p.arg.items)}")
        _expect(env, p, result, whole, f"constructor {p.cname}")
        return _arm(env, p.arg, args[0] if len(args) == 1 else TupleT(tuple(args)), bound)
    if isinstance(p, S.PTuple):
        parts = tuple(env.solver.fresh() for _ in p.items)
        _expect(env, p, TupleT(parts), whole, "tuple pattern")
        hole = None
        for q, t in zip(p.items, parts):
            h = _arm(env, q, t, bound)
            hole = h if h is not None else hole
        return hole
    if isinstance(p, S.Alias):
        hole = _arm(env, p.pattern, whole, bound)
        _bind(env, p, p.name, whole, bound, True)
        return hole
    if isinstance(p, S.TypeConstraint):
        _expect(env, p, _type_of_name(env, p.type_name, p), whole, "type constraint")
        return _arm(env, p.pattern, whole, bound)
    _fail(env, p, "a hole may not occur under an alternative pattern")


def infer_context_arm(env: TypeEnv, arm) -> ContextType:
    holes = S.count_holes(arm)
    if holes != 1:
        _fail(env, arm, f"context arm has {holes} holes")
    whole = env.solver.fresh()
    hole = _arm(env, arm, whole, {})
    return ContextType(hole, whole)


def check_context_def(env: TypeEnv, d: S.ContextDef) -> ContextType:
    env = env.extend({}, loc=d.loc or env.loc, where=f"context {d.name}")
    ctx = env.contexts[d.name]
    for k, arm in enumerate(d.arms, 1):
        arm_type = infer_context_arm(env, arm)
        before = env.show(ctx)
        try:
            env.solver.unify(arm_type, ctx)
        except _Mismatch as exc:
            if str(exc) == "recursive":
                _fail(env, arm, "unresolvable recursive context type")
            _fail(env, arm, f"arms disagree: earlier arms have type {before}, "
                            f"arm {k} has type {env.show(arm_type)}")
    return env.solver.resolve(ctx)


# ---------------------------------------------------------------------------
# Meta-expressions

def infer_meta(env: TypeEnv, e):
    solver = env.solver
    if isinstance(e, S.Var):
        if e.name not in env.vars:
            _fail(env, e, f"unbound variable {e.name}")
        t = solver.shallow(env.vars[e.name])
        if isinstance(t, ContextType):
            _fail(env, e, f"context variable {e.name} used as a term; fill it with '{e.name} e'")
        return t
    if isinstance(e, S.StrLit):
        return STRING
    if isinstance(e, S.IntLit):
        return INT
    if isinstance(e, S.BoolLit):
        return BOOL
    if isinstance(e, S.ConstrApp):
        result, args = _constructor(env, e.cname, e)
        if len(e.args) == len(args):
            for k, (a, t) in enumerate(zip(e.args, args), 1):
                _expect(env, a, infer_meta(env, a), t, f"argument {k} of {e.cname}")
        elif len(args) > 1 and len(e.args) == 1:
            _expect(env, e.args[0], infer_meta(env, e.args[0]), TupleT(tuple(args)),
                    f"argument of {e.cname}")
        else:
            _fail(env, e, f"constructor {e.cname} expects {len(args)} argument(s), "
                          f"got {len(e.args)}")
        return result
    if isinstance(e, S.Tuple):
        return TupleT(tuple(infer_meta(env, a) for a in e.items))
    if isinstance(e, S.Call):
        if e.func in S.BUILTINS:
            if len(e.args) != S.BUILTINS[e.func]:
                _fail(env, e, f"{e.func} expects {S.BUILTINS[e.func]} argument(s)")
            return STRING
        if e.func not in env.functions:
            _fail(env, e, f"unknown function {e.func}")
        params, result = env.functions[e.func]
        if len(params) != len(e.args):
            _fail(env, e, f"{e.func} expects {len(params)} argument(s), got {len(e.args)}")
        for k, (a, t) in enumerate(zip(e.args, params), 1):
            _expect(env, a, infer_meta(env, a), t, f"argument {k} of {e.func}")
        return result
    if isinstance(e, S.Fill):
        if e.context not in env.vars:
            _fail(env, e, f"unbound context variable {e.context}")
        ctx = solver.shallow(env.vars[e.context])
        if not isinstance(ctx, ContextType):
            _fail(env, e, f"{e.context} is not a context variable")
        _expect(env, e.arg, infer_meta(env, e.arg), ctx.hole, f"filling {e.context}")
        return ctx.whole
    if isinstance(e, S.If):
        _expect(env, e.cond, infer_meta(env, e.cond), BOOL, "condition")
        a = infer_meta(env, e.then)
        _expect(env, e.else_, infer_meta(env, e.else_), a, "else branch")
        return a
    if isinstance(e, S.Let):
        value = infer_meta(env, e.value)
        if isinstance(e.names, str):
            inner = env.extend({e.names: value})
        else:
            parts = tuple(solver.fresh() for _ in e.names)
            _expect(env, e.value, value, TupleT(parts), "tuple binding")
            inner = env.extend(dict(zip(e.names, parts)))
        return infer_meta(inner, e.body)
    if isinstance(e, S.BinOp):
        left, right = infer_meta(env, e.left), infer_meta(env, e.right)
        if e.op in S.ARITHMETIC:
            _expect(env, e.left, left, INT, f"left operand of {e.op}")
            _expect(env, e.right, right, INT, f"right operand of {e.op}")
            return INT
        _expect(env, e.right, right, left, f"right operand of {e.op}")
        if e.op not in ("=", "<>"):
            t = solver.shallow(left)
            if t not in (INT, STRING) and not isinstance(t, TVar):
                _fail(env, e, f"{e.op} compares int or string, not {env.show(t)}")
        return BOOL
    raise TypeError(f"not a meta-expression: {e!r}")


# ---------------------------------------------------------------------------
# Rules, functions, whole specs

def check_rule(env: TypeEnv, r):
    """Check one rule; return ``(subject type, premise type or None)``."""
    solver = env.solver
    kind = "axiom" if isinstance(r, S.Axiom) else "inference"
    env = env.extend({}, loc=r.loc or env.loc, where=f"{kind} {r.name}")
    subject = solver.fresh()
    if isinstance(r, S.Axiom):
        lhs_env = infer_pattern(env, r.lhs, subject)
        if r.cond is not None:
            _expect(lhs_env, r.cond, infer_meta(lhs_env, r.cond), BOOL, "condition")
        rhs = infer_meta(lhs_env, r.rhs)
        _sides(lhs_env, r.rhs, subject, rhs)
        return subject, None
    lhs_env = infer_pattern(env, r.conclusion_lhs, subject)
    if r.cond is not None:
        _expect(lhs_env, r.cond, infer_meta(lhs_env, r.cond), BOOL, "condition")
    premise = infer_meta(lhs_env, r.premise_lhs)
    check_restricted(lhs_env, r.premise_rhs, "premise right-hand side")
    prem_env = infer_pattern(lhs_env, r.premise_rhs, premise)
    rhs = infer_meta(prem_env, r.conclusion_rhs)
    _sides(prem_env, r.conclusion_rhs, subject, rhs)
    return subject, premise


def _sides(env, node, lhs, rhs):
    try:
        env.solver.unify(lhs, rhs)
    except _Mismatch:
        _fail(env, node, f"sides differ: {env.show(lhs)} vs {env.show(rhs)}")


def check_function(env: TypeEnv, f: S.AuxFun):
    env = env.extend({}, loc=f.loc or env.loc, where=f"function {f.name}")
    params, result = env.functions[f.name]
    body_env = env.extend(dict(zip(f.params, params)))
    if f.scrutinee:
        by_name = dict(zip(f.params, params))
        scrut = [by_name[s] for s in f.scrutinee]
        scrut_type = scrut[0] if len(scrut) == 1 else TupleT(tuple(scrut))
    else:
        scrut_type = env.solver.fresh()
    for clause in f.clauses:
        check_restricted(body_env, clause.pattern, "clause pattern")
        clause_env = infer_pattern(body_env, clause.pattern, scrut_type, shadow=True)
        _expect(clause_env, clause.body, infer_meta(clause_env, clause.body), result,
                "clause body")


def _check_signature(sig: S.Signature) -> list:
    diags = []
    seen_types, seen_cons = set(), set()
    declared = {td.name for td in sig.typedefs}
    for td in sig.typedefs:
        loc = td.loc or (0, 0)
        if td.name in seen_types:
            diags.append(Diagnostic(*loc, f"duplicate type {td.name}"))
        seen_types.add(td.name)
        for c in td.constructors:
            if c.name in seen_cons:
                diags.append(Diagnostic(*(c.loc or loc), f"duplicate constructor {c.name}"))
            seen_cons.add(c.name)
            for a in c.arg_types:
                if a not in declared and a not in BUILTIN_TYPES[:2]:
                    diags.append(Diagnostic(*(c.loc or loc),
                                            f"constructor {c.name}: unknown type {a}"))
    if sig.start_type not in declared:
        diags.append(Diagnostic(*(sig.loc or (0, 0)),
                                f"start type {sig.start_type} is not declared"))
    return diags


@dataclass
class CheckedSpec:
    spec: S.Spec
    dynamic_types: dict
    context_types: dict
    rule_types: dict
    premise_types: dict
    function_types: dict
    warnings: tuple = ()

    @property
    def signature(self) -> S.Signature:
        return self.spec.signature

    @property
    def start_type(self) -> Named:
        return Named(self.spec.signature.start_type)


def new_env(spec: S.Spec, solver: Solver | None = None) -> TypeEnv:
    solver = solver or Solver()
    env = TypeEnv(spec.signature, solver)
    env.dynamics = {d.name: solver.fresh() for d in spec.dynamics}
    env.contexts = {c.name: ContextType(solver.fresh(), solver.fresh()) for c in spec.contexts}
    env.functions = {f.name: ([solver.fresh() for _ in f.params], solver.fresh())
                     for f in spec.functions}
    return env


def check_spec(spec: S.Spec) -> CheckedSpec:
    """Check every definition; raise ``SLTypeError`` carrying all diagnostics."""
    diags = _check_signature(spec.signature)
    if diags:
        raise SLTypeError(diags)
    env = new_env(spec)
    solver = env.solver
    rule_names: set = set()
    rule_types, premise_types = {}, {}

    def attempt(fn, *args):
        try:
            return fn(*args)
        except SLTypeError as exc:
            diags.extend(exc.diagnostics)

    for d in spec.dynamics:
        denv = env.extend({}, loc=d.loc or (0, 0), where=f"dynamic {d.name}")
        attempt(infer_pattern, denv, d.pattern, env.dynamics[d.name])
    for c in spec.contexts:
        attempt(check_context_def, env, c)
    for f in spec.functions:
        attempt(check_function, env, f)
    for r in spec.rules:
        if r.name in rule_names:
            loc = r.loc or (0, 0)
            diags.append(Diagnostic(*loc, f"duplicate rule name {r.name}"))
            continue
        rule_names.add(r.name)
        result = attempt(check_rule, env, r)
        if result is not None:
            rule_types[r.name], premise_types[r.name] = result
    if diags:
        raise SLTypeError(diags)

    # Unconstrained definition types default to the start type.
    start = Named(spec.signature.start_type)
    for ctx in env.contexts.values():
        for part in (ctx.hole, ctx.whole):
            if isinstance(solver.shallow(part), TVar):
                solver.unify(part, start)
    for t in list(env.dynamics.values()) + list(rule_types.values()):
        if isinstance(solver.shallow(t), TVar):
            solver.unify(t, start)
    for t in premise_types.values():
        if t is not None and isinstance(solver.shallow(t), TVar):
            solver.unify(t, start)

    return CheckedSpec(
        spec=spec,
        dynamic_types={k: solver.resolve(v) for k, v in env.dynamics.items()},
        context_types={k: solver.resolve(v) for k, v in env.contexts.items()},
        rule_types={k: solver.resolve(v) for k, v in rule_types.items()},
        premise_types={k: solver.resolve(v) for k, v in premise_types.items() if v is not None},
        function_types={k: ([solver.resolve(p) for p in ps], solver.resolve(r))
                        for k, (ps, r) in env.functions.items()},
        warnings=spec.warnings,
    )
