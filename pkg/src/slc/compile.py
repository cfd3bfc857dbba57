"""Compilation of rules and definitions into pattern-matching automata."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Union

from . import syntax as S
from .typecheck import CheckedSpec

ROOT = "$t0"
HOLE_PARAM = S.GENERATED_PREFIX + "x"


# ---------------------------------------------------------------------------
# Automaton states

@dataclass(frozen=True)
class NullaryTest:
    cname: str


@dataclass(frozen=True)
class AppliedTest:
    cname: str
    ref: str


@dataclass(frozen=True)
class DefaultTest:
    pass


@dataclass(frozen=True)
class MatchDynamic:
    name: str
    arg: str


@dataclass(frozen=True)
class MatchContext:
    name: str
    arg: str


@dataclass(frozen=True)
class Rewrite1:
    arg: object
    type_key: str


@dataclass(frozen=True)
class ReconAction:
    """Accept action of a context automaton: (fun param -> body, param)."""
    param: str
    body: object = None


@dataclass(frozen=True)
class Branch:
    subject: str
    cases: tuple


@dataclass(frozen=True)
class Accept:
    action: object
    label: Optional[str] = None


@dataclass(frozen=True)
class Choice:
    alts: tuple


@dataclass(frozen=True)
class Fail:
    pass


@dataclass(frozen=True)
class RefLet:
    bound: Union[str, tuple]
    call: object
    body: object


@dataclass(frozen=True)
class Cond:
    cond: object
    then: object
    else_: object


@dataclass(frozen=True)
class BindLet:
    bound: Union[str, tuple]
    source: str
    body: object


FAIL = Fail()


@dataclass(frozen=True)
class Matrix:
    subjects: tuple
    rows: tuple  # of (patterns tuple, state)


def choice(states) -> object:
    states = tuple(states)
    if not states:
        return FAIL
    if len(states) == 1:
        return states[0]
    return Choice(states)


# ---------------------------------------------------------------------------
# The compilation function

class Compiler:
    """Allocates TermRefs for one automaton and compiles matrices into states."""

    def __init__(self):
        self.counter = 0

    def new_ref(self) -> str:
        self.counter += 1
        return f"$t{self.counter}"

    def compile_matrix(self, m: Matrix):
        m = preprocess(m)
        if not m.rows:
            return FAIL
        if not m.subjects:
            return choice(state for _, state in m.rows)
        return choice(self._compile_group(g) for g in split_groups(m))

    def _compile_group(self, m: Matrix):
        t1, rest = m.subjects[0], m.subjects[1:]
        head = m.rows[0][0][0]
        kind = group_kind(head)
        if kind == "var":
            if len(m.rows) == 1:
                (pats, state), = m.rows
                inner = self.compile_matrix(Matrix(rest, ((pats[1:], state),)))
                return BindLet(pats[0].name, t1, inner) if isinstance(pats[0], S.PVar) else inner
            rows = tuple((pats[1:], BindLet(pats[0].name, t1, state)
                          if isinstance(pats[0], S.PVar) else state) for pats, state in m.rows)
            return self.compile_matrix(Matrix(rest, rows))
        if kind == "tuple":
            refs = tuple(self.new_ref() for _ in head.items)
            rows = tuple((tuple(pats[0].items) + pats[1:], state) for pats, state in m.rows)
            return BindLet(refs, t1, self.compile_matrix(Matrix(refs + rest, rows)))
        if kind == "constr":
            order: list = []
            for pats, _ in m.rows:
                if pats[0].cname not in order:
                    order.append(pats[0].cname)
            cases = []
            for cname in order:
                selected = [(pats, state) for pats, state in m.rows if pats[0].cname == cname]
                if isinstance(selected[0][0][0], S.Nullary):
                    sub = Matrix(rest, tuple((pats[1:], state) for pats, state in selected))
                    cases.append((NullaryTest(cname), self.compile_matrix(sub)))
                else:
                    ref = self.new_ref()
                    sub = Matrix((ref,) + rest,
                                 tuple(((pats[0].arg,) + pats[1:], state) for pats, state in selected))
                    cases.append((AppliedTest(cname, ref), self.compile_matrix(sub)))
            return Branch(t1, tuple(cases))
        if kind[0] == "dyn":
            ref = self.new_ref()
            rows = tuple(((pats[0].pattern,) + pats[1:], state) for pats, state in m.rows)
            return RefLet(ref, MatchDynamic(kind[1], t1), self.compile_matrix(Matrix((ref,) + rest, rows)))
        ctx_ref, hole_ref = self.new_ref(), self.new_ref()
        rows = tuple(((pats[0].pattern, pats[0].filler) + pats[1:], state) for pats, state in m.rows)
        return RefLet((ctx_ref, hole_ref), MatchContext(kind[1], t1),
                      self.compile_matrix(Matrix((ctx_ref, hole_ref) + rest, rows)))


def group_kind(p):
    if isinstance(p, (S.Wildcard, S.PVar)):
        return "var"
    if isinstance(p, S.PTuple):
        return "tuple"
    if isinstance(p, (S.Nullary, S.Applied)):
        return "constr"
    if isinstance(p, S.DynConstraint):
        return ("dyn", p.dyn)
    if isinstance(p, S.ContextFilling):
        return ("ctx", p.context)
    raise ValueError(f"pattern {S.pretty_pattern(p)} has no group")


def _expand(head, rest, state, subject):
    """Canonicalize one first-column pattern; returns the resulting rows."""
    while True:
        if isinstance(head, S.TypeConstraint):
            head = head.pattern
        elif isinstance(head, S.Alias):
            state = BindLet(head.name, subject, state)
            head = head.pattern
        elif isinstance(head, S.Alt):
            return (_expand(head.left, rest, state, subject)
                    + _expand(head.right, rest, state, subject))
        else:
            return [((head,) + rest, state)]


def preprocess(m: Matrix) -> Matrix:
    """Strip type constraints, turn aliases into bindings and split alternatives."""
    if not m.subjects:
        return m
    rows = []
    for pats, state in m.rows:
        rows.extend(_expand(pats[0], tuple(pats[1:]), state, m.subjects[0]))
    return Matrix(m.subjects, tuple(rows))


def split_groups(m: Matrix) -> list:
    """Maximal runs of consecutive rows whose first patterns share a group."""
    groups: list = []
    last = None
    for row in m.rows:
        kind = group_kind(row[0][0])
        if groups and kind == last:
            groups[-1].append(row)
        else:
            groups.append([row])
            last = kind
    return [Matrix(m.subjects, tuple(g)) for g in groups]


# ---------------------------------------------------------------------------
# Rules and definitions

def init_rule_states(rules, compiler: Compiler, premise_types: dict | None = None) -> Matrix:
    """One-column matrix over the root subject: each rule's LHS and initial state."""
    premise_types = premise_types or {}
    rows = []
    for r in rules:
        if isinstance(r, S.Axiom):
            state = Accept(r.rhs, r.name)
            if r.cond is not None:
                state = Cond(r.cond, state, FAIL)
            rows.append(((r.lhs,), state))
            continue
        accept = Accept(r.conclusion_rhs, r.name)
        if isinstance(r.premise_rhs, S.PVar):
            bound, inner = r.premise_rhs.name, accept
        else:
            bound = compiler.new_ref()
            inner = compiler.compile_matrix(Matrix((bound,), (((r.premise_rhs,), accept),)))
        key = str(premise_types.get(r.name, ""))
        state = RefLet(bound, Rewrite1(r.premise_lhs, key), inner)
        if r.cond is not None:
            state = Cond(r.cond, state, FAIL)
        rows.append(((r.conclusion_lhs,), state))
    return Matrix((ROOT,), tuple(rows))


@dataclass(frozen=True)
class Automaton:
    kind: str  # "dynamic", "context", "axioms" or "inference"
    name: str
    state: object
    root: str = ROOT


def build_match_dynamic(d: S.DynamicDef) -> Automaton:
    state = Compiler().compile_matrix(Matrix((ROOT,), (((d.pattern,), Accept(S.Var(ROOT))),)))
    return Automaton("dynamic", d.name, state)


def _replace_hole(p):
    if isinstance(p, S.Hole):
        return S.PVar(HOLE_PARAM)
    if isinstance(p, S.Applied):
        return replace(p, arg=_replace_hole(p.arg))
    if isinstance(p, S.PTuple):
        return replace(p, items=tuple(_replace_hole(q) for q in p.items))
    if isinstance(p, (S.Alias, S.TypeConstraint)):
        return replace(p, pattern=_replace_hole(p.pattern))
    if isinstance(p, S.ContextFilling):
        return replace(p, filler=_replace_hole(p.filler))
    return p


def build_match_context(c: S.ContextDef) -> Automaton:
    rows = tuple(((_replace_hole(arm),), Accept(ReconAction(HOLE_PARAM))) for arm in c.arms)
    state = Compiler().compile_matrix(Matrix((ROOT,), rows))
    return Automaton("context", c.name, _fill_bodies(state, ()))


def _fill_bodies(state, events):
    if isinstance(state, Branch):
        return Branch(state.subject, tuple(
            (test, _fill_bodies(sub, events + (("branch", state.subject, test),)))
            for test, sub in state.cases))
    if isinstance(state, BindLet):
        return replace(state, body=_fill_bodies(state.body, events + (("bind", state.bound, state.source),)))
    if isinstance(state, RefLet):
        return replace(state, body=_fill_bodies(state.body, events + (("ref", state.bound, state.call),)))
    if isinstance(state, Choice):
        return Choice(tuple(_fill_bodies(s, events) for s in state.alts))
    if isinstance(state, Cond):
        return Cond(state.cond, _fill_bodies(state.then, events), _fill_bodies(state.else_, events))
    if isinstance(state, Accept) and isinstance(state.action, ReconAction):
        return Accept(ReconAction(state.action.param, reconstruction_body(events)), state.label)
    return state


def _inverse(event):
    """(target ref, rebuilding expression, is a decomposition) for one path event."""
    kind, a, b = event
    if kind == "branch":
        if isinstance(b, NullaryTest):
            return a, S.ConstrApp(b.cname, ()), True
        return a, S.ConstrApp(b.cname, (S.Var(b.ref),)), True
    if kind == "bind":
        if isinstance(a, tuple):
            return b, S.Tuple(tuple(S.Var(r) for r in a)), True
        return b, S.Var(a), False
    if isinstance(b, MatchDynamic):
        return b.arg, S.Var(a), True
    if isinstance(b, MatchContext):
        return b.arg, S.Fill(a[0], S.Var(a[1])), True
    return None


def reconstruction_body(events) -> object:
    """Rebuild the root term from the bindings recorded along one path."""
    inverses = [_inverse(e) for e in events]
    chosen: dict = {}
    for k, inv in enumerate(inverses):
        if inv is None:
            continue
        target, _, decomposes = inv
        previous = chosen.get(target)
        if previous is None or (decomposes and not inverses[previous][2]):
            chosen[target] = k
    body = S.Var(ROOT)
    for k in sorted(chosen.values()):
        target, expr, _ = inverses[k]
        body = S.Let(target, expr, body)
    return body


# ---------------------------------------------------------------------------
# Whole specs

@dataclass
class CompiledSpec:
    checked: CheckedSpec
    dynamics: dict = field(default_factory=dict)
    contexts: dict = field(default_factory=dict)
    axioms: dict = field(default_factory=dict)      # type name -> Automaton
    inferences: dict = field(default_factory=dict)  # type name -> Automaton

    @property
    def spec(self) -> S.Spec:
        return self.checked.spec

    @property
    def start_type(self) -> str:
        return self.checked.spec.signature.start_type

    def automata(self):
        yield from self.dynamics.values()
        yield from self.contexts.values()
        yield from self.axioms.values()
        yield from self.inferences.values()


def _by_type(rules, rule_types):
    groups: dict = {}
    for r in rules:
        groups.setdefault(str(rule_types[r.name]), []).append(r)
    return groups


def compile_spec(checked: CheckedSpec) -> CompiledSpec:
    spec = checked.spec
    out = CompiledSpec(checked)
    for d in spec.dynamics:
        out.dynamics[d.name] = build_match_dynamic(d)
    for c in spec.contexts:
        out.contexts[c.name] = build_match_context(c)
    for key, rules in _by_type(spec.axioms, checked.rule_types).items():
        comp = Compiler()
        out.axioms[key] = Automaton("axioms", key, comp.compile_matrix(init_rule_states(rules, comp)))
    for key, rules in _by_type(spec.inferences, checked.rule_types).items():
        comp = Compiler()
        m = init_rule_states(rules, comp, checked.premise_types)
        out.inferences[key] = Automaton("inference", key, comp.compile_matrix(m))
    return out


# ---------------------------------------------------------------------------
# Textual dump

def _call_text(call) -> str:
    if isinstance(call, MatchDynamic):
        return f"match_{call.name} {call.arg}"
    if isinstance(call, MatchContext):
        return f"match_{call.name} {call.arg}"
    return f"rewrite1 {S.pretty_meta(call.arg, 3)}"


def _bound_text(bound) -> str:
    return bound if isinstance(bound, str) else "(" + ", ".join(bound) + ")"


def _action_text(state: Accept) -> str:
    action = state.action
    if isinstance(action, ReconAction):
        body = S.pretty_meta(action.body) if action.body is not None else "body"
        text = f"(fun {action.param} -> {body}, {action.param})"
    else:
        text = S.pretty_meta(action)
    return f"accept [{state.label}] {text}" if state.label else f"accept {text}"


def _test_text(test) -> str:
    if isinstance(test, NullaryTest):
        return test.cname
    if isinstance(test, AppliedTest):
        return f"{test.cname} {test.ref}"
    return "_"


class _Dumper:
    def __init__(self):
        self.counter = 0

    def render(self, state, depth) -> list:
        n = self.counter
        self.counter += 1
        children: list = []
        refs: list = []

        def child(s):
            refs.append(f"S{self.counter}")
            children.extend(self.render(s, depth + 1))
            return refs[-1]

        if isinstance(state, Branch):
            cases = [f"case {_test_text(t)} -> {child(s)}" for t, s in state.cases]
            text = f"branch {state.subject} ({'; '.join(cases)})"
        elif isinstance(state, Choice):
            text = "choice " + " | ".join(child(s) for s in state.alts)
        elif isinstance(state, Fail):
            text = "fail"
        elif isinstance(state, Accept):
            text = _action_text(state)
        elif isinstance(state, RefLet):
            text = f"let {_bound_text(state.bound)} = {_call_text(state.call)} in {child(state.body)}"
        elif isinstance(state, BindLet):
            text = f"let {_bound_text(state.bound)} = {state.source} in {child(state.body)}"
        elif isinstance(state, Cond):
            then = child(state.then)
            text = f"if {S.pretty_meta(state.cond)} then {then} else {child(state.else_)}"
        else:
            raise TypeError(f"not a state: {state!r}")
        return ["  " * (depth + 1) + f"S{n}: {text}"] + children


def dump_automaton(a: Automaton) -> str:
    lines = [f"{a.kind} {a.name} ({a.root}):"] + _Dumper().render(a.state, 0)
    return "\n".join(lines) + "\n"


def dump_spec(compiled: CompiledSpec) -> str:
    return "\n".join(dump_automaton(a) for a in compiled.automata())


# ---------------------------------------------------------------------------
# Static scans

def iter_states(state):
    yield state
    if isinstance(state, Branch):
        for _, s in state.cases:
            yield from iter_states(s)
    elif isinstance(state, Choice):
        for s in state.alts:
            yield from iter_states(s)
    elif isinstance(state, (RefLet, BindLet)):
        yield from iter_states(state.body)
    elif isinstance(state, Cond):
        yield from iter_states(state.then)
        yield from iter_states(state.else_)


def duplicate_tests(state) -> list:
    """Branches whose tests are not mutually disjoint."""
    bad = []
    for s in iter_states(state):
        if isinstance(s, Branch):
            keys = [t.cname if not isinstance(t, DefaultTest) else None for t, _ in s.cases]
            if len(keys) != len(set(keys)):
                bad.append(s)
    return bad


def _action_free(action) -> set:
    if isinstance(action, ReconAction):
        return S.free_vars(action.body) - {action.param} if action.body is not None else set()
    return S.free_vars(action)


def unbound_reads(a: Automaton) -> list:
    """Names read by some state before being bound on its path from the root."""
    bad: list = []

    def names(bound):
        return {bound} if isinstance(bound, str) else set(bound)

    def walk(state, scope):
        def need(found):
            missing = set(found) - scope
            if missing:
                bad.append((state, sorted(missing)))

        if isinstance(state, Branch):
            need({state.subject})
            for test, sub in state.cases:
                walk(sub, scope | ({test.ref} if isinstance(test, AppliedTest) else set()))
        elif isinstance(state, Choice):
            for sub in state.alts:
                walk(sub, scope)
        elif isinstance(state, Accept):
            need(_action_free(state.action))
        elif isinstance(state, BindLet):
            need({state.source})
            walk(state.body, scope | names(state.bound))
        elif isinstance(state, RefLet):
            call = state.call
            need(S.free_vars(call.arg) if isinstance(call, Rewrite1) else {call.arg})
            walk(state.body, scope | names(state.bound))
        elif isinstance(state, Cond):
            need(S.free_vars(state.cond))
            walk(state.then, scope)
            walk(state.else_, scope)

    walk(a.state, {a.root})
    return bad
