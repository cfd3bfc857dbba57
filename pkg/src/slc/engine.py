"""Execution of compiled automata with success continuations and backtracking."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .compile import (Accept, AppliedTest, Automaton, BindLet, Branch, Choice, CompiledSpec,
                      Cond, DefaultTest, Fail, MatchContext, MatchDynamic,
                      ReconAction, RefLet, Rewrite1)
from .errors import SLRuntimeError
from .meta import Decomposition, FreshNameSupply, Recon, Runtime, eval_meta
from .terms import Constr, pretty_term

DEFAULT_MAX_STEPS = 10000


class _Failure:
    __slots__ = ()

    def __repr__(self):
        return "FAILURE"


FAILURE = _Failure()


@dataclass(frozen=True)
class Matched:
    value: object
    labels: tuple


@dataclass(frozen=True)
class Stepped:
    next: object
    labels: tuple


@dataclass(frozen=True)
class NormalForm:
    pass


@dataclass
class Trace:
    entries: list = field(default_factory=list)  # (term, labels) pairs; first has no labels
    limit_reached: bool = False
    fresh_counters: list = field(default_factory=list)  # supply state before each step

    @property
    def terms(self) -> list:
        return [t for t, _ in self.entries]

    @property
    def final(self):
        return self.entries[-1][0]


class Engine:
    """One evaluation run: owns the fresh-name supply and the alternative ordering."""

    def __init__(self, compiled: CompiledSpec, seed: Optional[int] = None,
                 supply: FreshNameSupply | None = None, max_depth: int | None = None):
        self.compiled = compiled
        self.rng = random.Random(seed) if seed is not None else None
        kwargs = {} if max_depth is None else {"max_depth": max_depth}
        self.runtime = Runtime(compiled.spec.functions, supply or FreshNameSupply(), **kwargs)

    # -- automata --------------------------------------------------------

    def run_automaton(self, a: Automaton, subject, k):
        return self.run_state(a.state, {a.root: subject}, (), k)

    def _call(self, call, env, k):
        if isinstance(call, MatchDynamic):
            return self.run_automaton(self.compiled.dynamics[call.name], env[call.arg], k)
        if isinstance(call, MatchContext):
            return self.run_automaton(self.compiled.contexts[call.name], env[call.arg], k)
        if isinstance(call, Rewrite1):
            a = self.compiled.axioms.get(call.type_key)
            if a is None:
                return FAILURE
            return self.run_automaton(a, eval_meta(env, call.arg, self.runtime), k)
        raise TypeError(f"not a call: {call!r}")

    def run_state(self, state, env: dict, labels: tuple, k):
        """Run ``state``; ``k(value, labels)`` is the success continuation."""
        if isinstance(state, Branch):
            subject = env[state.subject]
            default = None
            for test, sub in state.cases:
                if isinstance(test, DefaultTest):
                    default = sub
                elif isinstance(subject, Constr) and subject.name == test.cname:
                    if isinstance(test, AppliedTest):
                        env = dict(env)
                        args = subject.args
                        env[test.ref] = args[0] if len(args) == 1 else args
                    elif subject.args:
                        continue
                    return self.run_state(sub, env, labels, k)
            if default is None:
                return FAILURE
            return self.run_state(default, env, labels, k)
        if isinstance(state, Accept):
            action = state.action
            if isinstance(action, ReconAction):
                value = Decomposition(Recon(action.param, action.body, env, self.runtime),
                                      env[action.param])
            else:
                value = eval_meta(env, action, self.runtime)
            return k(value, labels + (state.label,) if state.label else labels)
        if isinstance(state, Choice):
            alts = list(state.alts)
            if self.rng is not None:
                self.rng.shuffle(alts)
            supply = self.runtime.supply
            saved = supply.counter
            for alt in alts:
                result = self.run_state(alt, env, labels, k)
                if result is not FAILURE:
                    return result
                supply.counter = saved
            return FAILURE
        if isinstance(state, Fail):
            return FAILURE
        if isinstance(state, BindLet):
            env = dict(env)
            value = env[state.source]
            if isinstance(state.bound, str):
                env[state.bound] = value
            else:
                env.update(zip(state.bound, value))
            return self.run_state(state.body, env, labels, k)
        if isinstance(state, RefLet):
            def resume(value, callee_labels):
                inner = dict(env)
                if isinstance(state.bound, str):
                    inner[state.bound] = value
                else:
                    inner.update(zip(state.bound, value))
                return self.run_state(state.body, inner, labels + callee_labels, k)
            return self._call(state.call, env, resume)
        if isinstance(state, Cond):
            branch = state.then if eval_meta(env, state.cond, self.runtime) else state.else_
            return self.run_state(branch, env, labels, k)
        raise TypeError(f"not a state: {state!r}")

    # -- stepping --------------------------------------------------------

    def _guarded(self, fn):
        try:
            return fn()
        except RecursionError:
            raise SLRuntimeError("recursion too deep while evaluating a step") from None

    def _first(self, a: Optional[Automaton], t):
        if a is None:
            return NormalForm()
        saved = self.runtime.supply.counter
        result = self._guarded(lambda: self.run_automaton(a, t, lambda v, ls: Matched(v, ls)))
        if result is FAILURE:
            self.runtime.supply.counter = saved
            return NormalForm()
        return Stepped(result.value, result.labels)

    def _stepping_automaton(self, type_key: str):
        a = self.compiled.inferences.get(type_key)
        return a if a is not None else self.compiled.axioms.get(type_key)

    def rewrite1(self, t, type_key: str | None = None):
        return self._first(self.compiled.axioms.get(type_key or self.compiled.start_type), t)

    def step(self, t):
        return self._first(self._stepping_automaton(self.compiled.start_type), t)

    def enumerate_steps(self, t) -> set:
        a = self._stepping_automaton(self.compiled.start_type)
        found: set = set()
        if a is None:
            return found
        saved = self.runtime.supply.counter

        def collect(value, labels):
            found.add((value, labels))
            return FAILURE

        self._guarded(lambda: self.run_automaton(a, t, collect))
        self.runtime.supply.counter = saved
        return found

    def evaluate(self, t, max_steps: int = DEFAULT_MAX_STEPS) -> Trace:
        trace = Trace(entries=[(t, ())])
        steps = 0
        while True:
            trace.fresh_counters.append(self.runtime.supply.counter)
            result = self.step(t)
            if isinstance(result, NormalForm):
                trace.fresh_counters.pop()
                return trace
            if steps == max_steps:
                trace.fresh_counters.pop()
                trace.limit_reached = True
                return trace
            t = result.next
            trace.entries.append((t, result.labels))
            steps += 1


# ---------------------------------------------------------------------------
# Convenience wrappers

def rewrite1(compiled: CompiledSpec, t, seed=None):
    return Engine(compiled, seed).rewrite1(t)


def step(compiled: CompiledSpec, t, seed=None):
    return Engine(compiled, seed).step(t)


def evaluate(compiled: CompiledSpec, t, max_steps: int = DEFAULT_MAX_STEPS, seed=None) -> Trace:
    return Engine(compiled, seed).evaluate(t, max_steps)


def enumerate_steps(compiled: CompiledSpec, t, fresh_start: int = 0) -> set:
    """Every one-step successor of ``t`` with its inner-to-outer label path."""
    return Engine(compiled, supply=FreshNameSupply(fresh_start)).enumerate_steps(t)


def enumerate_matches(compiled: CompiledSpec, a: Automaton, t) -> list:
    """All results of running ``a`` on ``t`` (decompositions for context automata)."""
    engine = Engine(compiled)
    found: list = []

    def collect(value, labels):
        found.append(value)
        return FAILURE

    engine.run_automaton(a, t, collect)
    return found


def format_trace(trace: Trace) -> str:
    lines = [pretty_term(trace.entries[0][0])]
    for term, labels in trace.entries[1:]:
        lines.append(" ==>    by " + ",".join(labels))
        lines.append(pretty_term(term))
    return "\n".join(lines) + "\n"
