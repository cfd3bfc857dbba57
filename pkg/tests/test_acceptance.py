"""Acceptance criteria: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or directly with ``python3 tests/test_acceptance.py``.
"""
import random
import subprocess
import sys
import time
from pathlib import Path

import pytest

from slc import SLError, check_spec, parse_spec
from slc.corpus import entry, provide_corpus
from slc.engine import Engine, enumerate_matches, enumerate_steps, step
from slc.terms import typecheck_term

sys.path.insert(0, str(Path(__file__).parent))
from conftest import load, term  # noqa: E402
from dumps import canonical, golden, section  # noqa: E402
from negative import CASES  # noqa: E402
from oracle import all_terms, oracle_for, random_term  # noqa: E402

MAX_NODES = 7
EXHAUSTIVE_LIMIT = 10**6
RANDOM_POPULATION = 10000
RESULTS: list = []


def slc(*argv):
    start = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "slc", *map(str, argv)],
                          capture_output=True, text=True, timeout=120)
    return proc, time.perf_counter() - start


def population(checked, type_name):
    terms = all_terms(checked.signature, type_name, MAX_NODES)
    if len(terms) > EXHAUSTIVE_LIMIT:
        rng = random.Random(0)
        terms = [random_term(checked.signature, type_name, rng) for _ in range(RANDOM_POPULATION)]
    return terms


def report(name, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


# -- criteria --------------------------------------------------------------

def check_reference_spec():
    proc, _ = slc("check", entry("cbv").spec_path)
    checked, _ = load("cbv")
    h = str(checked.context_types["H"])
    return proc.returncode == 0 and h == "M o-> M", f"exit {proc.returncode}, H : {h}"


def check_transcript():
    e = entry("cbv")
    proc, elapsed = slc("run", e.spec_path, e.input_path)
    ok = proc.returncode == 0 and proc.stdout == e.golden_text() and elapsed < 1.0
    same = "identical" if proc.stdout == e.golden_text() else "differs"
    return ok, f"output {same}, exit {proc.returncode}, {elapsed:.2f}s"


def check_dump():
    proc, _ = slc("dump", entry("cbv").spec_path)
    v = canonical(section(proc.stdout, "dynamic V")) == canonical(golden("match_V.txt"))
    h = canonical(section(proc.stdout, "context H")) == canonical(golden("match_H.txt"))
    return v and h, f"match_V {'isomorphic' if v else 'differs'}, match_H {'isomorphic' if h else 'differs'}"


def check_oracle():
    start = time.perf_counter()
    counts, mismatches = {}, []
    for e in provide_corpus():
        checked, compiled = load(e.name)
        oracle = oracle_for(checked)
        terms = population(checked, compiled.start_type)
        counts[e.name] = len(terms)
        for t in terms:
            if enumerate_steps(compiled, t) != oracle.successors(t, compiled.start_type):
                mismatches.append((e.name, t))
    elapsed = time.perf_counter() - start
    sizes = ", ".join(f"{k} {v}" for k, v in counts.items())
    return not mismatches and elapsed < 120, f"{len(mismatches)} mismatches over {sizes} terms, {elapsed:.1f}s"


def check_reconstruction():
    checked_count, failures = 0, 0
    for e in provide_corpus():
        checked, compiled = load(e.name)
        for name, a in compiled.contexts.items():
            for t in population(checked, str(checked.context_types[name].whole)):
                for d in enumerate_matches(compiled, a, t):
                    checked_count += 1
                    failures += d.fill() != t
    return failures == 0, f"{failures} failures over {checked_count} decompositions"


def check_type_preservation(runs=1000, max_steps=50):
    failures, total = 0, 0
    for e in provide_corpus():
        checked, compiled = load(e.name)
        rng = random.Random(e.name)
        for i in range(runs):
            t = random_term(checked.signature, compiled.start_type, rng)
            trace = Engine(compiled, seed=i).evaluate(t, max_steps)
            for u in trace.terms:
                total += 1
                try:
                    failures += typecheck_term(checked.signature, u) != compiled.start_type
                except SLError:
                    failures += 1
    return failures == 0, f"{failures} ill-typed out of {total} trace terms"


def check_nondeterminism():
    checked, compiled = load("overlap")
    a = term(checked, entry("overlap").input_text())
    union = set()
    for seed in range(100):
        r = step(compiled, a, seed=seed)
        union.add((r.next, r.labels))
    expected = oracle_for(checked).successors(a, compiled.start_type)
    overlap_ok = union == expected and len(expected) == 2
    checked, compiled = load("cbv")
    t = term(checked, entry("cbv").input_text())
    traces = {tuple(Engine(compiled, seed=s).evaluate(t).entries) for s in range(100)}
    return overlap_ok and len(traces) == 1, \
        f"overlap union {len(union)} of oracle {len(expected)}, cbv distinct traces {len(traces)}"


def check_negative():
    notes = []
    ok = True
    for name, source, fragments in CASES:
        try:
            check_spec(parse_spec(source))
            message = None
        except SLError as exc:
            message = "; ".join(d.message for d in exc.diagnostics)
        good = message is not None and all(f in message for f in fragments)
        ok = ok and good
        notes.append(f"{name} -> {message!r}")
    return ok, ", ".join(notes)


CRITERIA = [
    ("reference spec checks, H : M o-> M", check_reference_spec),
    ("transcript byte-exact under 1 s", check_transcript),
    ("match_V/match_H dump isomorphic to golden", check_dump),
    ("engine equals oracle on all terms up to 7 nodes", check_oracle),
    ("every decomposition reconstructs its term", check_reconstruction),
    ("1000 random runs per spec stay well-typed", check_type_preservation),
    ("seeded choice: overlap union, cbv determinism", check_nondeterminism),
    ("ill-formed specs rejected with named construct", check_negative),
]


@pytest.mark.parametrize("name, fn", CRITERIA, ids=[f"criterion{i}" for i in range(1, len(CRITERIA) + 1)])
def test_criterion(name, fn):
    report(name, *fn())


if __name__ == "__main__":
    failed = 0
    for name, fn in CRITERIA:
        ok, detail = fn()
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    sys.exit(1 if failed else 0)
