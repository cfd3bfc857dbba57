from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from slc import syntax as S
from slc.compile import (FAIL, Accept, AppliedTest, BindLet, Branch, Choice, Compiler, Cond, Matrix,
                         MatchContext, MatchDynamic, NullaryTest, RefLet, Rewrite1, build_match_context,
                         build_match_dynamic, compile_spec, dump_automaton, dump_spec,
                         duplicate_tests, init_rule_states, preprocess, split_groups, unbound_reads)
from slc.engine import enumerate_matches
from conftest import load, term
from dumps import canonical, golden, section
from strategies import signatures, restricted_patterns

ACT = Accept(S.Var("e"))


def test_betav_row(cbv):
    checked, _ = cbv
    m = init_rule_states(checked.spec.axioms, Compiler())
    (row,) = m.rows
    assert m.subjects == ("$t0",)
    assert row == ((checked.spec.axioms[0].lhs,), Accept(checked.spec.axioms[0].rhs, "betav"))


def test_eval_row(cbv):
    checked, _ = cbv
    rule = checked.spec.inferences[0]
    m = init_rule_states([rule], Compiler(), checked.premise_types)
    (row,) = m.rows
    assert row == ((rule.conclusion_lhs,),
                   RefLet("t2", Rewrite1(S.Var("t1"), "M"), Accept(S.Fill("h", S.Var("t2")), "eval")))


def test_false_condition_row():
    rule = S.Axiom("never", S.Nullary("A"), S.BoolLit(False), S.ConstrApp("A"))
    (row,) = init_rule_states([rule], Compiler()).rows
    assert row[1] == Cond(S.BoolLit(False), Accept(S.ConstrApp("A"), "never"), FAIL)


def test_preprocess_alias():
    m = preprocess(Matrix(("$t1",), (((S.Alias(S.Nullary("A"), "x"),), ACT),)))
    assert m.rows == (((S.Nullary("A"),), BindLet("x", "$t1", ACT)),)


def test_preprocess_alternative():
    m = preprocess(Matrix(("$t1",), (((S.Alt(S.Nullary("A"), S.Nullary("B")),), ACT),)))
    assert m.rows == (((S.Nullary("A"),), ACT), ((S.Nullary("B"),), ACT))


def test_preprocess_type_constraint():
    m = preprocess(Matrix(("$t1",), (((S.TypeConstraint(S.PVar("p"), "M"),), ACT),)))
    assert m.rows == (((S.PVar("p"),), ACT),)


def test_single_constructor_group():
    m = Matrix(("$t1",), (((S.Nullary("A"),), ACT), ((S.Applied("W", S.Wildcard()),), ACT)))
    assert len(split_groups(m)) == 1


def test_three_groups_in_row_order():
    rows = (((S.PVar("x"),), ACT), ((S.Nullary("A"),), ACT),
            ((S.DynConstraint(S.PVar("y"), "V"),), ACT))
    groups = split_groups(Matrix(("$t1",), rows))
    assert [g.rows for g in groups] == [(r,) for r in rows]
    state = Compiler().compile_matrix(Matrix(("$t0",), rows))
    assert isinstance(state, Choice) and len(state.alts) == 3


def test_dynamic_groups_need_the_same_definition():
    rows = (((S.DynConstraint(S.PVar("a"), "V"),), ACT), ((S.DynConstraint(S.PVar("b"), "W"),), ACT))
    assert len(split_groups(Matrix(("$t1",), rows))) == 2


def test_empty_column_matrix_is_choice_of_states():
    s1, s2 = Accept(S.Var("a")), Accept(S.Var("b"))
    assert Compiler().compile_matrix(Matrix((), (((), s1), ((), s2)))) == Choice((s1, s2))
    assert Compiler().compile_matrix(Matrix((), ())) == FAIL


def test_tuple_then_variables():
    m = Matrix(("$t1",), (((S.PTuple((S.PVar("x"), S.PVar("y"))),), ACT),))
    comp = Compiler()
    comp.counter = 11
    assert comp.compile_matrix(m) == BindLet(("$t12", "$t13"), "$t1",
                                             BindLet("x", "$t12", BindLet("y", "$t13", ACT)))


def test_constructor_cases_in_first_appearance_order():
    rows = (((S.Applied("W", S.PVar("a")),), ACT), ((S.Nullary("A"),), ACT),
            ((S.Applied("W", S.Nullary("A")),), ACT))
    state = Compiler().compile_matrix(Matrix(("$t0",), rows))
    assert isinstance(state, Branch)
    assert [t for t, _ in state.cases] == [AppliedTest("W", "$t1"), NullaryTest("A")]


def test_match_v_is_the_listed_automaton(cbv):
    checked, _ = cbv
    a = build_match_dynamic(checked.spec.dynamics[0])
    assert a.state == Branch("$t0", ((AppliedTest("Lam", "$t1"), Accept(S.Var("$t0"))),))


def test_dynamic_alternatives():
    spec = S.parse_spec("SIGNATURE: type M = A | B | C;; startfrom M;; SPECIFICATION: dynamic W = A | B;;")
    a = build_match_dynamic(spec.dynamics[0])
    assert a.state == Branch("$t0", ((NullaryTest("A"), Accept(S.Var("$t0"))),
                                     (NullaryTest("B"), Accept(S.Var("$t0")))))


LISTS = """
SIGNATURE:
type L = Nil | Cons of int*L;;
startfrom L;;
SPECIFICATION:
dynamic P = Nil | Cons(_, (_:P));;
context K = BOX;;
"""


def test_recursive_dynamic_self_call():
    checked, compiled = load_text(LISTS)
    a = compiled.dynamics["P"]
    calls = [s.call for s in _states(a.state) if isinstance(s, RefLet)]
    assert calls == [MatchDynamic("P", "$t3")]
    t = term(checked, "Cons(1,Cons(2,Nil))")
    assert enumerate_matches(compiled, a, t) == [t]


def test_box_context_is_single_accept():
    _, compiled = load_text(LISTS)
    a = compiled.contexts["K"]
    assert isinstance(a.state, BindLet) and isinstance(a.state.body, Accept)
    assert dump_automaton(a).count("\n") == 3


def test_dump_matches_listing(cbv):
    dump = dump_spec(cbv[1])
    assert canonical(section(dump, "dynamic V")) == canonical(golden("match_V.txt"))
    assert canonical(section(dump, "context H")) == canonical(golden("match_H.txt"))


def test_dump_is_stable(cbv):
    checked, _ = cbv
    assert dump_spec(compile_spec(checked)) == dump_spec(compile_spec(checked))


def test_combined_rule_matrix_root_is_choice(cbv):
    checked, _ = cbv
    comp = Compiler()
    m = init_rule_states(checked.spec.rules, comp, checked.premise_types)
    state = comp.compile_matrix(m)
    assert isinstance(state, Choice)
    kinds = [type(s) for s in state.alts]
    assert kinds == [Branch, RefLet]
    assert state.alts[1].call == MatchContext("H", "$t0")


def test_three_decompositions(cbv):
    checked, compiled = cbv
    t = term(checked, 'App(Lam("x",Var "x"),Lam("z",Var "z"))')
    found = enumerate_matches(compiled, compiled.contexts["H"], t)
    holes = [d.hole for d in found]
    assert holes == [t, t.args[0], t.args[1]]
    assert all(d.fill() == t for d in found)


def test_static_scans_on_corpus(corpus_specs):
    for _, compiled in corpus_specs.values():
        for a in compiled.automata():
            assert unbound_reads(a) == []
            assert duplicate_tests(a.state) == []


def test_scan_detects_unbound_read():
    from slc.compile import Automaton
    a = Automaton("dynamic", "X", BindLet("y", "$t9", Accept(S.Var("y"))))
    assert unbound_reads(a) and unbound_reads(a)[0][1] == ["$t9"]


def _states(state):
    from slc.compile import iter_states
    return list(iter_states(state))


def load_text(text):
    from slc import check_spec, parse_spec
    checked = check_spec(parse_spec(text))
    return checked, compile_spec(checked)


def _head_is_canonical(p):
    return not isinstance(p, (S.Alias, S.Alt, S.TypeConstraint))


@st.composite
def sig_and_pattern(draw):
    sig = draw(signatures())
    return draw(restricted_patterns(sig, 3))


@settings(max_examples=200, deadline=None, suppress_health_check=list(HealthCheck))
@given(sig_and_pattern(), st.integers(0, 2))
def test_preprocess_reaches_a_fixpoint(p, extra_rows):
    rows = tuple(((p,), Accept(S.IntLit(k))) for k in range(1 + extra_rows))
    once = preprocess(Matrix(("$t1",), rows))
    assert all(_head_is_canonical(r[0][0]) for r in once.rows)
    assert preprocess(once) == once
    # Alternatives split in branch order, so rows stay grouped by their source row.
    labels = [r[1] for r in once.rows]
    assert labels == sorted(labels, key=_row_index)


def _row_index(state):
    while isinstance(state, BindLet):
        state = state.body
    return state.action.value
