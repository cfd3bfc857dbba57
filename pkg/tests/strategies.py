"""Hypothesis strategies: random specification ASTs and random terms."""
from hypothesis import strategies as st

from slc import syntax as S
from slc.terms import Constr

VARS = ["a", "b", "c", "x'", "t1"]
FUNCS = ["f", "g"]
TYPE_NAMES = ["T", "U"]
CONS_NAMES = ["A", "B", "Cc", "Dd", "Ee", "Ff"]


@st.composite
def signatures(draw):
    ntypes = draw(st.integers(1, 2))
    types = TYPE_NAMES[:ntypes]
    names = list(CONS_NAMES)
    typedefs = []
    for ty in types:
        count = draw(st.integers(1, 3))
        cons = []
        for _ in range(count):
            arity = draw(st.integers(0, 3))
            args = tuple(draw(st.sampled_from(types + ["string", "int"])) for _ in range(arity))
            cons.append(S.ConstructorDef(names.pop(0), args))
        typedefs.append(S.TypeDef(ty, tuple(cons)))
    return S.Signature(tuple(typedefs), types[0])


def _constructors(sig):
    return [c for td in sig.typedefs for c in td.constructors]


def restricted_patterns(sig, depth=2):
    cons = _constructors(sig)
    leaves = st.one_of(st.just(S.Wildcard()), st.sampled_from(VARS).map(S.PVar),
                       st.sampled_from([S.Nullary(c.name) for c in cons]))
    if depth == 0:
        return leaves

    sub = restricted_patterns(sig, depth - 1)

    @st.composite
    def applied(draw):
        c = draw(st.sampled_from([c for c in cons if c.arg_types] or cons))
        if not c.arg_types:
            return S.Nullary(c.name)
        if len(c.arg_types) == 1:
            return S.Applied(c.name, draw(sub))
        return S.Applied(c.name, S.PTuple(tuple(draw(sub) for _ in c.arg_types)))

    return st.one_of(
        leaves, applied(),
        st.tuples(sub, sub).map(lambda lr: S.Alt(*lr)),
        st.tuples(sub, st.sampled_from(VARS)).map(lambda pv: S.Alias(*pv)),
        st.tuples(sub, st.sampled_from(TYPE_NAMES[:len(sig.typedefs)])).map(
            lambda pt: S.TypeConstraint(*pt)),
    )


def patterns(sig, dyns, ctxs, depth=2):
    base = restricted_patterns(sig, depth)
    extras = [base]
    if dyns:
        extras.append(st.tuples(st.sampled_from([S.Wildcard(), S.PVar("v")]),
                                st.sampled_from(dyns)).map(lambda pd: S.DynConstraint(*pd)))
    if ctxs:
        extras.append(st.tuples(st.sampled_from(ctxs), restricted_patterns(sig, 1)).map(
            lambda cf: S.ContextFilling(S.PVar("h"), cf[0], cf[1])))
    return st.one_of(*extras)


def exprs(sig, depth=3):
    cons = _constructors(sig)
    leaves = st.one_of(
        st.sampled_from(VARS).map(S.Var),
        st.text(alphabet="abz \"\\", max_size=4).map(S.StrLit),
        st.integers(-5, 20).map(S.IntLit),
        st.booleans().map(S.BoolLit),
        st.sampled_from([S.ConstrApp(c.name) for c in cons if not c.arg_types] or [S.Var("a")]),
        st.just(S.Call("freshname", ())),
    )
    if depth == 0:
        return leaves
    sub = exprs(sig, depth - 1)

    @st.composite
    def constr(draw):
        c = draw(st.sampled_from(cons))
        return S.ConstrApp(c.name, tuple(draw(sub) for _ in c.arg_types))

    return st.one_of(
        leaves, constr(),
        st.lists(sub, min_size=2, max_size=3).map(lambda xs: S.Tuple(tuple(xs))),
        st.tuples(st.sampled_from(FUNCS), sub, sub).map(lambda t: S.Call(t[0], (t[1], t[2]))),
        sub.map(lambda e: S.Fill("h", e)),
        st.tuples(sub, sub, sub).map(lambda t: S.If(*t)),
        st.tuples(st.sampled_from(VARS), sub, sub).map(lambda t: S.Let(*t)),
        st.tuples(sub, sub).map(lambda t: S.Let(("a", "b"), *t)),
        st.tuples(st.sampled_from(S.COMPARISONS + S.ARITHMETIC), sub, sub).map(
            lambda t: S.BinOp(*t)),
    )


@st.composite
def context_arms(draw, sig, dyns, ctxs, counts):
    """One arm in the shape the parser produces, naming generated variables in order."""
    cons = [c for c in _constructors(sig) if c.arg_types]

    def carrier(depth):
        options = ["hole"] + (["bare"] if ctxs else []) + (["app"] if cons and depth else [])
        kind = draw(st.sampled_from(options))
        if kind == "hole":
            return S.Hole()
        if kind == "bare":
            counts["h"] += 1
            return S.ContextFilling(S.PVar(f"%h{counts['h']}"), draw(st.sampled_from(ctxs)), S.Hole())
        c = draw(st.sampled_from(cons))
        k = draw(st.integers(0, len(c.arg_types) - 1))
        items = []
        for i in range(len(c.arg_types)):
            items.append(carrier(depth - 1) if i == k else filler())
        return S.Applied(c.name, items[0] if len(items) == 1 else S.PTuple(tuple(items)))

    def filler():
        options = ["wild", "var"] + (["dyn"] if dyns else [])
        kind = draw(st.sampled_from(options))
        if kind == "wild":
            return S.Wildcard()
        if kind == "var":
            return S.PVar(draw(st.sampled_from(VARS)))
        counts["v"] += 1
        return S.DynConstraint(S.PVar(f"%v{counts['v']}"), draw(st.sampled_from(dyns)))

    arm = carrier(2)
    if draw(st.booleans()) and not isinstance(arm, S.Hole):
        arm = S.Alias(arm, "w")
    return arm


@st.composite
def specs(draw):
    sig = draw(signatures())
    dyns = ["V", "W"][:draw(st.integers(0, 2))]
    ctxs = ["H", "K"][:draw(st.integers(0, 2))]
    functions = []
    for name in FUNCS[:draw(st.integers(0, 2))]:
        form = draw(st.sampled_from(["plain", "one", "two"]))
        if form == "plain":
            functions.append(S.AuxFun(name, ("a", "b"), (), (S.Clause(S.Wildcard(), draw(exprs(sig, 2))),),
                                      draw(st.booleans())))
            continue
        scrut = ("a",) if form == "one" else ("a", "b")
        clauses = []
        for _ in range(draw(st.integers(1, 3))):
            p = draw(restricted_patterns(sig, 2))
            if form == "two":
                p = S.PTuple((p, draw(restricted_patterns(sig, 1))))
            clauses.append(S.Clause(p, draw(exprs(sig, 2))))
        functions.append(S.AuxFun(name, ("a", "b"), scrut, tuple(clauses), draw(st.booleans())))
    # Functions must exist for every call the expression strategy may produce.
    names = {f.name for f in functions}
    for name in FUNCS:
        if name not in names:
            functions.append(S.AuxFun(name, ("a", "b"), (), (S.Clause(S.Wildcard(), S.Var("a")),)))
    dynamics = tuple(S.DynamicDef(d, draw(restricted_patterns(sig, 2))) for d in dyns)
    contexts = []
    for c in ctxs:
        counts = {"h": 0, "v": 0}
        arms = tuple(draw(context_arms(sig, dyns, ctxs, counts)) for _ in range(draw(st.integers(1, 3))))
        contexts.append(S.ContextDef(c, arms))
    rules = []
    for k in range(draw(st.integers(0, 3))):
        cond = draw(st.one_of(st.none(), exprs(sig, 1)))
        if draw(st.booleans()):
            rules.append(S.Axiom(f"ax{k}", draw(patterns(sig, dyns, ctxs)), cond, draw(exprs(sig))))
        else:
            rules.append(S.Inference(f"inf{k}", draw(exprs(sig, 2)), draw(restricted_patterns(sig, 1)),
                                     draw(patterns(sig, dyns, ctxs)), cond, draw(exprs(sig))))
    return S.Spec(sig, tuple(functions), dynamics, tuple(contexts), tuple(rules))


def terms(sig, type_name, depth=4, strings=("x", "y", "q r", 'a"b'), ints=(-3, 0, 1, 42)):
    """Well-typed random terms of ``type_name``."""
    if type_name == "string":
        return st.sampled_from(strings)
    if type_name == "int":
        return st.sampled_from(ints)
    cons = list(sig.constructors_of(type_name))
    leaves = [c for c in cons if all(a in ("string", "int") for a in c.arg_types)]

    def build(c, d):
        return st.tuples(*[terms(sig, a, d, strings, ints) for a in c.arg_types]).map(
            lambda args, c=c: Constr(c.name, args))

    pool = cons if depth > 0 else (leaves or cons[:1])
    if depth <= 0 and not leaves:
        return st.nothing()
    return st.one_of(*[build(c, depth - 1) for c in pool])
