"""AST, lexer, parser and pretty-printer for ``.sl`` specification files."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Union

from .errors import Diagnostic, SLSyntaxError
from .terms import FRESH_NAME_RE


def _loc():
    return field(default=None, compare=False, repr=False)


# ---------------------------------------------------------------------------
# Signature

@dataclass(frozen=True)
class ConstructorDef:
    name: str
    arg_types: tuple = ()
    loc: Optional[tuple] = _loc()


@dataclass(frozen=True)
class TypeDef:
    name: str
    constructors: tuple
    loc: Optional[tuple] = _loc()


@dataclass(frozen=True)
class Signature:
    typedefs: tuple
    start_type: str
    loc: Optional[tuple] = _loc()

    @cached_property
    def _table(self):
        return {c.name: (td.name, c.arg_types) for td in self.typedefs for c in td.constructors}

    def constructor(self, name):
        """``(type name, argument type names)`` for a constructor, or None."""
        return self._table.get(name)

    def constructors_of(self, type_name):
        for td in self.typedefs:
            if td.name == type_name:
                return td.constructors
        return ()


# ---------------------------------------------------------------------------
# Patterns

@dataclass(frozen=True)
class Wildcard:
    loc: Optional[tuple] = _loc()


@dataclass(frozen=True)
class PVar:
    name: str
    loc: Optional[tuple] = _loc()


@dataclass(frozen=True)
class Nullary:
    cname: str
    loc: Optional[tuple] = _loc()


@dataclass(frozen=True)
class Applied:
    cname: str
    arg: "Pattern"
    loc: Optional[tuple] = _loc()


@dataclass(frozen=True)
class PTuple:
    items: tuple
    loc: Optional[tuple] = _loc()


@dataclass(frozen=True)
class Alt:
    left: "Pattern"
    right: "Pattern"
    loc: Optional[tuple] = _loc()


@dataclass(frozen=True)
class Alias:
    pattern: "Pattern"
    name: str
    loc: Optional[tuple] = _loc()


@dataclass(frozen=True)
class TypeConstraint:
    pattern: "Pattern"
    type_name: str
    loc: Optional[tuple] = _loc()


@dataclass(frozen=True)
class DynConstraint:
    pattern: "Pattern"
    dyn: str
    loc: Optional[tuple] = _loc()


@dataclass(frozen=True)
class ContextFilling:
    pattern: "Pattern"
    context: str
    filler: "Pattern"
    loc: Optional[tuple] = _loc()


@dataclass(frozen=True)
class Hole:
    loc: Optional[tuple] = _loc()


Pattern = Union[Wildcard, PVar, Nullary, Applied, PTuple, Alt, Alias,
                TypeConstraint, DynConstraint, ContextFilling, Hole]

# Variables introduced when desugaring bare names inside context arms.
GENERATED_PREFIX = "%"


def is_generated(name: str) -> bool:
    return name.startswith(GENERATED_PREFIX)


def pattern_vars(p) -> list:
    """Variables bound by ``p``, in left-to-right order (Alt: left branch)."""
    out: list = []

    def go(p):
        if isinstance(p, PVar):
            out.append(p.name)
        elif isinstance(p, Applied):
            go(p.arg)
        elif isinstance(p, PTuple):
            for q in p.items:
                go(q)
        elif isinstance(p, Alt):
            go(p.left)
        elif isinstance(p, Alias):
            go(p.pattern)
            out.append(p.name)
        elif isinstance(p, (TypeConstraint, DynConstraint)):
            go(p.pattern)
        elif isinstance(p, ContextFilling):
            go(p.pattern)
            go(p.filler)
    go(p)
    return out


def count_holes(p) -> int:
    if isinstance(p, Hole):
        return 1
    if isinstance(p, Applied):
        return count_holes(p.arg)
    if isinstance(p, PTuple):
        return sum(count_holes(q) for q in p.items)
    if isinstance(p, Alt):
        return count_holes(p.left) + count_holes(p.right)
    if isinstance(p, (Alias, TypeConstraint, DynConstraint)):
        return count_holes(p.pattern)
    if isinstance(p, ContextFilling):
        return count_holes(p.pattern) + count_holes(p.filler)
    return 0


# ---------------------------------------------------------------------------
# Meta-expressions

@dataclass(frozen=True)
class Var:
    name: str
    loc: Optional[tuple] = _loc()


@dataclass(frozen=True)
class StrLit:
    value: str
    loc: Optional[tuple] = _loc()


@dataclass(frozen=True)
class IntLit:
    value: int
    loc: Optional[tuple] = _loc()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    loc: Optional[tuple] = _loc()


@dataclass(frozen=True)
class ConstrApp:
    cname: str
    args: tuple = ()
    loc: Optional[tuple] = _loc()


@dataclass(frozen=True)
class Tuple:
    items: tuple
    loc: Optional[tuple] = _loc()


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple
    loc: Optional[tuple] = _loc()


@dataclass(frozen=True)
class Fill:
    context: str
    arg: "MetaExpr"
    loc: Optional[tuple] = _loc()


@dataclass(frozen=True)
class If:
    cond: "MetaExpr"
    then: "MetaExpr"
    else_: "MetaExpr"
    loc: Optional[tuple] = _loc()


@dataclass(frozen=True)
class Let:
    names: Union[str, tuple]
    value: "MetaExpr"
    body: "MetaExpr"
    loc: Optional[tuple] = _loc()


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "MetaExpr"
    right: "MetaExpr"
    loc: Optional[tuple] = _loc()


MetaExpr = Union[Var, StrLit, IntLit, BoolLit, ConstrApp, Tuple, Call, Fill, If, Let, BinOp]

COMPARISONS = ("=", "<>", "<", "<=", ">", ">=")
ARITHMETIC = ("+", "-", "*")
BUILTINS = {"freshname": 0}


def free_vars(e) -> set:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, (StrLit, IntLit, BoolLit)):
        return set()
    if isinstance(e, (ConstrApp, Call)):
        return set().union(*(free_vars(a) for a in e.args))
    if isinstance(e, Tuple):
        return set().union(*(free_vars(a) for a in e.items))
    if isinstance(e, Fill):
        return {e.context} | free_vars(e.arg)
    if isinstance(e, If):
        return free_vars(e.cond) | free_vars(e.then) | free_vars(e.else_)
    if isinstance(e, Let):
        names = {e.names} if isinstance(e.names, str) else set(e.names)
        return free_vars(e.value) | (free_vars(e.body) - names)
    if isinstance(e, BinOp):
        return free_vars(e.left) | free_vars(e.right)
    raise TypeError(f"not a meta-expression: {e!r}")


# ---------------------------------------------------------------------------
# Definitions

@dataclass(frozen=True)
class Clause:
    pattern: Pattern
    body: MetaExpr
    loc: Optional[tuple] = _loc()


@dataclass(frozen=True)
class AuxFun:
    name: str
    params: tuple
    scrutinee: tuple
    clauses: tuple
    recursive: bool = False
    loc: Optional[tuple] = _loc()


@dataclass(frozen=True)
class DynamicDef:
    name: str
    pattern: Pattern
    loc: Optional[tuple] = _loc()


@dataclass(frozen=True)
class ContextDef:
    name: str
    arms: tuple
    loc: Optional[tuple] = _loc()


@dataclass(frozen=True)
class Axiom:
    name: str
    lhs: Pattern
    cond: Optional[MetaExpr]
    rhs: MetaExpr
    loc: Optional[tuple] = _loc()


@dataclass(frozen=True)
class Inference:
    name: str
    premise_lhs: MetaExpr
    premise_rhs: Pattern
    conclusion_lhs: Pattern
    cond: Optional[MetaExpr]
    conclusion_rhs: MetaExpr
    loc: Optional[tuple] = _loc()


@dataclass(frozen=True)
class Spec:
    signature: Signature
    functions: tuple = ()
    dynamics: tuple = ()
    contexts: tuple = ()
    rules: tuple = ()
    warnings: tuple = field(default=(), compare=False, repr=False)

    @property
    def axioms(self):
        return tuple(r for r in self.rules if isinstance(r, Axiom))

    @property
    def inferences(self):
        return tuple(r for r in self.rules if isinstance(r, Inference))

    def dynamic(self, name):
        return next((d for d in self.dynamics if d.name == name), None)

    def context(self, name):
        return next((c for c in self.contexts if c.name == name), None)

    def function(self, name):
        return next((f for f in self.functions if f.name == name), None)


# ---------------------------------------------------------------------------
# Lexer

KEYWORDS = {
    "SIGNATURE", "SPECIFICATION", "BOX", "type", "of", "and", "startfrom",
    "dynamic", "context", "axiom", "inference", "when", "as", "let", "rec",
    "in", "if", "then", "else", "match", "with", "true", "false",
}

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<sep>-{3,})
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op>\|==>|==>|->|<>|<=|>=|;;|[=<>|(),:*+\-#'])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # 'lident' 'uident' 'string' 'int' 'sep' 'op' 'kw' 'eof'
    value: str
    line: int
    col: int

    @property
    def loc(self):
        return (self.line, self.col)


def tokenize(source: str) -> list:
    toks = []
    pos, line, col = 0, 1, 1
    n = len(source)

    def advance(text):
        nonlocal line, col
        nl = text.count("\n")
        if nl:
            line += nl
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)

    while pos < n:
        if source.startswith("(*", pos):
            start_line, start_col = line, col
            depth, j = 0, pos
            while j < n:
                if source.startswith("(*", j):
                    depth += 1
                    j += 2
                elif source.startswith("*)", j):
                    depth -= 1
                    j += 2
                    if depth == 0:
                        break
                else:
                    j += 1
            if depth:
                raise SLSyntaxError(Diagnostic(start_line, start_col, "unterminated comment"))
            advance(source[pos:j])
            pos = j
            continue
        m = _TOKEN.match(source, pos)
        if m is None:
            if source[pos] == '"':
                raise SLSyntaxError(Diagnostic(line, col, "unterminated string literal"))
            raise SLSyntaxError(Diagnostic(line, col, f"unknown token {source[pos]!r}"))
        kind, text = m.lastgroup, m.group()
        if kind == "string":
            body = text[1:-1]
            bad = next((e for e in re.finditer(r"\\(.)", body, re.S)
                        if e.group(1) not in '"\\'), None)
            if bad:
                raise SLSyntaxError(Diagnostic(
                    line, col + 1 + bad.start(), f"unknown escape {bad.group()!r}"))
        if kind == "ident":
            if text in KEYWORDS:
                kind = "kw"
            elif text == "_":
                kind = "op"
            elif text[0].isupper():
                kind = "uident"
            else:
                kind = "lident"
        if kind != "ws":
            toks.append(Token(kind, text, line, col))
        advance(text)
        pos = m.end()
    toks.append(Token("eof", "", line, col))
    return toks


def _unquote(text: str) -> str:
    return re.sub(r'\\(["\\])', r"\1", text[1:-1])


def quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


# ---------------------------------------------------------------------------
# Parser



class _Parser:
    def __init__(self, source: str):
        self.toks = tokenize(source)
        self.i = 0
        self.warnings: list = []
        self.constructors: set = set()
        self.dynamics, self.contexts, self.functions = self._prescan()
        self.in_arm = False
        self.gen_counts = {"h": 0, "v": 0}

    # -- token helpers -----------------------------------------------------
    def peek(self, k=0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Token:
        tok = self.toks[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def at(self, value, kind=None) -> bool:
        tok = self.peek()
        return tok.value == value and tok.kind in ((kind,) if kind else ("op", "kw", "sep"))

    def accept(self, value) -> bool:
        if self.at(value):
            self.next()
            return True
        return False

    def error(self, message, tok=None):
        tok = tok or self.peek()
        raise SLSyntaxError(Diagnostic(tok.line, tok.col, message))

    def unexpected(self, expected):
        tok = self.peek()
        found = "end of input" if tok.kind == "eof" else repr(tok.value)
        self.error(f"unexpected {found}; expected {' or '.join(expected)}")

    def expect(self, value) -> Token:
        if not self.at(value):
            self.unexpected([repr(value)])
        return self.next()

    def expect_kind(self, kind, what) -> Token:
        if self.peek().kind != kind:
            self.unexpected([what])
        return self.next()

    def expect_name(self, what) -> Token:
        if self.peek().kind not in ("lident", "uident"):
            self.unexpected([what])
        return self.next()

    def _prescan(self):
        dyn, ctx, fun = set(), set(), set()
        prev = prev2 = None
        for k, tok in enumerate(self.toks):
            nxt = self.toks[k + 1] if k + 1 < len(self.toks) else None
            if tok.kind == "kw" and nxt is not None:
                if tok.value == "dynamic":
                    dyn.add(nxt.value)
                elif tok.value == "context":
                    ctx.add(nxt.value)
                elif tok.value == "let" and prev is not None and (
                        prev.value == ";;"
                        or (prev.value == ":" and prev2 is not None
                            and prev2.value == "SPECIFICATION")):
                    target = nxt
                    if nxt.value == "rec" and k + 2 < len(self.toks):
                        target = self.toks[k + 2]
                    fun.add(target.value)
            prev2, prev = prev, tok
        return dyn, ctx, fun

    # -- top level -----------------------------------------------------------
    def spec(self) -> Spec:
        self.expect("SIGNATURE")
        self.expect(":")
        typedefs, start = [], None
        while not self.at("SPECIFICATION"):
            if self.at("type"):
                typedefs.extend(self.typedefs())
            elif self.at("startfrom"):
                tok = self.next()
                if start is not None:
                    self.error("duplicate startfrom", tok)
                start = self.expect_name("a type name").value
                self.expect(";;")
            else:
                self.unexpected(["'type'", "'startfrom'", "'SPECIFICATION'"])
        if start is None:
            self.error("missing 'startfrom' declaration")
        sig = Signature(tuple(typedefs), start)
        self.expect("SPECIFICATION")
        self.expect(":")
        functions, dynamics, contexts, rules = [], [], [], []
        seen: dict = {}

        def register(kind, name, tok):
            key = "rule" if kind in ("axiom", "inference") else kind
            if (key, name) in seen:
                self.error(f"duplicate {kind} name {name}", tok)
            seen[(key, name)] = tok

        while self.peek().kind != "eof":
            tok = self.peek()
            if self.at("#"):
                self.next()
                word = self.expect_kind("lident", "'open'")
                if word.value != "open":
                    self.error(f"unknown directive #{word.value}", word)
                lib = self.expect_kind("string", "a library name")
                self.expect(";;")
                self.warnings.append(Diagnostic(
                    tok.line, tok.col, f"#open {lib.value} ignored", "warning"))
            elif self.at("let"):
                f = self.aux_function()
                register("function", f.name, tok)
                functions.append(f)
            elif self.at("dynamic"):
                d = self.dynamic_def()
                register("dynamic", d.name, tok)
                dynamics.append(d)
            elif self.at("context"):
                c = self.context_def()
                register("context", c.name, tok)
                contexts.append(c)
            elif self.at("axiom"):
                r = self.axiom()
                register("axiom", r.name, tok)
                rules.append(r)
            elif self.at("inference"):
                r = self.inference()
                register("inference", r.name, tok)
                rules.append(r)
            else:
                self.unexpected(["'let'", "'dynamic'", "'context'", "'axiom'",
                                 "'inference'", "'#open'"])
        clash = (self.dynamics & self.contexts) | ((self.dynamics | self.contexts) & self.constructors)
        if clash:
            name = sorted(clash)[0]
            tok = next(t for t in self.toks if t.value == name)
            self.error(f"duplicate definition name {name}", tok)
        return Spec(sig, tuple(functions), tuple(dynamics), tuple(contexts), tuple(rules),
                    warnings=tuple(self.warnings))

    def typedefs(self):
        self.expect("type")
        out = [self.typedef()]
        while self.accept("and"):
            out.append(self.typedef())
        self.expect(";;")
        return out

    def typedef(self):
        if self.at("'") or self.at("("):
            self.error("polymorphic type definitions are not supported")
        name_tok = self.expect_name("a type name")
        if self.at("'"):
            self.error("polymorphic type definitions are not supported")
        self.expect("=")
        self.accept("|")
        cons = [self.constructor_decl()]
        while self.accept("|"):
            cons.append(self.constructor_decl())
        return TypeDef(name_tok.value, tuple(cons), loc=name_tok.loc)

    def constructor_decl(self):
        tok = self.expect_kind("uident", "a constructor name")
        if tok.value in self.constructors:
            self.error(f"duplicate constructor {tok.value}", tok)
        self.constructors.add(tok.value)
        args = []
        if self.accept("of"):
            args.append(self.type_name())
            while self.accept("*"):
                args.append(self.type_name())
        return ConstructorDef(tok.value, tuple(args), loc=tok.loc)

    def type_name(self):
        if self.at("'"):
            self.error("type variables are not supported (monomorphic signatures only)")
        if self.at("("):
            self.error("nested product types are not supported in constructor declarations")
        return self.expect_name("a type name").value

    # -- definitions ---------------------------------------------------------
    def aux_function(self) -> AuxFun:
        tok = self.expect("let")
        recursive = self.accept("rec")
        name = self.expect_kind("lident", "a function name").value
        if name in BUILTINS:
            self.error(f"cannot redefine builtin {name}", tok)
        if self.at("("):
            self.next()
            params = []
            if not self.at(")"):
                params.append(self.expect_kind("lident", "a parameter").value)
                while self.accept(","):
                    params.append(self.expect_kind("lident", "a parameter").value)
            self.expect(")")
        else:
            params = [self.expect_kind("lident", "a parameter").value]
        if len(set(params)) != len(params):
            self.error(f"duplicate parameter in {name}", tok)
        self.expect("=")
        if self.at("match"):
            mtok = self.next()
            if self.accept("("):
                scrut = [self.expect_kind("lident", "a parameter").value]
                while self.accept(","):
                    scrut.append(self.expect_kind("lident", "a parameter").value)
                self.expect(")")
            else:
                scrut = [self.expect_kind("lident", "a parameter").value]
            for s in scrut:
                if s not in params:
                    self.error(f"match scrutinee {s} is not a parameter of {name}", mtok)
            self.expect("with")
            self.accept("|")
            clauses = [self.clause()]
            while self.accept("|"):
                clauses.append(self.clause())
        else:
            scrut = []
            body = self.expr()
            clauses = [Clause(Wildcard(), body)]
        self.expect(";;")
        return AuxFun(name, tuple(params), tuple(scrut), tuple(clauses), recursive, loc=tok.loc)

    def clause(self) -> Clause:
        tok = self.peek()
        p = self.pattern()
        self.expect("->")
        return Clause(p, self.expr(), loc=tok.loc)

    def dynamic_def(self) -> DynamicDef:
        tok = self.expect("dynamic")
        name = self.expect_kind("uident", "a dynamic name").value
        self.expect("=")
        p = self.pattern()
        self.expect(";;")
        return DynamicDef(name, p, loc=tok.loc)

    def context_def(self) -> ContextDef:
        tok = self.expect("context")
        name = self.expect_kind("uident", "a context name").value
        self.expect("=")
        self.in_arm = True
        self.gen_counts = {"h": 0, "v": 0}
        try:
            self.accept("|")
            arms = [self.arm(name)]
            while self.accept("|"):
                arms.append(self.arm(name))
        finally:
            self.in_arm = False
        self.expect(";;")
        return ContextDef(name, tuple(arms), loc=tok.loc)

    def arm(self, context: str):
        tok = self.peek()
        p = self.app_pattern()
        while self.accept("as"):
            p = Alias(p, self.expect_kind("lident", "a variable").value, loc=tok.loc)
        holes = count_holes(p)
        if holes != 1:
            self.error(f"context {context}: context arm has {holes} holes", tok)
        return p

    def axiom(self) -> Axiom:
        tok = self.expect("axiom")
        name = self.expect_name("a rule name").value
        self.expect(":")
        lhs = self.pattern()
        cond = self.expr() if self.accept("when") else None
        self.expect("==>")
        rhs = self.expr()
        self.expect(";;")
        return Axiom(name, lhs, cond, rhs, loc=tok.loc)

    def inference(self) -> Inference:
        tok = self.expect("inference")
        name = self.expect_name("a rule name").value
        self.expect(":")
        premise_lhs = self.expr()
        self.expect("==>")
        premise_rhs = self.pattern()
        self.expect_kind("sep", "'---'")
        conclusion = self.pattern()
        cond = self.expr() if self.accept("when") else None
        self.expect("|==>")
        rhs = self.expr()
        self.expect(";;")
        return Inference(name, premise_lhs, premise_rhs, conclusion, cond, rhs, loc=tok.loc)

    # -- patterns ------------------------------------------------------------
    def pattern(self):
        tok = self.peek()
        p = self.alt_pattern()
        while self.accept("as"):
            p = Alias(p, self.expect_kind("lident", "a variable").value, loc=tok.loc)
        return p

    def alt_pattern(self):
        tok = self.peek()
        p = self.app_pattern()
        while self.at("|"):
            self.next()
            p = Alt(p, self.app_pattern(), loc=tok.loc)
        return p

    def starts_pattern_atom(self) -> bool:
        tok = self.peek()
        if tok.kind in ("lident", "uident"):
            return True
        return tok.value in ("_", "(", "BOX") and tok.kind in ("op", "kw")

    def _generated(self, kind):
        self.gen_counts[kind] += 1
        return f"{GENERATED_PREFIX}{kind}{self.gen_counts[kind]}"

    def app_pattern(self):
        tok = self.peek()
        if tok.kind == "uident":
            self.next()
            name = tok.value
            if name in self.dynamics:
                var = PVar(self._generated("v"), loc=tok.loc) if self.in_arm else Wildcard(loc=tok.loc)
                return DynConstraint(var, name, loc=tok.loc)
            if name in self.contexts:
                if not self.in_arm:
                    self.error(f"context {name} used without a filler; write (h:{name}) p", tok)
                return ContextFilling(PVar(self._generated("h"), loc=tok.loc), name,
                                      Hole(loc=tok.loc), loc=tok.loc)
            if name not in self.constructors:
                self.error(f"unknown constructor {name}", tok)
            if self.starts_pattern_atom():
                arg = self.atom_pattern()
                if isinstance(arg, _Constraint):
                    arg = self._resolve_constraint(arg)
                return Applied(name, arg, loc=tok.loc)
            return Nullary(name, loc=tok.loc)
        p = self.atom_pattern()
        if isinstance(p, _Constraint):
            return self._resolve_constraint(p)
        return p

    def _resolve_constraint(self, c):
        if c.name in self.contexts:
            if not self.starts_pattern_atom():
                self.error(f"context constraint ({c.name}) needs a filler pattern", c.tok)
            return ContextFilling(c.inner, c.name, self.app_pattern(), loc=c.tok.loc)
        if c.name in self.dynamics:
            return DynConstraint(c.inner, c.name, loc=c.tok.loc)
        self.error(f"unknown dynamic or context name {c.name} "
                   f"(use '(p : type {c.name})' for a type constraint)", c.tok)

    def atom_pattern(self):
        tok = self.next()
        if tok.value == "_" and tok.kind == "op":
            return Wildcard(loc=tok.loc)
        if tok.kind == "lident":
            return PVar(tok.value, loc=tok.loc)
        if tok.value == "BOX" and tok.kind == "kw":
            if not self.in_arm:
                self.error("BOX is only allowed in context definitions", tok)
            return Hole(loc=tok.loc)
        if tok.kind == "uident":
            self.i -= 1
            name = tok.value
            if name in self.dynamics or name in self.contexts:
                return self.app_pattern()
            self.next()
            if name not in self.constructors:
                self.error(f"unknown constructor {name}", tok)
            return Nullary(name, loc=tok.loc)
        if tok.value == "(" and tok.kind == "op":
            first = self.pattern()
            if self.accept(","):
                items = [first, self.pattern()]
                while self.accept(","):
                    items.append(self.pattern())
                self.expect(")")
                return PTuple(tuple(items), loc=tok.loc)
            if self.accept(":"):
                if self.accept("type"):
                    tname = self.expect_name("a type name").value
                    self.expect(")")
                    return TypeConstraint(first, tname, loc=tok.loc)
                name_tok = self.expect_kind("uident", "a dynamic or context name")
                self.expect(")")
                if not isinstance(first, (Wildcard, PVar)):
                    self.error(f"the pattern constrained by {name_tok.value} must be "
                               "a wildcard or a variable", tok)
                c = _Constraint(first, name_tok.value, tok)
                if self.starts_pattern_atom() or name_tok.value in self.contexts:
                    return c
                return self._resolve_constraint(c)
            self.expect(")")
            return first
        self.i -= 1
        self.unexpected(["a pattern"])

    # -- meta-expressions ----------------------------------------------------
    def expr(self):
        tok = self.peek()
        if self.accept("if"):
            c = self.expr()
            self.expect("then")
            a = self.expr()
            self.expect("else")
            b = self.expr()
            return If(c, a, b, loc=tok.loc)
        if self.accept("let"):
            if self.accept("("):
                names = [self.expect_kind("lident", "a variable").value]
                while self.accept(","):
                    names.append(self.expect_kind("lident", "a variable").value)
                self.expect(")")
                if len(names) < 2:
                    self.error("tuple binding needs at least two names", tok)
                bound = tuple(names)
            else:
                bound = self.expect_kind("lident", "a variable").value
            self.expect("=")
            value = self.expr()
            self.expect("in")
            return Let(bound, value, self.expr(), loc=tok.loc)
        return self.cmp_expr()

    def cmp_expr(self):
        left = self.sum_expr()
        tok = self.peek()
        if tok.kind == "op" and tok.value in COMPARISONS:
            self.next()
            return BinOp(tok.value, left, self.sum_expr(), loc=tok.loc)
        return left

    def sum_expr(self):
        left = self.prod_expr()
        while self.peek().kind == "op" and self.peek().value in ("+", "-"):
            tok = self.next()
            left = BinOp(tok.value, left, self.prod_expr(), loc=tok.loc)
        return left

    def prod_expr(self):
        left = self.app_expr()
        while self.at("*"):
            tok = self.next()
            left = BinOp("*", left, self.app_expr(), loc=tok.loc)
        return left

    def starts_arg_atom(self) -> bool:
        tok = self.peek()
        return (tok.kind in ("lident", "uident", "string", "int")
                or (tok.kind == "kw" and tok.value in ("true", "false"))
                or (tok.kind == "op" and tok.value == "("))

    def arguments(self):
        if self.at("("):
            self.next()
            args = []
            if not self.at(")"):
                args.append(self.expr())
                while self.accept(","):
                    args.append(self.expr())
            self.expect(")")
            return args
        if self.starts_arg_atom():
            return [self.atom_expr()]
        return None

    def app_expr(self):
        tok = self.peek()
        if tok.kind == "uident":
            self.next()
            if tok.value not in self.constructors:
                self.error(f"unknown constructor {tok.value}", tok)
            args = self.arguments() or []
            return ConstrApp(tok.value, tuple(args), loc=tok.loc)
        if tok.kind == "lident":
            self.next()
            args = self.arguments()
            if args is None:
                return Var(tok.value, loc=tok.loc)
            if tok.value in self.functions or tok.value in BUILTINS:
                return Call(tok.value, tuple(args), loc=tok.loc)
            if len(args) == 0:
                self.error(f"{tok.value} is not a function", tok)
            arg = args[0] if len(args) == 1 else Tuple(tuple(args), loc=tok.loc)
            return Fill(tok.value, arg, loc=tok.loc)
        return self.atom_expr()

    def atom_expr(self):
        tok = self.next()
        if tok.kind == "lident":
            return Var(tok.value, loc=tok.loc)
        if tok.kind == "uident":
            if tok.value not in self.constructors:
                self.error(f"unknown constructor {tok.value}", tok)
            return ConstrApp(tok.value, (), loc=tok.loc)
        if tok.kind == "string":
            s = _unquote(tok.value)
            if FRESH_NAME_RE.match(s):
                self.error(f"string {tok.value} is reserved for generated names", tok)
            return StrLit(s, loc=tok.loc)
        if tok.kind == "int":
            return IntLit(int(tok.value), loc=tok.loc)
        if tok.kind == "kw" and tok.value in ("true", "false"):
            return BoolLit(tok.value == "true", loc=tok.loc)
        if tok.kind == "op" and tok.value == "-" and self.peek().kind == "int":
            return IntLit(-int(self.next().value), loc=tok.loc)
        if tok.kind == "op" and tok.value == "(":
            first = self.expr()
            if self.accept(","):
                items = [first, self.expr()]
                while self.accept(","):
                    items.append(self.expr())
                self.expect(")")
                return Tuple(tuple(items), loc=tok.loc)
            self.expect(")")
            return first
        self.i -= 1
        self.unexpected(["an expression"])


@dataclass
class _Constraint:
    inner: Pattern
    name: str
    tok: Token


def parse_spec(source: str) -> Spec:
    """Parse ``.sl`` text. Performs no type checking."""
    return _Parser(source).spec()


# ---------------------------------------------------------------------------
# Pretty-printing

def _pattern_atomic(p) -> bool:
    if isinstance(p, (Wildcard, PVar, Nullary, Hole, PTuple, TypeConstraint)):
        return True
    if isinstance(p, DynConstraint):
        return True
    if isinstance(p, ContextFilling):
        return _is_bare_context(p)
    return False


def _is_bare_context(p) -> bool:
    return (isinstance(p.pattern, PVar) and is_generated(p.pattern.name)
            and isinstance(p.filler, Hole))


def pretty_pattern(p, level: int = 0) -> str:
    """Levels: 0 full (as), 1 alternatives, 2 application, 3 atom."""
    if isinstance(p, Wildcard):
        return "_"
    if isinstance(p, PVar):
        return p.name
    if isinstance(p, Nullary):
        return p.cname
    if isinstance(p, Hole):
        return "BOX"
    if isinstance(p, PTuple):
        return "(" + ", ".join(pretty_pattern(q) for q in p.items) + ")"
    if isinstance(p, TypeConstraint):
        return f"({pretty_pattern(p.pattern)} : type {p.type_name})"
    if isinstance(p, DynConstraint):
        if isinstance(p.pattern, PVar) and is_generated(p.pattern.name):
            return p.dyn
        return f"({pretty_pattern(p.pattern)}:{p.dyn})"
    if isinstance(p, ContextFilling):
        if _is_bare_context(p):
            return p.context
        s = f"({pretty_pattern(p.pattern)}:{p.context}) {pretty_pattern(p.filler, 2)}"
        return s if level <= 2 else f"({s})"
    if isinstance(p, Applied):
        if isinstance(p.arg, PTuple):
            s = p.cname + pretty_pattern(p.arg)
        elif _pattern_atomic(p.arg):
            s = f"{p.cname} {pretty_pattern(p.arg, 3)}"
        else:
            s = f"{p.cname}({pretty_pattern(p.arg)})"
        return s if level <= 2 else f"({s})"
    if isinstance(p, Alt):
        s = f"{pretty_pattern(p.left, 1)} | {pretty_pattern(p.right, 2)}"
        return s if level <= 1 else f"({s})"
    if isinstance(p, Alias):
        s = f"{pretty_pattern(p.pattern, 0)} as {p.name}"
        return s if level == 0 else f"({s})"
    raise TypeError(f"not a pattern: {p!r}")


def _meta_atomic(e) -> bool:
    if isinstance(e, (Var, StrLit, BoolLit, Tuple)):
        return True
    if isinstance(e, IntLit):
        return e.value >= 0
    if isinstance(e, ConstrApp):
        return not e.args
    return False


def pretty_meta(e, level: int = 0) -> str:
    """Levels: 0 if/let, 1 comparison, 2 sum, 3 product, 4 application, 5 atom."""
    if isinstance(e, Var):
        return e.name
    if isinstance(e, StrLit):
        return quote(e.value)
    if isinstance(e, IntLit):
        return str(e.value) if e.value >= 0 else f"(-{-e.value})"
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Tuple):
        return "(" + ", ".join(pretty_meta(a) for a in e.items) + ")"
    if isinstance(e, ConstrApp):
        if not e.args:
            return e.cname
        if len(e.args) == 1 and _meta_atomic(e.args[0]) and not isinstance(e.args[0], Tuple):
            s = f"{e.cname} {pretty_meta(e.args[0], 5)}"
        else:
            s = e.cname + "(" + ", ".join(pretty_meta(a) for a in e.args) + ")"
        return s if level <= 4 else f"({s})"
    if isinstance(e, Call):
        s = e.func + "(" + ", ".join(pretty_meta(a) for a in e.args) + ")"
        return s if level <= 4 else f"({s})"
    if isinstance(e, Fill):
        if _meta_atomic(e.arg):
            s = f"{e.context} {pretty_meta(e.arg, 5)}"
        else:
            s = f"{e.context} ({pretty_meta(e.arg)})"
        return s if level <= 4 else f"({s})"
    if isinstance(e, BinOp):
        if e.op in COMPARISONS:
            s, mine = f"{pretty_meta(e.left, 2)} {e.op} {pretty_meta(e.right, 2)}", 1
        elif e.op in ("+", "-"):
            s, mine = f"{pretty_meta(e.left, 2)} {e.op} {pretty_meta(e.right, 3)}", 2
        else:
            s, mine = f"{pretty_meta(e.left, 3)} * {pretty_meta(e.right, 4)}", 3
        return s if level <= mine else f"({s})"
    if isinstance(e, If):
        s = (f"if {pretty_meta(e.cond)} then {pretty_meta(e.then)} "
             f"else {pretty_meta(e.else_)}")
        return s if level == 0 else f"({s})"
    if isinstance(e, Let):
        bound = e.names if isinstance(e.names, str) else "(" + ", ".join(e.names) + ")"
        s = f"let {bound} = {pretty_meta(e.value)} in {pretty_meta(e.body)}"
        return s if level == 0 else f"({s})"
    raise TypeError(f"not a meta-expression: {e!r}")


def pretty_rule(r) -> str:
    if isinstance(r, Axiom):
        cond = f" when {pretty_meta(r.cond)}" if r.cond is not None else ""
        return f"axiom {r.name}: {pretty_pattern(r.lhs)}{cond} ==> {pretty_meta(r.rhs)};;"
    cond = f" when {pretty_meta(r.cond)}" if r.cond is not None else ""
    return (f"inference {r.name}:\n"
            f"  {pretty_meta(r.premise_lhs)} ==> {pretty_pattern(r.premise_rhs)}\n"
            f"  -------------------\n"
            f"  {pretty_pattern(r.conclusion_lhs)}{cond} |==> {pretty_meta(r.conclusion_rhs)};;")


def _pretty_function(f: AuxFun) -> str:
    head = "let rec " if f.recursive else "let "
    head += f"{f.name} ({', '.join(f.params)}) ="
    if not f.scrutinee:
        (clause,) = f.clauses
        return f"{head}\n  {pretty_meta(clause.body)};;"
    scrut = f.scrutinee[0] if len(f.scrutinee) == 1 else "(" + ", ".join(f.scrutinee) + ")"
    lines = [head, f"  match {scrut} with"]
    for k, c in enumerate(f.clauses):
        bar = "    " if k == 0 else "  | "
        lines.append(f"{bar}{pretty_pattern(c.pattern)} -> {pretty_meta(c.body)}")
    return "\n".join(lines) + ";;"


def _pretty_arm(p) -> str:
    if isinstance(p, Alias):
        return f"{_pretty_arm(p.pattern)} as {p.name}"
    return pretty_pattern(p, 2)


def pretty_signature(sig: Signature) -> str:
    lines = []
    for td in sig.typedefs:
        cons = []
        for c in td.constructors:
            cons.append(c.name + (" of " + "*".join(c.arg_types) if c.arg_types else ""))
        lines.append(f"type {td.name} = {' | '.join(cons)};;")
    lines.append(f"startfrom {sig.start_type};;")
    return "\n".join(lines)


def pretty_spec(spec: Spec) -> str:
    """Render ``spec`` as ``.sl`` text that re-parses to an equal AST."""
    out = ["SIGNATURE:", pretty_signature(spec.signature), "", "SPECIFICATION:"]
    for f in spec.functions:
        out.append(_pretty_function(f))
    for d in spec.dynamics:
        out.append(f"dynamic {d.name} = {pretty_pattern(d.pattern)};;")
    for c in spec.contexts:
        arms = " | ".join(_pretty_arm(a) for a in c.arms)
        out.append(f"context {c.name} = {arms};;")
    for r in spec.rules:
        out.append(pretty_rule(r))
    return "\n".join(out) + "\n"
