"""Object-language terms: representation, parsing, printing and typing.

A term is a ``Constr`` node, a Python ``str`` (string literal) or a Python
``int`` (integer literal).
"""
from __future__ import annotations

import re

from .errors import Diagnostic, SLSyntaxError

FRESH_NAME_RE = re.compile(r"_g\d+\Z")


class Constr:
    __slots__ = ("name", "args", "_hash")

    def __init__(self, name: str, args=()):
        self.name = name
        self.args = tuple(args)
        self._hash = None

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Constr):
            return NotImplemented
        return self.name == other.name and self.args == other.args

    def __hash__(self):
        h = self._hash
        if h is None:
            h = self._hash = hash((self.name, self.args))
        return h

    def __repr__(self):
        return pretty_term(self)


def size(t) -> int:
    """Number of constructor nodes in ``t``."""
    if isinstance(t, Constr):
        return 1 + sum(size(a) for a in t.args)
    return 0


# ---------------------------------------------------------------------------
# Printing

def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _is_atomic(t) -> bool:
    if isinstance(t, Constr):
        return not t.args
    if isinstance(t, bool):
        return False
    if isinstance(t, int):
        return t >= 0
    return True


def pretty_term(t, sig=None) -> str:
    """Render ``t`` in transcript style: ``Lam("z",Var "z")``."""
    if isinstance(t, str):
        return _quote(t)
    if isinstance(t, bool):
        raise TypeError(f"not a term: {t!r}")
    if isinstance(t, int):
        return str(t)
    if not t.args:
        return t.name
    if len(t.args) == 1:
        (a,) = t.args
        if _is_atomic(a):
            return f"{t.name} {pretty_term(a)}"
        return f"{t.name}({pretty_term(a)})"
    return t.name + "(" + ",".join(pretty_term(a) for a in t.args) + ")"


# ---------------------------------------------------------------------------
# Parsing

_TERM_TOKEN = re.compile(
    r'(?P<ws>\s+)|(?P<string>"(?:[^"\\\n]|\\["\\])*")|(?P<int>-?\d+)'
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)|(?P<op>;;|[(),])"
)


def _tokenize(text: str):
    pos, line, col = 0, 1, 1
    out = []
    while pos < len(text):
        m = _TERM_TOKEN.match(text, pos)
        if m is None:
            raise SLSyntaxError(Diagnostic(line, col, f"unexpected character {text[pos]!r}"))
        kind = m.lastgroup
        value = m.group()
        if kind != "ws":
            out.append((kind, value, line, col))
        nl = value.count("\n")
        if nl:
            line += nl
            col = len(value) - value.rfind("\n")
        else:
            col += len(value)
        pos = m.end()
    out.append(("eof", "", line, col))
    return out


class _TermParser:
    def __init__(self, sig, text):
        self.sig = sig
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise SLSyntaxError(Diagnostic(tok[2], tok[3], msg))

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        tok = self.next()
        if tok[1] != value or tok[0] not in ("op",):
            self.error(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok)
        return tok

    def starts_atom(self):
        kind, value = self.peek()[:2]
        return kind in ("string", "int", "ident") or value == "("

    def term(self):
        kind, value, line, col = tok = self.next()
        if kind == "string":
            s = value[1:-1].replace('\\"', '"').replace("\\\\", "\\")
            if FRESH_NAME_RE.match(s):
                self.error(f"string {value} is reserved for generated names", tok)
            return s
        if kind == "int":
            return int(value)
        if value == "(":
            t = self.term()
            self.expect(")")
            return t
        if kind != "ident":
            self.error(f"expected a term, found {value or 'end of input'!r}", tok)
        info = self.sig.constructor(value)
        if info is None:
            self.error(f"unknown constructor {value}", tok)
        arity = len(info[1])
        if arity == 0:
            return Constr(value)
        if self.peek()[1] == "(":
            self.next()
            args = [self.term()]
            while self.peek()[1] == ",":
                self.next()
                args.append(self.term())
            self.expect(")")
        elif self.starts_atom():
            args = [self.term()]
        else:
            args = []
        if len(args) != arity:
            self.error(f"constructor {value} expects {arity} argument(s), got {len(args)}", tok)
        t = Constr(value, args)
        for k, (a, ty) in enumerate(zip(args, info[1])):
            found = _value_type(self.sig, a)
            if found != ty:
                self.error(f"argument {k + 1} of {value}: expected {ty}, found {found}", tok)
        return t


def _value_type(sig, t) -> str:
    if isinstance(t, bool):
        return "bool"
    if isinstance(t, str):
        return "string"
    if isinstance(t, int):
        return "int"
    return sig.constructor(t.name)[0]


def parse_term(sig, source: str):
    """Parse one ``;;``-terminated term over ``sig``."""
    p = _TermParser(sig, source)
    t = p.term()
    p.expect(";;")
    if p.peek()[0] != "eof":
        p.error("unexpected input after ';;'")
    return t


# ---------------------------------------------------------------------------
# Typing

class TermTypeError(Exception):
    def __init__(self, path, message):
        self.path = tuple(path)
        super().__init__(f"at {'.'.join(map(str, self.path)) or 'root'}: {message}")


def typecheck_term(sig, t, expected: str | None = None, _path=()) -> str:
    """Return the type name of ``t``; raise ``TermTypeError`` naming the path."""
    if isinstance(t, bool):
        found = "bool"
    elif isinstance(t, str):
        found = "string"
    elif isinstance(t, int):
        found = "int"
    elif isinstance(t, Constr):
        info = sig.constructor(t.name)
        if info is None:
            raise TermTypeError(_path, f"unknown constructor {t.name}")
        found, arg_types = info
        if len(arg_types) != len(t.args):
            raise TermTypeError(
                _path, f"{t.name} expects {len(arg_types)} argument(s), got {len(t.args)}")
        for k, (a, ty) in enumerate(zip(t.args, arg_types)):
            typecheck_term(sig, a, ty, _path + (k,))
    else:
        raise TermTypeError(_path, f"not a term: {t!r}")
    if expected is not None and found != expected:
        raise TermTypeError(_path, f"expected {expected}, found {found}")
    return found
