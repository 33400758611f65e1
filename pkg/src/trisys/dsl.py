"""A small language for multilinear identities in n-ary bracket operations.

Grammar (whitespace-insensitive, ``#`` starts a comment)::

    file     := identity (";" identity)* [";"]
    identity := sum ("=" sum)+
    sum      := term (("+"|"-") term)*  |  "0"
    term     := [INT "*"] atom
    atom     := VAR | "{" sum ("," sum)* "}" ["_" INT]
    VAR      := [a-z][a-z0-9]*

A comment line of the form ``#@ NAME`` labels the identity that follows it.
Bracket arguments may themselves be sums; they are expanded by multilinearity.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence, Union

__all__ = [
    "Var",
    "Bracket",
    "Monomial",
    "Polynomial",
    "IdentityChain",
    "DSLError",
    "DSLSyntaxError",
    "MultilinearityError",
    "SubscriptError",
    "ArityError",
    "parse",
    "parse_polynomial",
    "canonicalize",
    "chain_to_polynomials",
    "format",
    "format_latex",
    "leaves",
    "degree",
    "strip_subscripts",
    "rename",
]


class DSLError(ValueError):
    """Base class for identity-language errors."""


class DSLSyntaxError(DSLError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line = line
        self.col = col


class MultilinearityError(DSLError):
    pass


class SubscriptError(DSLError):
    pass


class ArityError(DSLError):
    pass


# -- monomials -------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Bracket:
    args: tuple
    sub: int | None = None

    @property
    def arity(self) -> int:
        return len(self.args)

    def __str__(self):
        inner = "{" + ",".join(str(a) for a in self.args) + "}"
        return inner if self.sub is None else f"{inner}_{self.sub}"


Monomial = Union[Var, Bracket]


def leaves(m: Monomial) -> list[str]:
    """Variable names in written (left to right) order."""
    if isinstance(m, Var):
        return [m.name]
    out: list[str] = []
    for a in m.args:
        out.extend(leaves(a))
    return out


def degree(m: Monomial) -> int:
    return len(leaves(m))


def _nodes(m: Monomial) -> Iterator[Bracket]:
    if isinstance(m, Bracket):
        yield m
        for a in m.args:
            yield from _nodes(a)


def arities(m: Monomial) -> set[int]:
    return {b.arity for b in _nodes(m)}


def subscripts(m: Monomial) -> list[int | None]:
    return [b.sub for b in _nodes(m)]


def strip_subscripts(m: Monomial) -> Monomial:
    if isinstance(m, Var):
        return m
    return Bracket(tuple(strip_subscripts(a) for a in m.args), None)


def rename(m: Monomial, mapping: Mapping[str, str]) -> Monomial:
    if isinstance(m, Var):
        return Var(mapping.get(m.name, m.name))
    return Bracket(tuple(rename(a, mapping) for a in m.args), m.sub)


def _sort_key(m: Monomial) -> str:
    return str(m)


# -- polynomials -----------------------------------------------------------


class Polynomial:
    """Integer combination of monomials, always stored in canonical order."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, int] | Iterable[tuple[Monomial, int]] = ()):
        acc: dict[Monomial, int] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for m, c in items:
            acc[m] = acc.get(m, 0) + int(c)
        ordered = sorted(((m, c) for m, c in acc.items() if c != 0), key=lambda mc: _sort_key(mc[0]))
        object.__setattr__(self, "terms", tuple(ordered))

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    @classmethod
    def monomial(cls, m: Monomial, c: int = 1) -> "Polynomial":
        return cls([(m, c)])

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def monomials(self) -> list[Monomial]:
        return [m for m, _ in self.terms]

    def variables(self) -> frozenset[str]:
        out: set[str] = set()
        for m, _ in self.terms:
            out.update(leaves(m))
        return frozenset(out)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(list(self.terms) + list(other.terms))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(list(self.terms) + [(m, -c) for m, c in other.terms])

    def __neg__(self) -> "Polynomial":
        return Polynomial([(m, -c) for m, c in self.terms])

    def __mul__(self, k: int) -> "Polynomial":
        return Polynomial([(m, c * k) for m, c in self.terms])

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, Polynomial) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def map_monomials(self, fn) -> "Polynomial":
        return Polynomial([(fn(m), c) for m, c in self.terms])

    def sign_normalized(self) -> "Polynomial":
        """``self`` or ``-self``, whichever has a positive leading coefficient."""
        if self.terms and self.terms[0][1] < 0:
            return -self
        return self

    def __repr__(self):
        return f"Polynomial({format(self)!r})"


def canonicalize(p: Polynomial) -> Polynomial:
    return Polynomial(p.terms)


# -- chains ----------------------------------------------------------------


@dataclass(frozen=True)
class IdentityChain:
    """Members asserted pairwise equal.

    ``var_order`` records first appearance of variables in the first member as
    written, which is what the KP expansion uses to order central arguments.
    """

    members: tuple
    name: str = ""
    var_order: tuple = ()
    meta: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if len(self.members) < 2:
            raise DSLError("an identity chain needs at least two members")
        varsets = {p.variables() for p in self.members if not p.is_zero()}
        if len(varsets) > 1:
            raise MultilinearityError(f"chain {self.name or '?'}: members use different variables {sorted(map(sorted, varsets))}")
        ar: set[int] = set()
        for p in self.members:
            for m in p.monomials():
                ar |= arities(m)
        if len(ar) > 1:
            raise ArityError(f"chain {self.name or '?'}: mixed arities {sorted(ar)}")
        if not self.var_order:
            order: list[str] = []
            for p in self.members:
                for m in p.monomials():
                    for v in leaves(m):
                        if v not in order:
                            order.append(v)
            object.__setattr__(self, "var_order", tuple(order))

    @property
    def arity(self) -> int | None:
        for p in self.members:
            for m in p.monomials():
                a = arities(m)
                if a:
                    return next(iter(a))
        return None

    @property
    def variables(self) -> frozenset[str]:
        return frozenset(self.var_order)

    @property
    def degree(self) -> int:
        return len(self.var_order)

    def with_name(self, name: str) -> "IdentityChain":
        return IdentityChain(self.members, name, self.var_order, self.meta)


def chain_to_polynomials(c: IdentityChain) -> list[Polynomial]:
    return [canonicalize(a - b) for a, b in zip(c.members, c.members[1:])]


# -- formatting ------------------------------------------------------------


def _format_poly(p: Polynomial, mono=str, times: str = "*") -> str:
    if p.is_zero():
        return "0"
    parts = []
    for i, (m, c) in enumerate(p.terms):
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        body = mono(m) if mag == 1 else f"{mag}{times}{mono(m)}"
        if i == 0:
            parts.append(body if sign == "+" else f"-{body}")
        else:
            parts.append(f"{sign} {body}")
    return " ".join(parts)


def format(x) -> str:  # noqa: A001 - mirrors the documented operation name
    if isinstance(x, (Var, Bracket)):
        return str(x)
    if isinstance(x, Polynomial):
        return _format_poly(x)
    if isinstance(x, IdentityChain):
        return " = ".join(_format_poly(p) for p in x.members)
    raise TypeError(f"cannot format {type(x).__name__}")


def _latex_mono(m: Monomial) -> str:
    if isinstance(m, Var):
        return m.name
    inner = "\\{" + ",".join(_latex_mono(a) for a in m.args) + "\\}"
    return inner if m.sub is None else f"{inner}_{{{m.sub}}}"


def format_latex(x) -> str:
    if isinstance(x, (Var, Bracket)):
        return _latex_mono(x)
    if isinstance(x, Polynomial):
        return _format_poly(x, _latex_mono, " ")
    if isinstance(x, IdentityChain):
        return " = ".join(_format_poly(p, _latex_mono, " ") for p in x.members)
    raise TypeError(f"cannot format {type(x).__name__}")


# -- parsing ---------------------------------------------------------------

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r\n]+)|(?P<comment>#[^\n]*)|(?P<int>[0-9]+)|(?P<var>[a-z][a-z0-9]*)|(?P<sym>[{}(),_*+\-=;])"
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise DSLSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        s = m.group()
        col = pos - line_start + 1
        if kind == "comment":
            if s.startswith("#@"):
                toks.append(_Tok("label", s[2:].strip(), line, col))
        elif kind != "ws":
            toks.append(_Tok(kind if kind != "sym" else s, s, line, col))
        for i, ch in enumerate(s):
            if ch == "\n":
                line += 1
                line_start = pos + i + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind: str) -> _Tok:
        t = self.tok
        if t.kind != kind:
            found = t.text or "end of input"
            raise DSLSyntaxError(f"expected {kind!r}, found {found!r}", t.line, t.col)
        return self.next()

    def error(self, msg: str) -> DSLSyntaxError:
        return DSLSyntaxError(msg, self.tok.line, self.tok.col)

    # file := identity (";" identity)* [";"]
    def parse_file(self) -> list[IdentityChain]:
        chains: list[IdentityChain] = []
        pending_label = None
        while True:
            while self.tok.kind == "label":
                pending_label = self.next().text
            if self.tok.kind == "eof":
                break
            name = pending_label or f"id{len(chains) + 1}"
            pending_label = None
            chains.append(self.parse_identity(name))
            while self.tok.kind == "label":
                pending_label = self.next().text
            if self.tok.kind == ";":
                self.next()
                continue
            if self.tok.kind != "eof":
                raise self.error(f"expected ';' or end of input, found {self.tok.text!r}")
        if not chains:
            raise self.error("no identities found")
        return chains

    def parse_identity(self, name: str) -> IdentityChain:
        start = self.tok
        first, order = self.parse_top_sum()
        members = [first]
        if self.tok.kind != "=":
            raise self.error("an identity needs at least one '='")
        while self.tok.kind == "=":
            self.next()
            members.append(self.parse_top_sum()[0])
        try:
            return IdentityChain(tuple(members), name, tuple(order) if order else ())
        except DSLError as e:
            raise type(e)(f"line {start.line}, column {start.col}: {e}") from None

    def parse_top_sum(self):
        start = self.tok
        terms = self.parse_sum()
        order: list[str] = []
        regimes = set()
        for m, _ in terms:
            names = leaves(m)
            if len(set(names)) != len(names):
                dup = sorted({v for v in names if names.count(v) > 1})
                raise MultilinearityError(
                    f"line {start.line}, column {start.col}: repeated variable(s) {', '.join(dup)} in {m}"
                )
            for v in names:
                if v not in order:
                    order.append(v)
            subs = subscripts(m)
            if subs:
                regimes.add(all(s is not None for s in subs) and "sub" or (any(s is not None for s in subs) and "mixed" or "plain"))
        if "mixed" in regimes or len(regimes) > 1:
            raise SubscriptError(f"line {start.line}, column {start.col}: subscripted and unsubscripted brackets mixed")
        p = Polynomial(terms)
        varsets = {frozenset(leaves(m)) for m in p.monomials()}
        if len(varsets) > 1:
            raise MultilinearityError(f"line {start.line}, column {start.col}: monomials use different variable sets")
        return p, order

    # returns list of (monomial, coeff) with bracket sums expanded
    def parse_sum(self) -> list[tuple[Monomial, int]]:
        if self.tok.kind == "int" and self.tok.text == "0" and self.toks[self.i + 1].kind != "*":
            self.next()
            return []
        sign = 1
        if self.tok.kind == "-":
            self.next()
            sign = -1
        elif self.tok.kind == "+":
            self.next()
        out = [(m, c * sign) for m, c in self.parse_term()]
        while self.tok.kind in ("+", "-"):
            s = 1 if self.next().kind == "+" else -1
            out.extend((m, c * s) for m, c in self.parse_term())
        return out

    def parse_term(self) -> list[tuple[Monomial, int]]:
        coeff = 1
        if self.tok.kind == "int":
            coeff = int(self.next().text)
            self.expect("*")
        return [(m, c * coeff) for m, c in self.parse_atom()]

    def parse_atom(self) -> list[tuple[Monomial, int]]:
        t = self.tok
        if t.kind == "var":
            self.next()
            return [(Var(t.text), 1)]
        if t.kind != "{":
            raise self.error(f"expected a variable or '{{', found {t.text or 'end of input'!r}")
        self.next()
        args = [self.parse_sum()]
        while self.tok.kind == ",":
            self.next()
            args.append(self.parse_sum())
        self.expect("}")
        sub = None
        if self.tok.kind == "_":
            self.next()
            st = self.expect("int")
            sub = int(st.text)
            if not 1 <= sub <= len(args):
                raise SubscriptError(
                    f"line {st.line}, column {st.col}: subscript {sub} out of range for arity {len(args)}"
                )
        if len(args) < 2:
            raise ArityError(f"line {t.line}, column {t.col}: a bracket needs at least two arguments")
        # multilinear expansion over sum-valued arguments
        out: list[tuple[tuple, int]] = [((), 1)]
        for arg in args:
            out = [(prefix + (m,), c * k) for prefix, c in out for m, k in arg]
        return [(Bracket(ms, sub), c) for ms, c in out]


def parse(text: str) -> list[IdentityChain]:
    """Parse DSL text into identity chains (see module docstring)."""
    return _Parser(text).parse_file()


def parse_polynomial(text: str) -> Polynomial:
    p = _Parser(text)
    poly, _ = p.parse_top_sum()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r}")
    return poly


def parse_monomial(text: str) -> Monomial:
    poly = parse_polynomial(text)
    if len(poly) != 1 or poly.terms[0][1] != 1:
        raise DSLError(f"{text!r} is not a single monomial")
    return poly.terms[0][0]
