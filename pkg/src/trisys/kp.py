"""Expansion of an identity in one n-ary operation into n subscripted operations.

Part 1 picks each variable in turn as the *central argument* and labels every
bracket by where that variable sits relative to it.  Part 2 adds the
interchange identities saying the n operations agree when nested in a
non-matching argument slot.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .dsl import (
    Bracket,
    DSLError,
    IdentityChain,
    Monomial,
    Polynomial,
    SubscriptError,
    Var,
    chain_to_polynomials,
    leaves,
    rename,
    subscripts,
)

__all__ = [
    "KPError",
    "KPOutput",
    "subscript_monomial",
    "kp_part1",
    "kp_part2",
    "kp_apply",
    "chain_key",
    "compare_chain_sets",
]


class KPError(DSLError):
    pass


def _subscript(m: Monomial, pos: int, offset: int) -> tuple[Monomial, int]:
    """Label ``m`` (whose first leaf sits at ``offset``); returns (new, width)."""
    if isinstance(m, Var):
        return m, 1
    n = m.arity
    new_args = []
    spans = []
    cur = offset
    for a in m.args:
        na, w = _subscript(a, pos, cur)
        new_args.append(na)
        spans.append((cur, cur + w))
        cur += w
    sub = None
    for j, (lo, hi) in enumerate(spans, start=1):
        if lo <= pos < hi:
            sub = j
            break
    if sub is None:
        sub = 1 if pos < offset else n
    return Bracket(tuple(new_args), sub), cur - offset


def subscript_monomial(m: Monomial, central: str) -> Monomial:
    """Assign every bracket the subscript dictated by the central variable."""
    names = leaves(m)
    if central not in names:
        raise KPError(f"central argument {central!r} does not occur in {m}")
    if any(s is not None for s in subscripts(m)):
        raise SubscriptError(f"{m} is already subscripted")
    out, _ = _subscript(m, names.index(central), 0)
    return out


def _check_input(chain: IdentityChain) -> int:
    n = chain.arity
    if n is None:
        raise KPError(f"chain {chain.name}: no bracket operations to expand")
    for p in chain.members:
        for m in p.monomials():
            if any(s is not None for s in subscripts(m)):
                raise SubscriptError(f"chain {chain.name}: KP input must be unsubscripted, got {m}")
    return n


def kp_part1(chain: IdentityChain) -> list[IdentityChain]:
    """One chain per central argument, in first-appearance order."""
    _check_input(chain)
    out = []
    for v in chain.var_order:
        members = tuple(p.map_monomials(lambda m, v=v: subscript_monomial(m, v)) for p in chain.members)
        out.append(IdentityChain(members, f"{chain.name}[{v}]", chain.var_order))
    return out


def kp_part2(n: int, positions: Iterable[int] | None = None) -> list[IdentityChain]:
    """Interchange chains: for outer subscript j and nesting slot i != j,
    ``{a1,..,{b1..bn}_k,..}_j`` over k = 1..n.

    ``positions`` restricts the nesting slots i (default: all of 1..n).
    """
    if n < 2:
        raise KPError(f"arity must be at least 2, got {n}")
    slots = list(range(1, n + 1)) if positions is None else sorted(set(positions))
    for i in slots:
        if not 1 <= i <= n:
            raise KPError(f"nesting slot {i} out of range 1..{n}")
    outer_vars = [Var(f"a{t}") for t in range(1, n)]
    inner_vars = tuple(Var(f"b{t}") for t in range(1, n + 1))
    out = []
    for j in range(1, n + 1):
        for i in slots:
            if i == j:
                continue
            members = []
            for k in range(1, n + 1):
                args = outer_vars[: i - 1] + [Bracket(inner_vars, k)] + outer_vars[i - 1 :]
                members.append(Polynomial.monomial(Bracket(tuple(args), j)))
            out.append(IdentityChain(tuple(members), f"part2[j={j},i={i}]"))
    return out


def _alpha_normal(chain: IdentityChain) -> IdentityChain:
    """Rename variables to x1, x2, ... by leaf order when every monomial of
    the chain has the same leaf order; otherwise leave names alone."""
    orders = {tuple(leaves(m)) for p in chain.members for m in p.monomials()}
    if len(orders) != 1:
        return chain
    (order,) = orders
    mapping = {v: f"x{t}" for t, v in enumerate(order, start=1)}
    members = tuple(p.map_monomials(lambda m: rename(m, mapping)) for p in chain.members)
    return IdentityChain(members, chain.name)


def chain_key(chain: IdentityChain) -> frozenset:
    """Dedup / comparison key: the set of sign-normalized canonical
    difference polynomials, after leaf-order renaming of uniform chains."""
    c = _alpha_normal(chain)
    return frozenset(p.sign_normalized() for p in chain_to_polynomials(c) if not p.is_zero())


@dataclass
class KPOutput:
    part1: list[IdentityChain]
    part2: list[IdentityChain]
    deduped: list[IdentityChain]
    collapsed: list[tuple[str, str]] = field(default_factory=list)

    @property
    def all_chains(self) -> list[IdentityChain]:
        return self.part1 + self.part2


def kp_apply(chain: IdentityChain) -> KPOutput:
    n = _check_input(chain)
    p1 = kp_part1(chain)
    p2 = kp_part2(n)
    seen: dict[frozenset, str] = {}
    deduped: list[IdentityChain] = []
    collapsed: list[tuple[str, str]] = []
    for c in p1 + p2:
        key = chain_key(c)
        if not key:
            # a trivially true chain carries no information
            collapsed.append(("<trivial>", c.name))
            continue
        if key in seen:
            collapsed.append((seen[key], c.name))
            continue
        seen[key] = c.name
        deduped.append(c)
    return KPOutput(p1, p2, deduped, collapsed)


def compare_chain_sets(derived: Sequence[IdentityChain], golden: Sequence[IdentityChain]):
    """Return (missing_from_derived, extra_in_derived) as lists of chains."""
    dkeys = {chain_key(c): c for c in derived}
    gkeys = {chain_key(c): c for c in golden}
    missing = [gkeys[k] for k in gkeys if k not in dkeys]
    extra = [dkeys[k] for k in dkeys if k not in gkeys]
    return missing, extra
