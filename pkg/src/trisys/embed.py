"""Di-endomorphisms and the standard embeddings of triple trisystems.

Conventions.  A :class:`DiEndPair` stores its two maps as ordinary
(column-vector) matrices, so ``f ≺ x = F1 @ x``.  An :class:`OpDiEndPair`
stores matrices acting on row vectors, ``x ≺ g = x @ G2``; with that
convention the opposite products take the same shape as the direct ones::

    f ⊣ g = (F1 G2, F2 G2)      f ⊢ g = (F2 G1, F2 G2)

Operator modules (𝔐, 𝔏, 𝔕) are handled as flattened coordinate vectors
of such pairs together with an echelon basis of their span; products are
computed on representatives and re-expressed in the basis, so closure and
well-definedness are checked rather than assumed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .dialg import DialgebraInstance, PreconditionError, check_dialgebra_axioms, check_involution
from .exactlin import DimensionError, EchelonBasis, ExactMatrix, Field, KindMismatchError, rref
from .structures import ChainResult, O, Report, V, materialize
from .trisystems import check_variety

__all__ = [
    "DiEndPair",
    "OpDiEndPair",
    "MGenerator",
    "EmbeddingAlgebra",
    "ClosureError",
    "diend_products",
    "lr_operators",
    "build_M",
    "build_U",
    "build_L_R",
    "build_U2",
    "check_diendomorphism_lemma",
    "check_diend_dialgebra",
    "check_extraidentity",
    "extraidentity_counterexample",
    "mutation_sensitivity",
]

ROW_CONVENTION = "row vectors; right actions compose left to right: x(fg) = (xf)g"


class ClosureError(ValueError):
    """A product of operators left the span it was expected to stay in."""

    def __init__(self, msg: str, witness=None):
        super().__init__(msg if witness is None else f"{msg}; witness {witness}")
        self.witness = witness


# -- pairs of maps ---------------------------------------------------------


def _pair_left(f: Field, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """``(P1 Q2, P2 Q2)`` on stacks of shape (..., 2, d, d)."""
    return np.stack([f.matmul(p[..., 0, :, :], q[..., 1, :, :]), f.matmul(p[..., 1, :, :], q[..., 1, :, :])], axis=-3)


def _pair_right(f: Field, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """``(P2 Q1, P2 Q2)`` on stacks of shape (..., 2, d, d)."""
    return np.stack([f.matmul(p[..., 1, :, :], q[..., 0, :, :]), f.matmul(p[..., 1, :, :], q[..., 1, :, :])], axis=-3)


_PAIR_OPS = {"left": _pair_left, "right": _pair_right}


def _as_vec(f: Field, x, d: int) -> np.ndarray:
    if isinstance(x, ExactMatrix):
        _same(f, x.field)
        x = x.data
    v = np.asarray(x, dtype=f.dtype).reshape(-1)
    if v.shape[0] != d:
        raise DimensionError(f"vector of length {v.shape[0]} for maps of size {d}")
    return v


def _same(f: Field, g: Field) -> None:
    if f != g:
        raise KindMismatchError(f"{f} vs {g}")


@dataclass(frozen=True)
class DiEndPair:
    """``f = (f1, f2)`` with ``f ≺ x = f1(x)`` and ``f ≻ x = f2(x)``."""

    f1: ExactMatrix
    f2: ExactMatrix

    def __post_init__(self):
        _same(self.f1.field, self.f2.field)
        if self.f1.shape != self.f2.shape or self.f1.rows != self.f1.cols:
            raise DimensionError(f"maps of shapes {self.f1.shape} and {self.f2.shape}")

    @property
    def field(self) -> Field:
        return self.f1.field

    @property
    def dim(self) -> int:
        return self.f1.rows

    @classmethod
    def from_stack(cls, f: Field, arr: np.ndarray) -> "DiEndPair":
        return cls(ExactMatrix(f, arr[0]), ExactMatrix(f, arr[1]))

    def stack(self) -> np.ndarray:
        return np.stack([self.f1.data, self.f2.data])

    def _other(self, g) -> np.ndarray:
        if type(g) is not type(self):
            raise TypeError(f"cannot multiply {type(self).__name__} by {type(g).__name__}")
        _same(self.field, g.field)
        if g.dim != self.dim:
            raise DimensionError(f"dimensions {self.dim} and {g.dim}")
        return g.stack()

    def left(self, g):
        return type(self).from_stack(self.field, _pair_left(self.field, self.stack(), self._other(g)))

    def right(self, g):
        return type(self).from_stack(self.field, _pair_right(self.field, self.stack(), self._other(g)))

    def prec(self, x) -> np.ndarray:
        """``f ≺ x``"""
        return self.field.matmul(self.f1.data, _as_vec(self.field, x, self.dim))

    def succ(self, x) -> np.ndarray:
        """``f ≻ x``"""
        return self.field.matmul(self.f2.data, _as_vec(self.field, x, self.dim))


@dataclass(frozen=True)
class OpDiEndPair(DiEndPair):
    """Opposite di-endomorphism ``ḡ`` acting on row vectors:
    ``x ≺ ḡ = x g2`` and ``x ≻ ḡ = x g1``."""

    @property
    def g1(self) -> ExactMatrix:
        return self.f1

    @property
    def g2(self) -> ExactMatrix:
        return self.f2

    def prec(self, x) -> np.ndarray:
        """``x ≺ ḡ``"""
        return self.field.matmul(_as_vec(self.field, x, self.dim), self.f2.data)

    def succ(self, x) -> np.ndarray:
        """``x ≻ ḡ``"""
        return self.field.matmul(_as_vec(self.field, x, self.dim), self.f1.data)

    @classmethod
    def from_diend(cls, f: DiEndPair) -> "OpDiEndPair":
        """``f̄``: the same maps, now written on the right."""
        return cls(f.f1.T, f.f2.T)


def diend_products(f: DiEndPair, g: DiEndPair) -> tuple[DiEndPair, DiEndPair]:
    """``(f ⊣ g, f ⊢ g)``"""
    return f.left(g), f.right(g)


# -- L / R operators of a trisystem ----------------------------------------


def _t(T, i: int) -> np.ndarray:
    return T.tensors[f"t{i}"]


def _L(T, i: int) -> np.ndarray:
    """``L_i(x,y)`` for all basis x, y as column matrices: [x, y, out, z]."""
    return _t(T, i).transpose(0, 1, 3, 2)


def _R(T, i: int) -> np.ndarray:
    """``R_i(x,y)`` for all basis x, y as row matrices: [x, y, z, out]."""
    return _t(T, i).transpose(1, 2, 0, 3)


# component indices of the generators
_LGEN = {"◁": (1, 3), "▷": (2, 3)}
_RGEN = {"◁": (2, 1), "▷": (3, 1)}


def _l_stack(T, kind: str) -> np.ndarray:
    a, b = _LGEN[kind]
    return np.stack([_L(T, a), _L(T, b)], axis=2)  # (d, d, 2, d, d)


def _r_stack(T, kind: str) -> np.ndarray:
    a, b = _RGEN[kind]
    return np.stack([_R(T, a), _R(T, b)], axis=2)


def _bilinear_at(f: Field, gens: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Evaluate a generator family at vectors ``x``, ``y`` by bilinearity."""
    d = gens.shape[0]
    flat = gens.reshape(d, d, -1)
    r = f.matmul(x.reshape(1, d), flat.reshape(d, -1)).reshape(d, -1)
    return f.matmul(y.reshape(1, d), r).reshape(gens.shape[2:])


@dataclass(frozen=True)
class MGenerator:
    """``x ◁ y`` or ``x ▷ y`` realized as a left pair and an opposite pair."""

    kind: str
    x: tuple
    y: tuple
    left: DiEndPair
    right: OpDiEndPair

    def flat(self) -> np.ndarray:
        return np.concatenate([self.left.stack().reshape(-1), self.right.stack().reshape(-1)])


def lr_operators(T, x, y) -> dict:
    """``{"L◁", "L▷", "R◁", "R▷"}`` at the vectors ``x``, ``y``."""
    f, d = T.field, T.dim
    xv, yv = _as_vec(f, x, d), _as_vec(f, y, d)
    out = {}
    for kind in ("◁", "▷"):
        out["L" + kind] = DiEndPair.from_stack(f, _bilinear_at(f, _l_stack(T, kind), xv, yv))
        out["R" + kind] = OpDiEndPair.from_stack(f, _bilinear_at(f, _r_stack(T, kind), xv, yv))
    return out


def m_generator(T, kind: str, x, y) -> MGenerator:
    ops = lr_operators(T, x, y)
    f = T.field
    return MGenerator(kind, f.scalars(_as_vec(f, x, T.dim)), f.scalars(_as_vec(f, y, T.dim)), ops["L" + kind], ops["R" + kind])


# -- identity comparison helpers -------------------------------------------


def _compare(name: str, exprs: Sequence[tuple[str, np.ndarray]], names: Sequence[str], labels, max_witnesses: int = 5) -> ChainResult:
    """All arrays agree; leading axes are indexed by ``names`` over basis
    labels (one shared list, or one list per name)."""
    if not isinstance(labels, Mapping):
        labels = {n: labels for n in names}
    wit = []
    base_label, base = exprs[0]
    k = len(names)
    for label, arr in exprs[1:]:
        diff = np.any((arr != base).reshape(*arr.shape[:k], -1), axis=-1)
        for idx in np.argwhere(diff)[: max_witnesses - len(wit)]:
            wit.append({"lhs": base_label, "rhs": label, "assignment": {n: labels[n][int(i)] for n, i in zip(names, idx)}})
    return ChainResult(name, "pass" if not wit else "fail", wit, int(np.prod(base.shape[:k])) * (len(exprs) - 1))


def _with_first(f: Field, w: np.ndarray, gens: np.ndarray) -> np.ndarray:
    """``G(w_n, u)`` for each row ``w_n``; result [n, u, ...]."""
    d = gens.shape[0]
    out = f.matmul(w.reshape(-1, d), gens.reshape(d, -1))
    return out.reshape((w.shape[0] if w.ndim == 2 else -1, d) + gens.shape[2:])


def _with_second(f: Field, w: np.ndarray, gens: np.ndarray) -> np.ndarray:
    """``G(x, w_n)`` for each row ``w_n``; result [x, n, ...]."""
    d = gens.shape[0]
    flat = gens.reshape(d, d, -1)
    out = f.matmul(w.reshape(1, -1, d), flat)  # (d, n, rest)
    return out.reshape((d, -1) + gens.shape[2:])


def _triples(T, i: int, reverse: bool) -> np.ndarray:
    """Rows ``{a,b,c}_i`` (or ``{c,b,a}_i``) indexed by (a, b, c) flattened."""
    t = _t(T, i)
    if reverse:
        t = t.transpose(2, 1, 0, 3)
    return t.reshape(-1, T.dim)


def _all_products(f: Field, op: Callable, p: np.ndarray, q: np.ndarray, parts: int) -> np.ndarray:
    """``p[x,y] op q[z,u]`` for all basis x, y, z, u: shape (d,d,d,d, parts*2,d,d)."""
    a = p[:, :, None, None]
    b = q[None, None]
    out = [op(f, a[..., 2 * s : 2 * s + 2, :, :], b[..., 2 * s : 2 * s + 2, :, :]) for s in range(parts)]
    return np.concatenate(out, axis=-3)


def _expr(T, gens: Mapping[str, np.ndarray], entry, parts: int) -> np.ndarray:
    f, d = T.field, T.dim
    shape = (d, d, d, d) + gens["◁"].shape[2:]
    kind = entry[0]
    if kind == "prod":
        _, op, mu, nu = entry
        return _all_products(f, _PAIR_OPS[op], gens[mu], gens[nu], parts)
    if kind == "inner":
        # G^mu(x, {..}_i) with the triple built from (y, z, u)
        _, mu, i, rev = entry
        return _with_second(f, _triples(T, i, rev), gens[mu]).reshape(shape)
    if kind == "outer":
        # G^mu({..}_i, u) with the triple built from (x, y, z)
        _, mu, i, rev = entry
        return _with_first(f, _triples(T, i, rev), gens[mu]).reshape(shape)
    raise ValueError(entry)


def _entry_label(entry) -> str:
    if entry[0] == "prod":
        _, op, mu, nu = entry
        return f"(x{mu}y){'⊣' if op == 'left' else '⊢'}(z{nu}u)"
    _, mu, i, rev = entry
    if entry[0] == "inner":
        inner = "{u,z,y}" if rev else "{y,z,u}"
        return f"x{mu}{inner}_{i}"
    outer = "{z,y,x}" if rev else "{x,y,z}"
    return f"{outer}_{i}{mu}u"


def _check_items(T, gens, items, parts: int, prefix: str) -> list[ChainResult]:
    labels = list(T.labels)
    out = []
    for n, entries in enumerate(items, start=1):
        exprs = [(_entry_label(s), _expr(T, gens, s, parts)) for s in entries]
        out.append(_compare(f"{prefix}{n}", exprs, ("x", "y", "z", "u"), labels))
    return out


# -- 𝔐 and U(A) -------------------------------------------------------------

M_PRODUCT_ITEMS = [
    [("prod", "left", "◁", "◁"), ("inner", "◁", 1, False), ("outer", "◁", 1, False), ("prod", "left", "◁", "▷")],
    [("prod", "right", "◁", "◁"), ("outer", "◁", 3, False), ("inner", "▷", 2, False), ("prod", "right", "▷", "◁")],
    [("prod", "left", "▷", "◁"), ("inner", "▷", 1, False), ("outer", "◁", 2, False), ("prod", "left", "▷", "▷")],
    [("prod", "right", "◁", "▷"), ("outer", "▷", 3, False), ("inner", "▷", 3, False), ("prod", "right", "▷", "▷")],
]


def _m_gens(T) -> dict:
    """``x ◁ y`` and ``x ▷ y`` for all basis pairs: (d, d, 4, d, d)."""
    return {k: np.concatenate([_l_stack(T, k), _r_stack(T, k)], axis=2) for k in ("◁", "▷")}


@dataclass
class OperatorModule:
    """Span of flattened operator pairs, with product tables in its basis."""

    name: str
    field: Field
    map_dim: int
    parts: int  # number of (pair) components: 2 for 𝔐, 1 for 𝔏 / 𝔕
    basis: EchelonBasis
    left: np.ndarray  # (k, k, k) structure constants of ⊣
    right: np.ndarray
    closure: ChainResult

    @property
    def dim(self) -> int:
        return self.basis.dim

    def stacks(self) -> np.ndarray:
        d = self.map_dim
        return self.basis.rows.reshape(self.dim, 2 * self.parts, d, d)


def _operator_module(name: str, f: Field, d: int, parts: int, generators: np.ndarray) -> OperatorModule:
    width = 2 * parts * d * d
    eb = EchelonBasis.span(f, generators.reshape(-1, width), width)
    k = eb.dim
    tables = {}
    wit = []
    st = eb.rows.reshape(k, 2 * parts, d, d)
    for op, fn in _PAIR_OPS.items():
        prods = np.concatenate(
            [fn(f, st[:, None, 2 * s : 2 * s + 2], st[None, :, 2 * s : 2 * s + 2]) for s in range(parts)], axis=-3
        ).reshape(k * k, width) if k else f.zeros((0, width))
        coords, bad = eb.coords_many(prods)
        for row in bad[:5]:
            wit.append({"op": op, "pair": [f"{name}{row // k + 1}", f"{name}{row % k + 1}"]})
        tables[op] = coords.reshape(k, k, k)
    closure = ChainResult(f"{name}-closure", "pass" if not wit else "fail", wit, 2 * k * k)
    return OperatorModule(name, f, d, parts, eb, tables["left"], tables["right"], closure)


@dataclass
class MModule:
    module: OperatorModule
    products: list  # ChainResults of the four product identities

    @property
    def dim(self) -> int:
        return self.module.dim

    @property
    def passed(self) -> bool:
        return self.module.closure.passed and all(c.passed for c in self.products)


def build_M(T) -> MModule:
    """Span of all ``x ◁ y``, ``x ▷ y`` plus the closure and product checks."""
    gens = _m_gens(T)
    g = np.concatenate([gens["◁"].reshape(T.dim * T.dim, -1), gens["▷"].reshape(T.dim * T.dim, -1)])
    mod = _operator_module("M", T.field, T.dim, 2, g)
    return MModule(mod, _check_items(T, gens, M_PRODUCT_ITEMS, 2, "products-"))


@dataclass
class EmbeddingAlgebra:
    """A dialgebra assembled from blocks, with the trisystem sitting inside."""

    kind: str
    algebra: DialgebraInstance
    blocks: list  # [(name, start, size)]
    recovery: Report
    checks: list = field(default_factory=list)  # further Reports

    @property
    def dim(self) -> int:
        return self.algebra.dim

    def block(self, name: str) -> slice:
        for n, s, k in self.blocks:
            if n == name:
                return slice(s, s + k)
        raise KeyError(name)

    def embed(self, x, block: str = "A") -> np.ndarray:
        v = self.algebra.zero()
        v[self.block(block)] = x
        return v

    @property
    def passed(self) -> bool:
        return self.recovery.passed and all(r.passed for r in self.checks)

    def to_json(self) -> dict:
        return {
            "type": "embedding",
            "kind": self.kind,
            "convention": ROW_CONVENTION,
            "blocks": [{"name": n, "start": s, "size": k} for n, s, k in self.blocks],
            "algebra": self.algebra.to_json(),
            "recovery": self.recovery.to_json(),
            "checks": [r.to_json() for r in self.checks],
            "status": "pass" if self.passed else "fail",
        }


def _require(T, set_name: str, check: bool) -> None:
    if not check:
        return
    rep = check_variety(T, set_name, mode="exhaustive")
    if not rep.passed:
        bad = rep.failures()[0]
        raise PreconditionError(f"input is not {set_name}: chain {bad.name} fails", bad.witnesses[:1])


def _recovery(U: DialgebraInstance, T, a_block: slice, defs) -> Report:
    """Compare triple products rebuilt inside ``U`` with the tensors of ``T``."""
    t0 = time.perf_counter()
    chains = []
    d = T.dim
    for name, term in defs:
        full = materialize(U, [(term, 1)], ("x", "y", "z"))
        sub = full[a_block, a_block, a_block]
        outside = np.delete(sub, np.arange(a_block.start, a_block.stop), axis=-1)
        got = sub[..., a_block]
        exprs = [(name, T.tensors[name]), ("U", got)]
        res = _compare(f"recover-{name}", exprs, ("x", "y", "z"), T.labels)
        if np.any(outside != 0):
            res.status = "fail"
            res.witnesses.append({"note": "product leaves the A block"})
        chains.append(res)
    return Report("RECOVERY", chains, sum(c.evaluations for c in chains), time.perf_counter() - t0, "exhaustive")


x_, y_, z_ = V("x"), V("y"), V("z")
U_RECOVERY = [
    ("t1", O("left", x_, O("left", y_, z_))),
    ("t2", O("right", x_, O("left", y_, z_))),
    ("t3", O("right", x_, O("right", y_, z_))),
]
U2_RECOVERY = [
    ("t1", O("left", x_, O("left", O("star", y_), z_))),
    ("t2", O("right", x_, O("left", O("star", y_), z_))),
    ("t3", O("right", x_, O("right", O("star", y_), z_))),
]


def build_U(T, *, check_input: bool = True, verify: bool = True) -> EmbeddingAlgebra:
    """``U(A) = 𝔐(A,A) ⊕ A`` as a dense dialgebra (basis: 𝔐 basis, then A)."""
    _require(T, "ATT1", check_input)
    f, d = T.field, T.dim
    M = build_M(T)
    mod = M.module
    if not mod.closure.passed:
        raise ClosureError("products of x◁y, x▷y leave their span", mod.closure.witnesses[:1])
    k = mod.dim
    n = k + d
    st = mod.stacks()  # (k, 4, d, d): L1, L2 (columns), G1, G2 (rows)
    gens = _m_gens(T)
    left = f.zeros((n, n, n))
    right = f.zeros((n, n, n))
    A = slice(k, n)
    left[:k, :k, :k] = mod.left
    right[:k, :k, :k] = mod.right
    # (x μ y) ≺ z = F1 z, ≻ z = F2 z ;  z ≺ (x μ y) = z G2, z ≻ = z G1
    left[:k, A, A] = st[:, 0].transpose(0, 2, 1)
    right[:k, A, A] = st[:, 1].transpose(0, 2, 1)
    left[A, :k, A] = st[:, 3].transpose(1, 0, 2)
    right[A, :k, A] = st[:, 2].transpose(1, 0, 2)
    for op, kind in (("left", "◁"), ("right", "▷")):
        coords, bad = mod.basis.coords_many(gens[kind].reshape(d * d, -1))
        assert not bad
        (left if op == "left" else right)[A, A, :k] = coords.reshape(d, d, k)
    labels = [f"M{i + 1}" for i in range(k)] + list(T.labels)
    U = DialgebraInstance(f, left, right, None, labels, f"U({getattr(T, 'provenance', 'custom')})")
    blocks = [("M", 0, k), ("A", k, d)]
    recovery = _recovery(U, T, A, U_RECOVERY)
    checks = [Report("M(A,A)", [mod.closure] + M.products, 0, 0.0, "exhaustive")]
    if verify:
        checks.append(check_dialgebra_axioms(U, mode="exhaustive"))
    return EmbeddingAlgebra("first", U, blocks, recovery, checks)


# -- 𝔏, 𝔕 and the four-block embedding ---------------------------------------

L_PRODUCT_ITEMS = [
    [("prod", "left", "◁", "◁")] + [("inner", "◁", i, True) for i in (1, 2, 3)] + [("outer", "◁", 1, False)],
    [("prod", "left", "▷", "◁"), ("inner", "▷", 3, True), ("outer", "◁", 2, False)],
    [("prod", "right", "◁", "◁"), ("inner", "▷", 2, True), ("outer", "◁", 3, False)],
    [("prod", "right", "◁", "▷"), ("inner", "▷", 1, True)] + [("outer", "▷", i, False) for i in (1, 2, 3)],
]
R_PRODUCT_ITEMS = [
    [("prod", "left", "◁", "◁"), ("outer", "◁", 3, True)] + [("inner", "◁", i, False) for i in (1, 2, 3)],
    [("prod", "left", "▷", "◁"), ("outer", "◁", 2, True), ("inner", "▷", 1, False)],
    [("prod", "right", "◁", "◁"), ("outer", "◁", 1, True), ("inner", "▷", 2, False)],
    [("prod", "right", "◁", "▷")] + [("outer", "▷", i, True) for i in (1, 2, 3)] + [("inner", "▷", 3, False)],
]


STAR_MODES = ("generators", "graph")


@dataclass
class StarModule:
    """Operator module with the involution ``*`` in its own coordinates.

    ``mode="generators"`` spans the operators themselves and defines ``*`` on
    generators, which is only meaningful when that assignment respects every
    linear relation (checked).  ``mode="graph"`` spans the pairs ``(λ, λ*)``
    formed on generators instead, so ``*`` is the swap and always defined.
    """

    name: str
    mode: str
    field: Field
    map_dim: int
    basis: EchelonBasis
    left: np.ndarray
    right: np.ndarray
    star: np.ndarray  # (k, k): row i = coordinates of (basis i)*
    closure: ChainResult
    well_defined: ChainResult
    generators: dict  # kind -> (d, d, k) coordinates of G^kind(x, y)

    @property
    def dim(self) -> int:
        return self.basis.dim

    def stacks(self) -> np.ndarray:
        """The operators of the basis elements: (k, 2, d, d)."""
        d = self.map_dim
        return self.basis.rows[:, : 4 * d * d // 2].reshape(self.dim, 2, d, d)

    def star_stacks(self) -> np.ndarray:
        """The operators of ``(basis i)*``."""
        st = self.stacks()
        if not self.dim:
            return st
        return self.field.matmul(self.star, st.reshape(self.dim, -1)).reshape(st.shape)


def _star_witness(name: str, labels, g: np.ndarray, g_star: np.ndarray) -> dict:
    """Describe a linear relation among generators that ``*`` does not respect."""
    d = len(labels)
    names = [f"{name}{k}({labels[x]},{labels[y]})" for k in ("◁", "▷") for x in range(d) for y in range(d)]
    star_names = [f"{name}{k}({labels[y]},{labels[x]})" for k in ("▷", "◁") for x in range(d) for y in range(d)]
    for i in range(len(g)):
        if not np.any(g[i]) and np.any(g_star[i]):
            return {"relation": f"{names[i]} = 0", "image": f"{star_names[i]} != 0"}
    for i in range(len(g)):
        for j in range(i):
            if np.all(g[i] == g[j]) and np.any(g_star[i] != g_star[j]):
                return {"relation": f"{names[i]} = {names[j]}", "image": f"{star_names[i]} != {star_names[j]}"}
    return {"relation": "a longer linear combination of generators", "image": "not respected"}


def _star_module(name: str, T, gens: Mapping[str, np.ndarray], mode: str = "generators") -> StarModule:
    if mode not in STAR_MODES:
        raise ValueError(f"unknown star mode {mode!r}; use one of {STAR_MODES}")
    f, d = T.field, T.dim
    width = 2 * d * d
    g = np.concatenate([gens["◁"].reshape(d * d, width), gens["▷"].reshape(d * d, width)])
    # (G◁(x,y))* = G▷(y,x) and (G▷(x,y))* = G◁(y,x)
    swapped = {k: gens[k].transpose(1, 0, 2, 3, 4).reshape(d * d, width) for k in gens}
    g_star = np.concatenate([swapped["▷"], swapped["◁"]])
    aug = np.concatenate([g, g_star], axis=1)
    wit = []
    if mode == "generators":
        eb = EchelonBasis.span(f, g, width)
        k = eb.dim
        rows, piv = rref(f, aug)
        if any(c >= width for c in piv):
            wit.append(_star_witness(name, T.labels, g, g_star))
        star = f.zeros((k, k))
        if not wit and k:
            # rows of the augmented echelon form are pairs (b, b*), b running over eb
            star, bad = eb.coords_many(rows[:k, width:])
            if bad:
                wit.append({"note": "image of * leaves the span"})
        st = eb.rows.reshape(k, 1, 2, d, d)
    else:
        eb = EchelonBasis.span(f, aug, 2 * width)
        k = eb.dim
        halves = eb.rows.reshape(k, 2, width)
        star, bad = eb.coords_many(halves[:, ::-1].reshape(k, -1))
        if bad:
            wit.append({"note": "swapped pair leaves the span"})
        st = eb.rows.reshape(k, 2, 2, d, d)
    well = ChainResult(f"{name}-star-well-defined", "pass" if not wit else "fail", wit, g.shape[0])
    tables = {}
    cwit = []
    for op, fn in _PAIR_OPS.items():
        if not k:
            tables[op] = f.zeros((0, 0, 0))
            continue
        a, b = st[:, None], st[None, :]
        prod = fn(f, a[:, :, 0], b[:, :, 0])
        if mode == "graph":
            # (λ, λ') ⊣ (μ, μ') = (λ ⊣ μ, μ' ⊢ λ') and dually for ⊢
            other = _PAIR_OPS["right" if op == "left" else "left"]
            prod = np.stack([prod, other(f, b[:, :, 1], a[:, :, 1])], axis=2)
        coords, bad = eb.coords_many(prod.reshape(k * k, -1))
        for row in bad[:5]:
            cwit.append({"op": op, "pair": [f"{name}{row // k + 1}", f"{name}{row % k + 1}"]})
        tables[op] = coords.reshape(k, k, k)
    closure = ChainResult(f"{name}-closure", "pass" if not cwit else "fail", cwit, 2 * k * k)
    vecs = g if mode == "generators" else aug
    coords, bad = eb.coords_many(vecs)
    assert not bad
    n = d * d
    gen_coords = {"◁": coords[:n].reshape(d, d, k), "▷": coords[n:].reshape(d, d, k)}
    return StarModule(name, mode, f, d, eb, tables["left"], tables["right"], star, closure, well, gen_coords)


@dataclass
class LRModules:
    L: StarModule
    R: StarModule
    products: list
    remarks: list
    involutive: list

    @property
    def chains(self) -> list:
        return [self.L.closure, self.R.closure, self.L.well_defined, self.R.well_defined] + self.products + self.remarks + self.involutive

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.chains)


def _remark_checks(name: str, mod: StarModule, gens, labels) -> list[ChainResult]:
    """``λ ⊣ G◁(z,u) = λ ⊣ G▷(z,u)`` and ``G◁(x,y) ⊢ λ = G▷(x,y) ⊢ λ`` for λ in a basis."""
    f = mod.field
    basis = mod.stacks()
    k = basis.shape[0]
    out = []
    lam = basis[:, None, None]
    a = _pair_left(f, lam, gens["◁"][None])
    b = _pair_left(f, lam, gens["▷"][None])
    names = {"λ": [f"{name}{i + 1}" for i in range(k)], "x": labels, "y": labels}
    out.append(_compare(f"remark-{name}-left", [("λ⊣◁", a), ("λ⊣▷", b)], ("λ", "x", "y"), names))
    a = _pair_right(f, gens["◁"][:, :, None], basis[None, None])
    b = _pair_right(f, gens["▷"][:, :, None], basis[None, None])
    out.append(_compare(f"remark-{name}-right", [("◁⊢λ", a), ("▷⊢λ", b)], ("x", "y", "λ"), names))
    return out


def _involutive(name: str, sm: StarModule) -> ChainResult:
    f = sm.field
    k = sm.dim
    sq = f.matmul(sm.star, sm.star) if k else sm.star
    ok = bool(np.all(sq == f.eye(k)))
    wit = [] if ok else [{"note": f"(*)^2 differs from the identity on {name}"}]
    return ChainResult(f"{name}-star-involutive", "pass" if ok else "fail", wit, k)


def build_L_R(T, *, check_input: bool = True, star: str = "generators") -> LRModules:
    """Spans of ``L◁, L▷`` and ``R◁, R▷`` with their products and ``*``
    (see :class:`StarModule` for ``star``)."""
    _require(T, "ATT2", check_input)
    lg = {k: _l_stack(T, k) for k in ("◁", "▷")}
    rg = {k: _r_stack(T, k) for k in ("◁", "▷")}
    L = _star_module("L", T, lg, star)
    R = _star_module("R", T, rg, star)
    products = _check_items(T, lg, L_PRODUCT_ITEMS, 1, "L-products-") + _check_items(T, rg, R_PRODUCT_ITEMS, 1, "R-products-")
    labels = list(T.labels)
    remarks = _remark_checks("L", L, lg, labels) + _remark_checks("R", R, rg, labels)
    inv = [_involutive("L", L), _involutive("R", R)]
    return LRModules(L, R, products, remarks, inv)


def build_U2(T, *, check_input: bool = True, verify: bool = True, star: str = "generators") -> EmbeddingAlgebra:
    """``𝔏 ⊕ A ⊕ Ā ⊕ 𝔕^op`` with the block products and the involution ``⋆``.

    Raises :class:`ClosureError` when ``*`` on 𝔏 or 𝔕 is not well defined;
    ``star="graph"`` builds the variant in which it always is.
    """
    _require(T, "ATT2", check_input)
    f, d = T.field, T.dim
    lr = build_L_R(T, check_input=False, star=star)
    for c in (lr.L.closure, lr.R.closure, lr.L.well_defined, lr.R.well_defined):
        if not c.passed:
            raise ClosureError(f"{c.name} fails", c.witnesses[:1])
    kl, kr = lr.L.dim, lr.R.dim
    n = kl + 2 * d + kr
    Lb, Ab, Bb, Rb = slice(0, kl), slice(kl, kl + d), slice(kl + d, kl + 2 * d), slice(kl + 2 * d, n)
    lam, lam_star = lr.L.stacks(), lr.L.star_stacks()  # column matrices
    rho, rho_star = lr.R.stacks(), lr.R.star_stacks()  # row matrices
    left = f.zeros((n, n, n))
    right = f.zeros((n, n, n))
    left[Lb, Lb, Lb] = lr.L.left
    right[Lb, Lb, Lb] = lr.L.right
    left[Rb, Rb, Rb] = lr.R.left
    right[Rb, Rb, Rb] = lr.R.right
    for tensor, kind in ((left, "◁"), (right, "▷")):
        tensor[Ab, Bb, Lb] = lr.L.generators[kind]  # L^μ(x1, y2)
        tensor[Bb, Ab, Rb] = lr.R.generators[kind]  # R^μ(y1, x2)
    # λ ≺ x = Λ1 x, λ ≻ x = Λ2 x
    left[Lb, Ab, Ab] = lam[:, 0].transpose(0, 2, 1)
    right[Lb, Ab, Ab] = lam[:, 1].transpose(0, 2, 1)
    # x ≺ ρ = x P2, x ≻ ρ = x P1
    left[Ab, Rb, Ab] = rho[:, 1].transpose(1, 0, 2)
    right[Ab, Rb, Ab] = rho[:, 0].transpose(1, 0, 2)
    # y ≺* λ = λ* ≻ y,  y ≻* λ = λ* ≺ y
    left[Bb, Lb, Bb] = lam_star[:, 1].transpose(2, 0, 1)
    right[Bb, Lb, Bb] = lam_star[:, 0].transpose(2, 0, 1)
    # ρ ≺* y = y ≻ ρ*,  ρ ≻* y = y ≺ ρ*
    left[Rb, Bb, Bb] = rho_star[:, 0]
    right[Rb, Bb, Bb] = rho_star[:, 1]
    inv = f.zeros((n, n))
    inv[Lb, Lb] = lr.L.star
    inv[Rb, Rb] = lr.R.star
    inv[Ab, Bb] = f.eye(d)
    inv[Bb, Ab] = f.eye(d)
    labels = [f"L{i + 1}" for i in range(kl)] + list(T.labels) + [f"{s}~" for s in T.labels] + [f"R{i + 1}" for i in range(kr)]
    suffix = "" if star == "generators" else f",star={star}"
    U = DialgebraInstance(f, left, right, inv, labels, f"U2({getattr(T, 'provenance', 'custom')}{suffix})")
    blocks = [("L", 0, kl), ("A", kl, d), ("Abar", kl + d, d), ("R", kl + 2 * d, kr)]
    recovery = _recovery(U, T, Ab, U2_RECOVERY)
    checks = [Report("L/R(A,A)", lr.chains, 0, 0.0, "exhaustive")]
    if verify:
        checks.append(check_dialgebra_axioms(U, mode="exhaustive"))
        checks.append(check_involution(U, mode="exhaustive"))
    return EmbeddingAlgebra("second", U, blocks, recovery, checks)


# -- lemma checks ------------------------------------------------------------


def _random_pair(f: Field, d: int, rng, cls=DiEndPair):
    return cls.from_stack(f, f.random_array(rng, (2, d, d)))


def check_diendomorphism_lemma(f: Field, d: int, count: int = 100, seed: int = 0) -> Report:
    """``(f⊢g)≻x = (f⊣g)≻x = f≻(g≻x)``, ``(f⊢g)≺x = f≻(g≺x)``, ``(f⊣g)≺x = f≺(g≻x)``."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    wit: dict[str, list] = {"diend-1": [], "diend-2": [], "diend-3": []}
    for trial in range(count):
        p, q = _random_pair(f, d, rng), _random_pair(f, d, rng)
        x = f.random_array(rng, (d,))
        lft, rgt = diend_products(p, q)
        a, b, c = rgt.succ(x), lft.succ(x), p.succ(q.succ(x))
        if np.any(a != b) or np.any(b != c):
            wit["diend-1"].append({"trial": trial})
        if np.any(rgt.prec(x) != p.succ(q.prec(x))):
            wit["diend-2"].append({"trial": trial})
        if np.any(lft.prec(x) != p.prec(q.succ(x))):
            wit["diend-3"].append({"trial": trial})
    chains = [ChainResult(k, "pass" if not w else "fail", w[:5], count) for k, w in wit.items()]
    return Report("DIENDOMORPHISM", chains, 3 * count, time.perf_counter() - t0, "sampled")


def check_diend_dialgebra(f: Field, d: int, count: int = 50, seed: int = 0, op: bool = False) -> Report:
    """The five dialgebra axioms on random triples of (opposite) di-endomorphisms."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    cls = OpDiEndPair if op else DiEndPair
    wit: dict[str, list] = {f"D{i}": [] for i in range(1, 6)}
    for trial in range(count):
        a, b, c = (_random_pair(f, d, rng, cls) for _ in range(3))
        checks = {
            "D1": (a.left(b).left(c), a.left(b.left(c))),
            "D2": (a.left(b.left(c)), a.left(b.right(c))),
            "D3": (a.right(b).left(c), a.right(b.left(c))),
            "D4": (a.left(b).right(c), a.right(b).right(c)),
            "D5": (a.right(b).right(c), a.right(b.right(c))),
        }
        for k, (u, v) in checks.items():
            if u != v:
                wit[k].append({"trial": trial})
    chains = [ChainResult(k, "pass" if not w else "fail", w[:5], count) for k, w in wit.items()]
    return Report("DIEND/" + ("OP" if op else "DIRECT"), chains, 5 * count, time.perf_counter() - t0, "sampled")


def _family_samples(T, family: str, rng) -> DiEndPair:
    """A random element of the span of the L (or R) generators, as a pair of
    column matrices acting by ``≺ = first map``, ``≻ = second map``."""
    f, d = T.field, T.dim
    gens = {"L": _l_stack, "R": _r_stack}[family]
    out = f.zeros((2, d, d))
    for kind in ("◁", "▷"):
        coeffs = f.random_array(rng, (d * d,))
        flat = gens(T, kind).reshape(d * d, -1)
        out = out + f.matmul(coeffs.reshape(1, -1), flat).reshape(2, d, d)
    out = f.reduce(out)
    if family == "R":
        out = out.transpose(0, 2, 1)  # the R maps as ordinary maps
    return DiEndPair.from_stack(f, out)


def check_extraidentity(T, count: int = 100, seed: int = 0, families: Sequence[str] = ("L", "R")) -> Report:
    """``f ≺ (g ≺ x) = f ≺ (g ≻ x)`` for random f, g from the L/R spans and random x."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    f, d = T.field, T.dim
    chains = []
    for a in families:
        for b in families:
            wit = []
            for trial in range(count):
                p, q = _family_samples(T, a, rng), _family_samples(T, b, rng)
                x = f.random_array(rng, (d,))
                if np.any(p.prec(q.prec(x)) != p.prec(q.succ(x))):
                    wit.append({"trial": trial, "x": T.describe(x)})
            chains.append(ChainResult(f"extra-{a}{b}", "pass" if not wit else "fail", wit[:5], count))
    return Report("EXTRAIDENTITY", chains, sum(c.evaluations for c in chains), time.perf_counter() - t0, "sampled")


def extraidentity_counterexample(f: Field, d: int, seed: int = 0, tries: int = 100):
    """Random di-endomorphisms with ``f ≺ (g ≺ x) != f ≺ (g ≻ x)``, or None."""
    rng = np.random.default_rng(seed)
    for trial in range(tries):
        p, q = _random_pair(f, d, rng), _random_pair(f, d, rng)
        x = f.random_array(rng, (d,))
        a, b = p.prec(q.prec(x)), p.prec(q.succ(x))
        if np.any(a != b):
            return {"trial": trial, "f": p, "g": q, "x": x, "lhs": a, "rhs": b}
    return None


# -- mutation sensitivity ----------------------------------------------------


def mutation_sensitivity(struct, check: Callable, count: int = 20, seed: int = 0, ops: Sequence[str] | None = None) -> list[dict]:
    """Perturb one tensor entry at a time and re-run ``check``.

    ``struct`` needs ``replace(**tensors)``; ``check`` maps a structure to a
    Report.  Returns one record per mutation with whether a witness was found.
    """
    rng = np.random.default_rng(seed)
    f = struct.field
    names = list(ops) if ops is not None else [n for n in struct.tensors if n != "star"]
    out = []
    for _ in range(count):
        name = names[int(rng.integers(len(names)))]
        t = struct.tensors[name]
        idx = tuple(int(rng.integers(s)) for s in t.shape)
        delta = 1 if not f.modulus else int(rng.integers(1, f.modulus))
        new = t.copy()
        new[idx] = f.reduce(np.asarray(new[idx] + f.raw(delta)))
        rep = check(struct.replace(**{name: new}))
        fails = rep.failures()
        out.append(
            {
                "op": name,
                "index": [struct.labels[i] for i in idx],
                "delta": delta,
                "detected": bool(fails) and bool(fails[0].witnesses),
                "chain": fails[0].name if fails else None,
                "witness": fails[0].witnesses[0] if fails and fails[0].witnesses else None,
            }
        )
    return out
