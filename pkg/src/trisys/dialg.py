"""Concrete associative dialgebras and their checkers.

Models:

* the free dialgebra in word/center normal form (sparse, truncated by length);
* block-matrix dialgebras ``M_m^{m1}`` with the conjugate transpose;
* dialgebras built from a differential associative algebra.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import catalog
from .exactlin import GF, QQ, EchelonBasis, ExactMatrix, Field, express_in, rref
from .structures import (
    O,
    DenseStructure,
    Report,
    TermChain,
    V,
    check_chains,
    derive,
)

__all__ = [
    "DialgebraInstance",
    "FreeDiWord",
    "FreeDialgebra",
    "free_dialgebra",
    "free_involution",
    "BlockContext",
    "matrix_dialgebra",
    "differential_dialgebra",
    "PreconditionError",
    "check_dialgebra_axioms",
    "check_involution",
    "dminus_bracket",
    "check_right_leibniz",
    "subalgebra_structure_constants",
    "bracket_image_rank",
]

DIALGEBRA_OPS = {1: "left", 2: "right"}


class PreconditionError(ValueError):
    def __init__(self, msg: str, witness=None):
        super().__init__(msg if witness is None else f"{msg}; witness {witness}")
        self.witness = witness


class DialgebraInstance(DenseStructure):
    """Dense dialgebra: ops ``left`` (⊣), ``right`` (⊢), optional unary ``star``."""

    def __init__(self, field_: Field, left, right, involution=None, labels=None, provenance: str = "custom"):
        left = np.asarray(left, dtype=field_.dtype)
        tensors = {"left": left, "right": np.asarray(right, dtype=field_.dtype)}
        if involution is not None:
            if isinstance(involution, ExactMatrix):
                involution = involution.data
            tensors["star"] = np.asarray(involution, dtype=field_.dtype)
        super().__init__(field_, left.shape[0], tensors, labels)
        self.provenance = provenance

    @property
    def has_involution(self) -> bool:
        return "star" in self.tensors

    @property
    def involution(self) -> ExactMatrix | None:
        t = self.tensors.get("star")
        return None if t is None else ExactMatrix(self.field, t)

    def with_tensors(self, tensors):
        # derived structures are plain modules with new operations
        return DenseStructure(self.field, self.dim, tensors, self.labels)

    def replace(self, **tensors) -> "DialgebraInstance":
        t = dict(self.tensors)
        t.update(tensors)
        return DialgebraInstance(self.field, t["left"], t["right"], t.get("star"), self.labels, self.provenance)

    def to_json(self) -> dict:
        out = {
            "type": "dialgebra",
            "dim": self.dim,
            "scalar": self.field.to_json(),
            "left": self.field.encode(self.tensors["left"]),
            "right": self.field.encode(self.tensors["right"]),
            "labels": list(self.labels),
            "provenance": self.provenance,
        }
        if self.has_involution:
            out["involution"] = self.field.encode(self.tensors["star"])
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "DialgebraInstance":
        f = Field.from_json(data["scalar"])
        inst = cls(
            f,
            f.decode(data["left"]),
            f.decode(data["right"]),
            f.decode(data["involution"]) if data.get("involution") is not None else None,
            data.get("labels"),
            data.get("provenance", "file"),
        )
        if inst.dim != data["dim"]:
            raise ValueError(f"dim {data['dim']} does not match tensor size {inst.dim}")
        return inst


# -- free dialgebra --------------------------------------------------------


@dataclass(frozen=True)
class FreeDiWord:
    word: tuple
    center: int

    def __post_init__(self):
        if not self.word:
            raise ValueError("empty word")
        if not 1 <= self.center <= len(self.word):
            raise ValueError(f"center {self.center} outside 1..{len(self.word)}")


def free_involution(w: FreeDiWord) -> FreeDiWord:
    """``(w, c) -> (reverse(w), |w| + 1 - c)``."""
    return FreeDiWord(tuple(reversed(w.word)), len(w.word) + 1 - w.center)


class FreeDialgebra:
    """Free dialgebra on ``g`` generators, truncated above ``max_degree``.

    Elements are sparse dicts ``{(word, center): int}``.  With ``paired=True``
    there are ``2g`` letters and the involution also swaps letter ``i`` with
    ``i + g``, which models the free dialgebra with involution on ``g``
    generators; otherwise generators are self-adjoint.
    """

    dense = False

    def __init__(self, g: int, max_degree: int, paired: bool = False):
        if g < 1 or max_degree < 1:
            raise ValueError("need g >= 1 and max_degree >= 1")
        self.g = g
        self.max_degree = max_degree
        self.paired = paired
        self.letters = 2 * g if paired else g
        self.field = QQ
        self.provenance = "free-dialgebra"

    @property
    def dim(self) -> int:
        return sum(self.letters**n * n for n in range(1, self.max_degree + 1))

    @property
    def has_involution(self) -> bool:
        return True

    def letter_name(self, i: int) -> str:
        base = i % self.g if self.paired else i
        name = chr(ord("a") + base) if self.g <= 26 else f"x{base + 1}"
        return name + "*" if self.paired and i >= self.g else name

    def label(self, key) -> str:
        word, c = key
        return "".join(self.letter_name(i) for i in word) + f"|{c}"

    def generator(self, i: int) -> dict:
        if not 0 <= i < self.g:
            raise IndexError(f"only {self.g} generators")
        return {((i,), 1): 1}

    def element(self, w: FreeDiWord, coeff: int = 1) -> dict:
        return {(tuple(w.word), w.center): coeff}

    def _star_letter(self, i: int) -> int:
        if not self.paired:
            return i
        return i + self.g if i < self.g else i - self.g

    def arity(self, name: str) -> int:
        return {"left": 2, "right": 2, "star": 1}[name]

    def has_op(self, name: str) -> bool:
        return name in ("left", "right", "star")

    op_names = ["left", "right", "star"]

    def apply(self, name: str, *vecs):
        if name == "star":
            (u,) = vecs
            out: dict = {}
            for (w, c), x in u.items():
                key = (tuple(self._star_letter(i) for i in reversed(w)), len(w) + 1 - c)
                out[key] = out.get(key, 0) + x
            return {k: v for k, v in out.items() if v}
        u, v = vecs
        right = name == "right"
        if name not in ("left", "right"):
            raise KeyError(name)
        out = {}
        for (w, c), x in u.items():
            for (w2, c2), y in v.items():
                if len(w) + len(w2) > self.max_degree:
                    continue
                key = (w + w2, len(w) + c2 if right else c)
                out[key] = out.get(key, 0) + x * y
        return {k: val for k, val in out.items() if val}

    def zero(self) -> dict:
        return {}

    def lincomb(self, pairs) -> dict:
        out: dict = {}
        for c, u in pairs:
            for k, x in u.items():
                out[k] = out.get(k, 0) + c * x
        return {k: v for k, v in out.items() if v}

    def is_zero(self, u) -> bool:
        return not any(u.values())

    def describe(self, u) -> dict:
        return {self.label(k): str(v) for k, v in sorted(u.items())}

    def basis_tuples(self, k: int):
        """Basis k-tuples of total length <= max_degree.

        Every monomial of a multilinear identity evaluated on a tuple has
        length equal to the total length, so all other tuples give 0 on both
        sides; enumerating these is an exhaustive check.
        """
        by_len = {n: [(w, c) for w in itertools.product(range(self.letters), repeat=n) for c in range(1, n + 1)]
                  for n in range(1, self.max_degree + 1)}

        def rec(k, budget):
            if k == 0:
                yield ()
                return
            for n in range(1, budget - (k - 1) + 1):
                for key in by_len[n]:
                    for rest in rec(k - 1, budget - n):
                        yield (key,) + rest

        for tup in rec(k, self.max_degree):
            yield tuple({key: 1} for key in tup)

    def basis_keys(self) -> list:
        keys = []
        for n in range(1, self.max_degree + 1):
            for w in itertools.product(range(self.letters), repeat=n):
                for c in range(1, n + 1):
                    keys.append((w, c))
        return keys

    def to_dense(self, p: int = 1_000_003) -> DialgebraInstance:
        """Dense copy over GF(p).

        Structure constants are 0/1 and products of basis elements are basis
        elements or 0, so a degree-k identity with integer coefficients of
        total size < p/2 vanishes over GF(p) exactly when it vanishes over the
        integers.
        """
        f = GF(p)
        keys = self.basis_keys()
        index = {k: i for i, k in enumerate(keys)}
        d = len(keys)
        left = np.zeros((d, d, d), dtype=np.int64)
        right = np.zeros((d, d, d), dtype=np.int64)
        star = np.zeros((d, d), dtype=np.int64)
        for i, (w, c) in enumerate(keys):
            star[i, index[(tuple(self._star_letter(x) for x in reversed(w)), len(w) + 1 - c)]] = 1
            for j, (w2, c2) in enumerate(keys):
                if len(w) + len(w2) > self.max_degree:
                    continue
                left[i, j, index[(w + w2, c)]] = 1
                right[i, j, index[(w + w2, len(w) + c2)]] = 1
        inst = DialgebraInstance(f, left, right, star, [self.label(k) for k in keys], "free-dialgebra")
        return inst


def free_dialgebra(g: int, max_degree: int, paired: bool = False) -> FreeDialgebra:
    return FreeDialgebra(g, max_degree, paired)


# -- block matrices --------------------------------------------------------


@dataclass(frozen=True)
class BlockContext:
    """``M_m^{m1}`` over GF(p) (or QQ when ``p`` is None).

    ``complex_like`` switches the base ring to GF(p) x GF(p) with the swap as
    conjugation, so the conjugate transpose is not just the transpose.
    """

    m: int
    m1: int
    p: int | None = 5
    complex_like: bool = False

    def __post_init__(self):
        if not 1 <= self.m1 < self.m:
            raise ValueError(f"need 1 <= m1 < m, got m={self.m}, m1={self.m1}")

    @property
    def field(self) -> Field:
        return QQ if self.p is None else GF(self.p)

    @property
    def dim(self) -> int:
        return self.m * self.m * (2 if self.complex_like else 1)

    def labels(self) -> list[str]:
        base = [f"E{i + 1}{j + 1}" for i in range(self.m) for j in range(self.m)]
        if not self.complex_like:
            return base
        return [f"{b}.{s}" for s in (1, 2) for b in base]

    # A vector is stored as one (or two stacked) m x m matrices.
    def to_matrices(self, v: np.ndarray) -> np.ndarray:
        return np.asarray(v).reshape(-1, self.m, self.m)

    def from_matrices(self, mats: np.ndarray) -> np.ndarray:
        return np.asarray(mats).reshape(-1)

    def blocks(self, a: np.ndarray):
        k = self.m - self.m1
        return a[..., :k, :k], a[..., :k, k:], a[..., k:, :k], a[..., k:, k:]  # f, u, l, d


def _block_left(ctx: BlockContext, f: Field, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # A ⊣ B = (0, u_A d_B ; 0, d_A d_B)
    _, ua, _, da = ctx.blocks(a)
    _, _, _, db = ctx.blocks(b)
    out = f.zeros(a.shape)
    k = ctx.m - ctx.m1
    out[..., :k, k:] = f.matmul(ua, db)
    out[..., k:, k:] = f.matmul(da, db)
    return out


def _block_right(ctx: BlockContext, f: Field, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # A ⊢ B = (0, 0 ; d_A l_B, d_A d_B)
    _, _, _, da = ctx.blocks(a)
    _, _, lb, db = ctx.blocks(b)
    out = f.zeros(a.shape)
    k = ctx.m - ctx.m1
    out[..., k:, :k] = f.matmul(da, lb)
    out[..., k:, k:] = f.matmul(da, db)
    return out


def _conj_transpose(ctx: BlockContext, a: np.ndarray) -> np.ndarray:
    t = np.swapaxes(a, -1, -2)
    if ctx.complex_like:
        t = t[::-1]
    return t


def matrix_dialgebra(ctx: BlockContext) -> DialgebraInstance:
    """Dialgebra on ``M_m^{m1}`` with the block products and conjugate transpose."""
    f = ctx.field
    d = ctx.dim
    eye = f.eye(d)
    mats = [ctx.to_matrices(eye[i]) for i in range(d)]
    left = f.zeros((d, d, d))
    right = f.zeros((d, d, d))
    star = f.zeros((d, d))
    for i, a in enumerate(mats):
        star[i] = ctx.from_matrices(_conj_transpose(ctx, a))
        for j, b in enumerate(mats):
            left[i, j] = ctx.from_matrices(_block_left(ctx, f, a, b))
            right[i, j] = ctx.from_matrices(_block_right(ctx, f, a, b))
    return DialgebraInstance(f, left, right, star, ctx.labels(), f"matrix(m={ctx.m},m1={ctx.m1})")


def matrix_vector(ctx: BlockContext, entries) -> np.ndarray:
    """Module vector of a matrix given as nested lists (or a pair of them)."""
    return ctx.field.array(np.asarray(entries, dtype=object).reshape(-1))


# -- differential algebras -------------------------------------------------


def differential_dialgebra(field_: Field, mult, d_map, labels=None) -> DialgebraInstance:
    """``a ⊣ b = a·d(b)`` and ``a ⊢ b = d(a)·b``.

    ``mult`` is the associative product tensor, ``d_map`` the matrix of ``d``
    in row convention (row i is d of basis element i).
    """
    mult = np.asarray(field_.array(mult) if not isinstance(mult, np.ndarray) or mult.dtype != field_.dtype else mult)
    dm = d_map.data if isinstance(d_map, ExactMatrix) else field_.array(d_map)
    n = mult.shape[0]
    base = DenseStructure(field_, n, {"mul": mult, "d": dm})
    a, b, c = V("a"), V("b"), V("c")
    from .structures import materialize, poly_tensor  # local: avoid widening the import surface

    assoc = materialize(base, [(O("mul", O("mul", a, b), c), 1), (O("mul", a, O("mul", b, c)), -1)], "abc")
    bad = np.argwhere(np.any(assoc != 0, axis=-1))
    if bad.size:
        raise PreconditionError("product is not associative", tuple(int(x) for x in bad[0]))
    dd = field_.matmul(dm, dm)
    bad = np.argwhere(dd != 0)
    if bad.size:
        raise PreconditionError("d∘d is not zero", int(bad[0][0]))
    leib = materialize(
        base,
        [(O("d", O("mul", a, b)), 1), (O("mul", O("d", a), b), -1), (O("mul", a, O("d", b)), -1)],
        "ab",
    )
    bad = np.argwhere(np.any(leib != 0, axis=-1))
    if bad.size:
        raise PreconditionError("d is not a derivation", tuple(int(x) for x in bad[0]))
    left = materialize(base, [(O("mul", a, O("d", b)), 1)], "ab")
    right = materialize(base, [(O("mul", O("d", a), b), 1)], "ab")
    return DialgebraInstance(field_, left, right, None, labels, "differential")


# -- checkers --------------------------------------------------------------


def _mode_for(D, mode: str):
    if mode == "auto" and isinstance(D, FreeDialgebra):
        return "generators"
    return mode


def check_dialgebra_axioms(D, mode: str = "auto", **kw) -> Report:
    chains = catalog.term_chains("DIALGEBRA", DIALGEBRA_OPS)
    return check_chains(D, chains, "DIALGEBRA", _mode_for(D, mode), **kw)


def involution_chains() -> list[TermChain]:
    a, b = V("a"), V("b")
    return [
        TermChain("star-involutive", (((O("star", O("star", a)), 1),), ((a, 1),)), ("a",)),
        TermChain(
            "star-left",
            (((O("star", O("left", a, b)), 1),), ((O("right", O("star", b), O("star", a)), 1),)),
            ("a", "b"),
        ),
        TermChain(
            "star-right",
            (((O("star", O("right", a, b)), 1),), ((O("left", O("star", b), O("star", a)), 1),)),
            ("a", "b"),
        ),
    ]


def check_involution(D, mode: str = "auto", **kw) -> Report:
    if not getattr(D, "has_involution", False):
        raise ValueError("the dialgebra has no involution")
    return check_chains(D, involution_chains(), "INVOLUTION", _mode_for(D, mode), **kw)


def dminus_bracket(D) -> DenseStructure:
    """``[a,b] = a⊣b − b⊢a`` as an op named ``bracket``."""
    a, b = V("a"), V("b")
    return derive(D, {"bracket": ([(O("left", a, b), 1), (O("right", b, a), -1)], ("a", "b"))})


RIGHT_LEIBNIZ_CONVENTION = "[[a,b],c] = [[a,c],b] + [a,[b,c]]"


def check_right_leibniz(L, op: str = "bracket", mode: str = "auto", **kw) -> Report:
    a, b, c = V("a"), V("b"), V("c")
    br = lambda x, y: O(op, x, y)  # noqa: E731
    chain = TermChain(
        "right-leibniz",
        (((br(br(a, b), c), 1),), ((br(br(a, c), b), 1), (br(a, br(b, c)), 1))),
        ("a", "b", "c"),
    )
    rep = check_chains(L, [chain], "RIGHT_LEIBNIZ", _mode_for(L, mode), **kw)
    rep.notes.append(f"convention: {RIGHT_LEIBNIZ_CONVENTION}")
    return rep


def _bracket_rows(L: DenseStructure, op: str, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """All products rows[i] op cols[j], flattened in (i, j) order."""
    from .structures import _contract

    return _contract(L.field, L.tensors[op], [rows, cols])


def subalgebra_structure_constants(L: DenseStructure, vectors, op: str = "bracket", max_rounds: int = 64):
    """Close ``span(vectors)`` under ``op``.

    Returns ``(basis, constants)``: ``basis`` starts with an independent subset
    of ``vectors`` (kept in the given order) and is extended by new products as
    needed; ``constants[i, j]`` are the coordinates of ``basis[i] op basis[j]``.
    """
    f = L.field
    vecs = np.asarray(vectors, dtype=f.dtype).reshape(-1, L.dim)
    basis = f.zeros((0, L.dim))
    for v in vecs:
        cand = np.vstack([basis, v.reshape(1, -1)])
        if len(rref(f, cand)[1]) == cand.shape[0]:
            basis = cand
    for _ in range(max_rounds):
        if basis.shape[0] == 0:
            break
        prods = _bracket_rows(L, op, basis, basis)
        eb = EchelonBasis.span(f, list(basis), L.dim)
        _, bad = eb.coords_many(prods)
        if not bad:
            break
        for idx in bad:
            cand = np.vstack([basis, prods[idx].reshape(1, -1)])
            if len(rref(f, cand)[1]) == cand.shape[0]:
                basis = cand
    else:
        raise RuntimeError("closure did not stabilize")
    k = basis.shape[0]
    if k == 0:
        return basis, f.zeros((0, 0, 0))
    prods = _bracket_rows(L, op, basis, basis)
    coords, bad = express_in(f, basis, prods)
    assert not bad
    return basis, coords.reshape(k, k, k)


def bracket_image_rank(L: DenseStructure, op: str = "bracket") -> int:
    t = L.tensors[op].reshape(-1, L.dim)
    return len(rref(L.field, t)[1])
