"""Exact scalars, dense exact matrices and echelon-form span computations.

Two scalar kinds are supported: the rationals (``QQ``) and prime fields
``GF(p)`` with ``p`` odd.  Arrays are plain numpy arrays whose dtype depends
on the field: ``object`` arrays of :class:`fractions.Fraction` for QQ, and
``int64`` residues in ``[0, p)`` for GF(p).  Every routine here is exact and
no floating point is used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

__all__ = [
    "Field",
    "QQ",
    "GF",
    "GFElement",
    "Scalar",
    "ExactMatrix",
    "EchelonBasis",
    "KindMismatchError",
    "DimensionError",
    "rref",
    "span_basis",
    "coords_in_span",
    "express_in",
]

_INT64_SAFE = 2**63 - 1


class KindMismatchError(TypeError):
    """Raised when values over different scalar fields are combined."""


class DimensionError(ValueError):
    """Raised on incompatible vector or matrix shapes."""


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for d in range(3, math.isqrt(n) + 1, 2):
        if n % d == 0:
            return False
    return True


@dataclass(frozen=True)
class GFElement:
    """An element of GF(p), stored as its residue in ``[0, p)``."""

    value: int
    p: int

    def __post_init__(self):
        object.__setattr__(self, "value", self.value % self.p)

    def _coerce(self, other) -> int:
        if isinstance(other, GFElement):
            if other.p != self.p:
                raise KindMismatchError(f"GF({self.p}) vs GF({other.p})")
            return other.value
        if isinstance(other, (int, np.integer)):
            return int(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else GFElement(self.value + o, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else GFElement(self.value - o, self.p)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else GFElement(o - self.value, self.p)

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else GFElement(self.value * o, self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return GFElement(-self.value, self.p)

    def inverse(self) -> "GFElement":
        if self.value == 0:
            raise ZeroDivisionError("0 has no inverse in GF(%d)" % self.p)
        return GFElement(pow(self.value, -1, self.p), self.p)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self * GFElement(o, self.p).inverse()

    def __eq__(self, other):
        if isinstance(other, GFElement):
            return self.p == other.p and self.value == other.value
        if isinstance(other, (int, np.integer)):
            return self.value == int(other) % self.p
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.p))

    def __bool__(self):
        return self.value != 0

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"GF({self.p})({self.value})"

    def __str__(self):
        return str(self.value)


Scalar = Union[Fraction, GFElement]


@dataclass(frozen=True)
class Field:
    """A scalar field: ``kind`` is ``"rational"`` or ``"prime"``."""

    kind: str
    modulus: int | None = None

    def __post_init__(self):
        if self.kind == "rational":
            if self.modulus is not None:
                raise ValueError("QQ takes no modulus")
        elif self.kind == "prime":
            p = self.modulus
            if p is None or not _is_prime(p):
                raise ValueError(f"GF(p) needs a prime p, got {p}")
            if p == 2:
                raise ValueError("GF(2) is not allowed: 1/2 must exist in the scalars")
        else:
            raise ValueError(f"unknown scalar kind {self.kind!r}")

    # -- descriptive -------------------------------------------------------
    @property
    def is_rational(self) -> bool:
        return self.kind == "rational"

    @property
    def dtype(self):
        if self.kind == "prime" and self.modulus < 2**31:
            return np.int64
        return object

    def __str__(self):
        return "QQ" if self.is_rational else f"GF({self.modulus})"

    def to_json(self) -> dict:
        if self.is_rational:
            return {"kind": "rational"}
        return {"kind": "prime", "modulus": self.modulus}

    @classmethod
    def from_json(cls, data: dict) -> "Field":
        return cls(data["kind"], data.get("modulus"))

    # -- scalars -----------------------------------------------------------
    def __call__(self, x) -> Scalar:
        if self.is_rational:
            if isinstance(x, GFElement):
                raise KindMismatchError("cannot read a GF element as a rational")
            return Fraction(x)
        if isinstance(x, GFElement):
            if x.p != self.modulus:
                raise KindMismatchError(f"GF({x.p}) element used in {self}")
            return x
        if isinstance(x, Fraction):
            return GFElement(x.numerator, self.modulus) / x.denominator
        if isinstance(x, str):
            return self(Fraction(x))
        return GFElement(int(x), self.modulus)

    def raw(self, x):
        """Scalar (or int / Fraction) to the representation stored in arrays."""
        s = self(x)
        return s if self.is_rational else s.value

    def inv(self, x):
        if self.is_rational:
            return Fraction(1) / Fraction(x)
        return pow(int(x), -1, self.modulus)

    # -- arrays ------------------------------------------------------------
    def array(self, data) -> np.ndarray:
        arr = np.asarray(data, dtype=object)
        if self.is_rational:
            out = np.empty(arr.shape, dtype=object)
            flat_in, flat_out = arr.reshape(-1), out.reshape(-1)
            for i, v in enumerate(flat_in):
                if isinstance(v, GFElement):
                    raise KindMismatchError("GF element in a rational array")
                flat_out[i] = Fraction(v)
            return out
        flat = [self(v).value for v in arr.reshape(-1)]
        return np.array(flat, dtype=self.dtype).reshape(arr.shape)

    def zeros(self, shape) -> np.ndarray:
        if self.is_rational:
            out = np.empty(shape, dtype=object)
            out.fill(Fraction(0))
            return out
        return np.zeros(shape, dtype=self.dtype)

    def eye(self, n: int) -> np.ndarray:
        out = self.zeros((n, n))
        for i in range(n):
            out[i, i] = Fraction(1) if self.is_rational else 1
        return out

    def reduce(self, arr: np.ndarray) -> np.ndarray:
        if self.is_rational:
            return arr
        return np.mod(arr, self.modulus)

    def from_ints(self, arr) -> np.ndarray:
        """Convert an integer numpy array (any sign) into this field's representation."""
        if self.is_rational:
            return self.array(np.asarray(arr).astype(object))
        return np.mod(np.asarray(arr, dtype=object), self.modulus).astype(self.dtype)

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Exact matrix product of arrays already in this field's representation."""
        if self.is_rational or self.dtype is object:
            return self.reduce(np.asarray(a, dtype=object) @ np.asarray(b, dtype=object))
        inner = a.shape[-1] if a.ndim else 1
        if inner * (self.modulus - 1) ** 2 < _INT64_SAFE:
            return np.mod(np.asarray(a, dtype=np.int64) @ np.asarray(b, dtype=np.int64), self.modulus)
        return np.mod(a.astype(object) @ b.astype(object), self.modulus).astype(np.int64)

    def random_array(self, rng: np.random.Generator, shape, *, span: int = 5) -> np.ndarray:
        if self.is_rational:
            ints = rng.integers(-span, span + 1, size=shape)
            return self.from_ints(ints)
        return rng.integers(0, self.modulus, size=shape).astype(self.dtype)

    def scalars(self, arr: np.ndarray) -> tuple:
        return tuple(self(v) for v in np.asarray(arr).reshape(-1))

    def is_zero(self, arr: np.ndarray) -> bool:
        return not np.any(np.asarray(arr) != 0)

    def encode(self, arr: np.ndarray):
        """JSON-friendly nested lists (rationals as strings)."""
        if self.is_rational:
            return np.vectorize(lambda v: str(Fraction(v)), otypes=[object])(arr).tolist() if arr.size else arr.tolist()
        return np.asarray(arr).astype(np.int64).tolist()

    def decode(self, data) -> np.ndarray:
        return self.array(data)


QQ = Field("rational")


def GF(p: int) -> Field:
    return Field("prime", p)


def _check_same(f: Field, g: Field) -> None:
    if f != g:
        raise KindMismatchError(f"{f} vs {g}")


class ExactMatrix:
    """Immutable dense matrix over a :class:`Field`."""

    __slots__ = ("field", "data")

    def __init__(self, field: Field, data):
        arr = data if isinstance(data, np.ndarray) and data.dtype == field.dtype else field.array(data)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2:
            raise DimensionError("ExactMatrix needs 2-d data")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "data", arr)

    def __setattr__(self, name, value):
        raise AttributeError("ExactMatrix is immutable")

    @classmethod
    def from_rows(cls, field: Field, rows: Sequence[Sequence]) -> "ExactMatrix":
        return cls(field, field.array(rows))

    @classmethod
    def zeros(cls, field: Field, rows: int, cols: int) -> "ExactMatrix":
        return cls(field, field.zeros((rows, cols)))

    @classmethod
    def identity(cls, field: Field, n: int) -> "ExactMatrix":
        return cls(field, field.eye(n))

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def entries(self) -> tuple:
        return self.field.scalars(self.data)

    def __getitem__(self, idx) -> Scalar:
        i, j = idx
        return self.field(self.data[i, j])

    def row(self, i: int) -> "ExactMatrix":
        return ExactMatrix(self.field, self.data[i : i + 1])

    def _other(self, other: "ExactMatrix") -> np.ndarray:
        if not isinstance(other, ExactMatrix):
            raise TypeError("expected ExactMatrix")
        _check_same(self.field, other.field)
        return other.data

    def __add__(self, other):
        o = self._other(other)
        if o.shape != self.shape:
            raise DimensionError(f"{self.shape} + {o.shape}")
        return ExactMatrix(self.field, self.field.reduce(self.data + o))

    def __sub__(self, other):
        o = self._other(other)
        if o.shape != self.shape:
            raise DimensionError(f"{self.shape} - {o.shape}")
        return ExactMatrix(self.field, self.field.reduce(self.data - o))

    def __neg__(self):
        return ExactMatrix(self.field, self.field.reduce(-self.data))

    def __matmul__(self, other):
        o = self._other(other)
        if self.cols != o.shape[0]:
            raise DimensionError(f"{self.shape} @ {o.shape}")
        return ExactMatrix(self.field, self.field.matmul(self.data, o))

    def __mul__(self, c):
        s = self.field.raw(c)
        return ExactMatrix(self.field, self.field.reduce(self.data * s))

    __rmul__ = __mul__

    @property
    def T(self) -> "ExactMatrix":
        return ExactMatrix(self.field, self.data.T)

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.field == other.field and self.shape == other.shape and bool(np.all(self.data == other.data))

    def __hash__(self):
        return hash((self.field, self.shape, self.entries))

    def is_zero(self) -> bool:
        return self.field.is_zero(self.data)

    def tolist(self) -> list[list]:
        return [[self.field(v) for v in r] for r in self.data]

    def __repr__(self):
        body = "; ".join(", ".join(str(self.field(v)) for v in r) for r in self.data)
        return f"ExactMatrix[{self.field}]({body})"


def rref(field: Field, arr: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form; returns the nonzero rows and pivot columns."""
    a = np.array(arr, dtype=field.dtype, copy=True)
    if a.ndim != 2:
        raise DimensionError("rref needs a 2-d array")
    nrows, ncols = a.shape
    r = 0
    pivots: list[int] = []
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(a[r:, c] != 0)[0]
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            a[[r, k]] = a[[k, r]]
        a[r] = field.reduce(a[r] * field.inv(a[r, c]))
        others = np.nonzero(a[:, c] != 0)[0]
        others = others[others != r]
        if others.size:
            a[others] = field.reduce(a[others] - np.outer(a[others, c], a[r]))
        pivots.append(c)
        r += 1
    return a[:r], pivots


class EchelonBasis:
    """Reduced-row-echelon basis of a subspace with O(dim) coordinate lookup."""

    def __init__(self, field: Field, rows: np.ndarray, pivots: list[int], ambient: int):
        self.field = field
        self.rows = rows
        self.pivots = list(pivots)
        self.ambient = ambient

    @classmethod
    def span(cls, field: Field, vectors, ambient: int | None = None) -> "EchelonBasis":
        vecs = np.asarray(vectors, dtype=field.dtype) if len(vectors) else None
        if vecs is None:
            if ambient is None:
                raise DimensionError("ambient dimension needed for an empty span")
            return cls(field, field.zeros((0, ambient)), [], ambient)
        vecs = vecs.reshape(len(vectors), -1)
        rows, piv = rref(field, vecs)
        return cls(field, rows, piv, vecs.shape[1])

    @property
    def dim(self) -> int:
        return len(self.pivots)

    def coords(self, v: np.ndarray):
        """Coordinates of ``v`` in this basis, or ``None`` when outside the span."""
        v = np.asarray(v, dtype=self.field.dtype).reshape(-1)
        if v.shape[0] != self.ambient:
            raise DimensionError(f"vector of length {v.shape[0]} in ambient {self.ambient}")
        c = v[self.pivots] if self.pivots else self.field.zeros(0)
        recon = self.field.matmul(c.reshape(1, -1), self.rows).reshape(-1) if self.pivots else self.field.zeros(self.ambient)
        if np.any(recon != v):
            return None
        return c

    def coords_many(self, vs: np.ndarray):
        """Row-wise coordinates; returns ``(coords, bad_row_indices)``."""
        vs = np.asarray(vs, dtype=self.field.dtype).reshape(-1, self.ambient)
        c = vs[:, self.pivots]
        if self.pivots:
            recon = self.field.matmul(c, self.rows)
        else:
            recon = self.field.zeros(vs.shape)
        bad = [int(i) for i in np.nonzero(np.any(recon != vs, axis=1))[0]]
        return c, bad

    def contains(self, v: np.ndarray) -> bool:
        return self.coords(v) is not None


def _as_rows(vectors: Iterable[ExactMatrix]) -> tuple[Field | None, list[np.ndarray]]:
    field = None
    rows = []
    for v in vectors:
        if not isinstance(v, ExactMatrix):
            raise TypeError("span_basis expects ExactMatrix row vectors")
        if field is None:
            field = v.field
        elif v.field != field:
            raise KindMismatchError(f"{field} vs {v.field}")
        rows.extend(v.data)
    return field, rows


def span_basis(vectors: Sequence[ExactMatrix]) -> list[ExactMatrix]:
    """Reduced-row-echelon basis of the span of the given row vectors."""
    field, rows = _as_rows(vectors)
    if field is None or not rows:
        return []
    lengths = {len(r) for r in rows}
    if len(lengths) != 1:
        raise DimensionError(f"vectors of differing lengths {sorted(lengths)}")
    basis = EchelonBasis.span(field, np.stack(rows))
    return [ExactMatrix(field, r) for r in basis.rows]


def coords_in_span(v: ExactMatrix, basis: Sequence[ExactMatrix]):
    """Coefficients expressing ``v`` in an echelon ``basis``; ``None`` if not in the span."""
    if not basis:
        if not v.is_zero():
            return None
        return []
    field, rows = _as_rows(basis)
    _check_same(field, v.field)
    arr = np.stack(rows)
    if v.data.size != arr.shape[1]:
        raise DimensionError(f"vector of length {v.data.size} against basis of length {arr.shape[1]}")
    pivots = []
    for r in arr:
        nz = np.nonzero(r != 0)[0]
        pivots.append(int(nz[0]))
    eb = EchelonBasis(field, arr, pivots, arr.shape[1])
    c = eb.coords(v.data.reshape(-1))
    if c is None:
        return None
    return [field(x) for x in c]


def express_in(field: Field, basis_rows: np.ndarray, vectors: np.ndarray):
    """Coordinates of each row of ``vectors`` w.r.t. the (independent) rows of
    ``basis_rows``.  Returns ``(coords, bad)`` where ``bad`` lists the rows
    of ``vectors`` that lie outside the span."""
    b = np.asarray(basis_rows, dtype=field.dtype).reshape(-1, np.asarray(vectors).shape[-1])
    v = np.asarray(vectors, dtype=field.dtype).reshape(-1, b.shape[1])
    k = b.shape[0]
    aug = np.concatenate([b.T, v.T], axis=1)
    rows, piv = rref(field, aug)
    if piv[:k] != list(range(k)) or (len(piv) > k and piv[k] < k):
        raise DimensionError("basis rows are linearly dependent")
    coords = rows[:k, k:].T.copy()
    extra = rows[k:, k:]
    bad = np.nonzero(np.any(extra != 0, axis=0))[0] if extra.size else np.array([], dtype=int)
    return coords, [int(i) for i in bad]
