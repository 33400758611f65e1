"""Finite-dimensional modules with named multilinear operations, and an
exact evaluator for identities in those operations.

Operations are either dense structure tensors (``shape = (dim,)*arity + (dim,)``,
entry ``T[i1,..,ik,:]`` = coordinates of the product of basis elements) or
lazy callables.  Vectors are row vectors: a unary operation ``S`` maps ``v``
to ``v @ S``.

Identities are evaluated on *terms*, a small internal tree type that can also
express unary maps (such as an involution) which the surface language lacks.
"""

from __future__ import annotations

import itertools
import os
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .dsl import Bracket, IdentityChain, Polynomial, Var
from .exactlin import Field

__all__ = [
    "V",
    "O",
    "TermChain",
    "DenseStructure",
    "LazyStructure",
    "ChainResult",
    "Report",
    "EvalCapExceeded",
    "UnresolvedOperation",
    "eval_cap",
    "to_term",
    "chain_terms",
    "term_tensor",
    "poly_tensor",
    "materialize",
    "derive",
    "evaluate",
    "check_chain",
    "check_chains",
]

DEFAULT_EVAL_CAP = 10**7
_CHUNK_ENTRIES = 4_000_000


class EvalCapExceeded(RuntimeError):
    pass


class UnresolvedOperation(KeyError):
    pass


def eval_cap() -> int:
    raw = os.environ.get("TRISYS_EVAL_CAP")
    if raw is None:
        return DEFAULT_EVAL_CAP
    cap = int(raw)
    if cap < 1:
        raise ValueError("TRISYS_EVAL_CAP must be at least 1")
    return cap


# -- terms -----------------------------------------------------------------
# A term is ("v", name) or ("o", opname, (arg, ...)).


def V(name: str) -> tuple:
    return ("v", name)


def O(op: str, *args) -> tuple:
    return ("o", op, tuple(args))


def term_leaves(t) -> list[str]:
    if t[0] == "v":
        return [t[1]]
    out: list[str] = []
    for a in t[2]:
        out.extend(term_leaves(a))
    return out


def term_str(t) -> str:
    if t[0] == "v":
        return t[1]
    return f"{t[1]}(" + ",".join(term_str(a) for a in t[2]) + ")"


@dataclass(frozen=True)
class TermChain:
    """Members (each a list of ``(term, coeff)``) asserted pairwise equal."""

    name: str
    members: tuple
    var_order: tuple

    @property
    def degree(self) -> int:
        return len(self.var_order)


def to_term(m, op_map: Mapping) -> tuple:
    if isinstance(m, Var):
        return V(m.name)
    if m.sub not in op_map:
        raise UnresolvedOperation(f"no operation bound to subscript {m.sub!r} (bracket {m})")
    return O(op_map[m.sub], *(to_term(a, op_map) for a in m.args))


def chain_terms(chain: IdentityChain, op_map: Mapping) -> TermChain:
    members = tuple(tuple((to_term(m, op_map), c) for m, c in p.terms) for p in chain.members)
    return TermChain(chain.name, members, tuple(chain.var_order))


def poly_terms(p: Polynomial, op_map: Mapping) -> list:
    return [(to_term(m, op_map), c) for m, c in p.terms]


# -- structures ------------------------------------------------------------


class DenseStructure:
    """Module of dimension ``dim`` with dense structure tensors."""

    dense = True

    def __init__(self, field_: Field, dim: int, tensors: Mapping[str, np.ndarray], labels: Sequence[str] | None = None):
        self.field = field_
        self.dim = dim
        self.tensors: dict[str, np.ndarray] = {}
        for name, t in tensors.items():
            t = np.asarray(t, dtype=field_.dtype)
            if t.ndim < 2 or any(s != dim for s in t.shape):
                raise ValueError(f"tensor {name!r} has shape {t.shape}, expected ({dim},...)")
            t = t.copy()
            t.setflags(write=False)
            self.tensors[name] = t
        self.labels = list(labels) if labels is not None else [f"e{i + 1}" for i in range(dim)]
        if len(self.labels) != dim:
            raise ValueError("label count does not match dimension")

    def arity(self, name: str) -> int:
        try:
            return self.tensors[name].ndim - 1
        except KeyError:
            raise UnresolvedOperation(f"unknown operation {name!r}") from None

    def has_op(self, name: str) -> bool:
        return name in self.tensors

    @property
    def op_names(self) -> list[str]:
        return list(self.tensors)

    def basis(self, i: int) -> np.ndarray:
        v = self.field.zeros(self.dim)
        v[i] = self.field.raw(1)
        return v

    def zero(self) -> np.ndarray:
        return self.field.zeros(self.dim)

    def apply(self, name: str, *vecs: np.ndarray) -> np.ndarray:
        t = self.tensors.get(name)
        if t is None:
            raise UnresolvedOperation(f"unknown operation {name!r}")
        if len(vecs) != t.ndim - 1:
            raise ValueError(f"{name} takes {t.ndim - 1} arguments, got {len(vecs)}")
        d = self.dim
        r = t.reshape(d, -1)
        for k, v in enumerate(vecs):
            r = self.field.matmul(np.asarray(v).reshape(1, d), r)
            if k < len(vecs) - 1:
                r = r.reshape(d, -1)
        return r.reshape(d)

    def lincomb(self, pairs: Iterable[tuple[int, np.ndarray]]) -> np.ndarray:
        acc = self.zero()
        for c, v in pairs:
            acc = acc + v * self.field.raw(c)
        return self.field.reduce(acc)

    def is_zero(self, v) -> bool:
        return not np.any(np.asarray(v) != 0)

    def random_vector(self, rng: np.random.Generator) -> np.ndarray:
        return self.field.random_array(rng, (self.dim,))

    def describe(self, v) -> dict:
        return {self.labels[i]: str(self.field(x)) for i, x in enumerate(np.asarray(v)) if x != 0}

    def with_tensors(self, tensors: Mapping[str, np.ndarray]) -> "DenseStructure":
        return DenseStructure(self.field, self.dim, tensors, self.labels)


class LazyStructure:
    """Operations given by callables on an underlying structure's vectors."""

    dense = False

    def __init__(self, base, ops: Mapping[str, tuple[int, Callable]]):
        self.base = base
        self.field = base.field
        self.ops = dict(ops)

    def arity(self, name: str) -> int:
        if name not in self.ops:
            raise UnresolvedOperation(f"unknown operation {name!r}")
        return self.ops[name][0]

    def has_op(self, name: str) -> bool:
        return name in self.ops

    @property
    def op_names(self) -> list[str]:
        return list(self.ops)

    def apply(self, name: str, *vecs):
        k, fn = self.ops[name]
        if len(vecs) != k:
            raise ValueError(f"{name} takes {k} arguments, got {len(vecs)}")
        return fn(*vecs)

    def __getattr__(self, item):
        # zero, lincomb, is_zero, generator, describe ... come from the base
        return getattr(self.base, item)


# -- dense full-tensor evaluation -----------------------------------------


def _contract(field_: Field, tensor: np.ndarray, args: list[np.ndarray]) -> np.ndarray:
    """Rows of the result enumerate all combinations of the argument rows."""
    d = tensor.shape[0]
    r = field_.matmul(args[0], tensor.reshape(d, -1))  # (P1, d^(k-1)*d)
    p = args[0].shape[0]
    for a in args[1:]:
        rest = r.shape[1] // d
        r = r.reshape(p, d, rest).transpose(0, 2, 1).reshape(-1, d)
        r = field_.matmul(r, np.ascontiguousarray(a.T))  # (p*rest, q)
        q = a.shape[0]
        r = r.reshape(p, rest, q).transpose(0, 2, 1).reshape(p * q, rest)
        p *= q
    return r


def term_tensor(struct: DenseStructure, t, subs: Mapping[str, np.ndarray]) -> np.ndarray:
    """Evaluate ``t`` on all combinations of substitution rows, leaf order."""
    if t[0] == "v":
        return subs[t[1]]
    tensor = struct.tensors.get(t[1])
    if tensor is None:
        raise UnresolvedOperation(f"unknown operation {t[1]!r}")
    if tensor.ndim - 1 != len(t[2]):
        raise ValueError(f"{t[1]} takes {tensor.ndim - 1} arguments, got {len(t[2])}")
    args = [term_tensor(struct, a, subs) for a in t[2]]
    return _contract(struct.field, tensor, args)


def poly_tensor(struct: DenseStructure, poly, var_order: Sequence[str], subs: Mapping[str, np.ndarray]) -> np.ndarray:
    """Sum of ``coeff * term`` with rows in ``var_order`` mixed-radix order."""
    f = struct.field
    sizes = [subs[v].shape[0] for v in var_order]
    n = int(np.prod(sizes)) if sizes else 1
    acc = f.zeros((n, struct.dim))
    for t, c in poly:
        leaves = term_leaves(t)
        val = term_tensor(struct, t, subs)
        if leaves != list(var_order):
            shape = [subs[v].shape[0] for v in leaves] + [struct.dim]
            perm = [leaves.index(v) for v in var_order] + [len(leaves)]
            val = val.reshape(shape).transpose(perm).reshape(n, struct.dim)
        acc = acc + val * f.raw(c)
    return f.reduce(acc)


def materialize(struct: DenseStructure, poly, var_order: Sequence[str]) -> np.ndarray:
    eye = struct.field.eye(struct.dim)
    subs = {v: eye for v in var_order}
    flat = poly_tensor(struct, poly, var_order, subs)
    return flat.reshape((struct.dim,) * (len(var_order) + 1))


def evaluate(struct, t, assign: Mapping[str, object]):
    """Pointwise evaluation of a term for any structure."""
    if t[0] == "v":
        return assign[t[1]]
    return struct.apply(t[1], *(evaluate(struct, a, assign) for a in t[2]))


def evaluate_poly(struct, poly, assign):
    return struct.lincomb((c, evaluate(struct, t, assign)) for t, c in poly)


def derive(struct, defs: Mapping[str, tuple]):
    """New structure whose operations are polynomial expressions in ``struct``'s.

    ``defs`` maps a new op name to ``(term_poly, var_order)``.  Dense inputs are
    materialized into tensors; others get lazy callables.
    """
    if getattr(struct, "dense", False):
        tensors = {name: materialize(struct, poly, order) for name, (poly, order) in defs.items()}
        return struct.with_tensors(tensors)
    ops = {}
    for name, (poly, order) in defs.items():
        def fn(*vecs, poly=poly, order=order):
            return evaluate_poly(struct, poly, dict(zip(order, vecs)))

        ops[name] = (len(order), fn)
    return LazyStructure(struct, ops)


# -- checking --------------------------------------------------------------


@dataclass
class ChainResult:
    name: str
    status: str
    witnesses: list = field(default_factory=list)
    evaluations: int = 0

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json(self) -> dict:
        return {"name": self.name, "status": self.status, "witnesses": self.witnesses}


@dataclass
class Report:
    set: str
    chains: list
    evaluations: int = 0
    elapsed: float = 0.0
    mode: str = ""
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.chains)

    def failures(self) -> list:
        return [c for c in self.chains if not c.passed]

    def to_json(self) -> dict:
        out = {
            "set": self.set,
            "chains": [c.to_json() for c in self.chains],
            "evaluations": self.evaluations,
            "elapsed": round(self.elapsed, 6),
        }
        if self.mode:
            out["mode"] = self.mode
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def _differences(tc: TermChain) -> list:
    diffs = []
    for a, b in zip(tc.members, tc.members[1:]):
        diffs.append(list(a) + [(t, -c) for t, c in b])
    return diffs


def _check_dense_exhaustive(struct: DenseStructure, tc: TermChain, max_witnesses: int, cap: int):
    d, deg = struct.dim, tc.degree
    total = d**deg
    if total > cap:
        raise EvalCapExceeded(f"{tc.name}: {d}^{deg} = {total} tuples exceeds the cap {cap}")
    eye = struct.field.eye(d)
    prefix = 0
    while prefix < deg and d ** (deg - prefix) * d > _CHUNK_ENTRIES:
        prefix += 1
    witnesses = []
    diffs = _differences(tc)
    for fixed in itertools.product(range(d), repeat=prefix):
        subs = {v: eye for v in tc.var_order}
        for v, i in zip(tc.var_order[:prefix], fixed):
            subs[v] = eye[i : i + 1]
        for k, diff in enumerate(diffs):
            val = poly_tensor(struct, diff, tc.var_order, subs)
            bad = np.nonzero(np.any(val != 0, axis=1))[0]
            if bad.size == 0:
                continue
            free_sizes = [d] * (deg - prefix)
            for row in bad[: max_witnesses - len(witnesses)]:
                idx = list(fixed) + (list(np.unravel_index(int(row), free_sizes)) if free_sizes else [])
                witnesses.append(
                    {
                        "step": k + 1,
                        "assignment": {v: struct.labels[int(i)] for v, i in zip(tc.var_order, idx)},
                        "value": struct.describe(val[row]),
                    }
                )
            if len(witnesses) >= max_witnesses:
                return witnesses, total
    return witnesses, total


def _check_pointwise(struct, tc: TermChain, assignments: Iterable[dict], max_witnesses: int, labeller):
    witnesses = []
    count = 0
    diffs = _differences(tc)
    for assign in assignments:
        count += 1
        for k, diff in enumerate(diffs):
            val = evaluate_poly(struct, diff, assign)
            if not struct.is_zero(val):
                witnesses.append({"step": k + 1, "assignment": labeller(assign), "value": struct.describe(val)})
                break
        if len(witnesses) >= max_witnesses:
            break
    return witnesses, count


def check_chain(
    struct,
    tc: TermChain,
    mode: str = "auto",
    *,
    count: int = 100,
    seed: int | None = None,
    cap: int | None = None,
    max_witnesses: int = 5,
) -> ChainResult:
    """Check one term chain.

    ``mode``: ``exhaustive`` (all basis tuples, dense only), ``sampled``
    (``count`` seeded random tuples), ``generators`` (distinct free
    generators) or ``auto``.
    """
    cap = eval_cap() if cap is None else cap
    if mode == "auto":
        if hasattr(struct, "generator"):
            mode = "generators"
        elif struct.dim**tc.degree <= cap:
            mode = "exhaustive"
        elif seed is not None:
            mode = "sampled"
        else:
            raise EvalCapExceeded(f"{tc.name}: {struct.dim}^{tc.degree} exceeds the cap; sampled mode needs an explicit seed")
    if mode == "exhaustive" and hasattr(struct, "basis_tuples"):
        gen = (dict(zip(tc.var_order, tup)) for tup in struct.basis_tuples(tc.degree))
        wit, n = _check_pointwise(struct, tc, gen, max_witnesses, lambda a: {v: next(iter(struct.describe(x))) for v, x in a.items()})
    elif mode == "exhaustive":
        if not getattr(struct, "dense", False):
            raise ValueError("exhaustive mode needs dense structure tensors")
        wit, n = _check_dense_exhaustive(struct, tc, max_witnesses, cap)
    elif mode == "sampled":
        if seed is None:
            raise ValueError("sampled mode requires an explicit seed")
        rng = np.random.default_rng(seed)
        gen = ({v: struct.random_vector(rng) for v in tc.var_order} for _ in range(count))
        wit, n = _check_pointwise(struct, tc, gen, max_witnesses, lambda a: {v: struct.describe(x) for v, x in a.items()})
    elif mode == "generators":
        if not hasattr(struct, "generator"):
            raise ValueError("generators mode needs a free structure")
        assign = {v: struct.generator(i) for i, v in enumerate(tc.var_order)}
        wit, n = _check_pointwise(struct, tc, [assign], max_witnesses, lambda a: {v: f"x{i + 1}" for i, v in enumerate(tc.var_order)})
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return ChainResult(tc.name, "pass" if not wit else "fail", wit, n)


def check_chains(struct, chains: Sequence[TermChain], set_name: str, mode: str = "auto", **kw) -> Report:
    t0 = time.perf_counter()
    results = [check_chain(struct, tc, mode, **kw) for tc in chains]
    return Report(set_name, results, sum(r.evaluations for r in results), time.perf_counter() - t0, mode)
