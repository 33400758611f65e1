"""Triple trisystems: construction from dialgebras, derived Jordan and Leibniz
products, variety checks and the annihilator-type subspace ``A^ann``."""

from __future__ import annotations

import time
from typing import Mapping, Sequence

import numpy as np

from . import catalog
from .exactlin import EchelonBasis, ExactMatrix, Field, express_in, rref
from .structures import (
    O,
    ChainResult,
    DenseStructure,
    Report,
    V,
    _contract,
    check_chains,
    derive,
    materialize,
)

__all__ = [
    "TrisystemInstance",
    "trisystem",
    "att1_from_dialgebra",
    "att2_from_dialgebra",
    "ats_as_trisystem",
    "jtd_products",
    "leibts_bracket",
    "check_variety",
    "check_association_orders",
    "ann_subspace",
    "complement_basis",
    "complement_closure_check",
    "NotAComplementError",
]

a, b, c = V("a"), V("b"), V("c")
ABC = ("a", "b", "c")

ATT1_DEFS = {
    "t1": ([(O("left", O("left", a, b), c), 1)], ABC),
    "t2": ([(O("left", O("right", a, b), c), 1)], ABC),
    "t3": ([(O("right", O("right", a, b), c), 1)], ABC),
}
ATT2_DEFS = {
    "t1": ([(O("left", a, O("left", O("star", b), c)), 1)], ABC),
    "t2": ([(O("right", a, O("left", O("star", b), c)), 1)], ABC),
    "t3": ([(O("right", a, O("right", O("star", b), c)), 1)], ABC),
}
JTD_DEFS = {
    "j1": ([(O("t1", a, b, c), 1), (O("t3", c, b, a), 1)], ABC),
    "j2": ([(O("t2", a, b, c), 1), (O("t2", c, b, a), 1)], ABC),
}
LEIBTS_DEFS = {
    "lb": (
        [(O("t1", a, b, c), 1), (O("t2", b, a, c), -1), (O("t2", c, a, b), -1), (O("t3", c, b, a), 1)],
        ABC,
    )
}


class NotAComplementError(ValueError):
    pass


class TrisystemInstance(DenseStructure):
    """Dense module with trilinear ops ``t1``, ``t2``, ``t3``."""

    def __init__(self, field_: Field, t1, t2, t3, labels=None, provenance: str = "custom", extra=None):
        tensors = {"t1": t1, "t2": t2, "t3": t3}
        if extra:
            tensors.update(extra)
        d = np.asarray(t1).shape[0]
        super().__init__(field_, d, tensors, labels)
        self.provenance = provenance

    def with_tensors(self, tensors):
        return DenseStructure(self.field, self.dim, tensors, self.labels)

    def replace(self, **tensors) -> "TrisystemInstance":
        t = dict(self.tensors)
        t.update(tensors)
        return TrisystemInstance(self.field, t["t1"], t["t2"], t["t3"], self.labels, self.provenance)

    def to_json(self) -> dict:
        return {
            "type": "trisystem",
            "dim": self.dim,
            "scalar": self.field.to_json(),
            "t1": self.field.encode(self.tensors["t1"]),
            "t2": self.field.encode(self.tensors["t2"]),
            "t3": self.field.encode(self.tensors["t3"]),
            "labels": list(self.labels),
            "provenance": self.provenance,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "TrisystemInstance":
        f = Field.from_json(data["scalar"])
        inst = cls(f, f.decode(data["t1"]), f.decode(data["t2"]), f.decode(data["t3"]), data.get("labels"), data.get("provenance", "file"))
        if inst.dim != data["dim"]:
            raise ValueError(f"dim {data['dim']} does not match tensor size {inst.dim}")
        return inst


def trisystem(struct, provenance: str):
    """Wrap a derived structure with ops t1..t3 as a TrisystemInstance when dense."""
    if getattr(struct, "dense", False):
        t = struct.tensors
        return TrisystemInstance(struct.field, t["t1"], t["t2"], t["t3"], struct.labels, provenance)
    struct.provenance = provenance
    return struct


def att1_from_dialgebra(D):
    """``{a,b,c}_1 = (a⊣b)⊣c``, ``{a,b,c}_2 = (a⊢b)⊣c``, ``{a,b,c}_3 = (a⊢b)⊢c``."""
    return trisystem(derive(D, ATT1_DEFS), f"att1:{getattr(D, 'provenance', 'custom')}")


def att2_from_dialgebra(D):
    """``{a,b,c}_1 = a⊣(b*⊣c)``, ``{a,b,c}_2 = a⊢(b*⊣c)``, ``{a,b,c}_3 = a⊢(b*⊢c)``."""
    if not getattr(D, "has_involution", False):
        raise ValueError("att2_from_dialgebra needs a dialgebra with involution")
    return trisystem(derive(D, ATT2_DEFS), f"att2:{getattr(D, 'provenance', 'custom')}")


def ats_as_trisystem(field_: Field, t, labels=None) -> TrisystemInstance:
    """A triple system viewed as a trisystem with t1 = t2 = t3."""
    return TrisystemInstance(field_, t, t, t, labels, "ats")


def jtd_products(T):
    """``<a,b,c>_1 = {a,b,c}_1 + {c,b,a}_3``, ``<a,b,c>_2 = {a,b,c}_2 + {c,b,a}_2``."""
    return derive(T, JTD_DEFS)


def leibts_bracket(T):
    """``[a,b,c] = {a,b,c}_1 − {b,a,c}_2 − {c,a,b}_2 + {c,b,a}_3``."""
    return derive(T, LEIBTS_DEFS)


def check_variety(struct, set_name: str, mode: str = "auto", **kw) -> Report:
    name = set_name.upper()
    if name not in catalog.SETS:
        raise KeyError(f"unknown axiom set {set_name!r}; known: {', '.join(catalog.SETS)}")
    return check_chains(struct, catalog.term_chains(name), name, mode, **kw)


def check_association_orders(D, mode: str = "auto", **kw) -> Report:
    """Both bracketings of each of the three triple products agree."""
    from .structures import TermChain

    chains = [
        TermChain("t1-assoc", (((O("left", O("left", a, b), c), 1),), ((O("left", a, O("left", b, c)), 1),)), ABC),
        TermChain("t2-assoc", (((O("left", O("right", a, b), c), 1),), ((O("right", a, O("left", b, c)), 1),)), ABC),
        TermChain("t3-assoc", (((O("right", O("right", a, b), c), 1),), ((O("right", a, O("right", b, c)), 1),)), ABC),
    ]
    if mode == "auto" and hasattr(D, "generator"):
        mode = "generators"
    return check_chains(D, chains, "ASSOCIATION_ORDERS", mode, **kw)


# -- A^ann -----------------------------------------------------------------


def _ann_echelon(T: DenseStructure) -> EchelonBasis:
    d = T.dim
    t1, t2, t3 = (T.tensors[k].reshape(-1, d) for k in ("t1", "t2", "t3"))
    diffs = T.field.reduce(np.vstack([t1 - t2, t1 - t3]))
    return EchelonBasis.span(T.field, diffs, d)


def ann_subspace(T: DenseStructure) -> list[ExactMatrix]:
    """Echelon basis of span{t1−t2, t1−t3 over all basis triples}."""
    eb = _ann_echelon(T)
    return [ExactMatrix(T.field, r) for r in eb.rows]


def complement_basis(T: DenseStructure) -> np.ndarray:
    """Unit vectors at the non-pivot columns of the echelon basis of A^ann."""
    eb = _ann_echelon(T)
    eye = T.field.eye(T.dim)
    return eye[[i for i in range(T.dim) if i not in set(eb.pivots)]]


def complement_closure_check(T: DenseStructure, complement, ats: str | None = None) -> Report:
    """Check that ``complement`` is closed, that t1 = t2 = t3 on it, and that
    it satisfies the triple-system identity ``ats`` (ATS1 or ATS2)."""
    t0 = time.perf_counter()
    f = T.field
    comp = np.asarray(complement, dtype=f.dtype).reshape(-1, T.dim)
    ann = _ann_echelon(T)
    k = comp.shape[0]
    stacked = np.vstack([ann.rows, comp]) if ann.dim else comp
    if len(rref(f, stacked)[1]) != T.dim or ann.dim + k != T.dim:
        raise NotAComplementError(
            f"dim A^ann = {ann.dim}, complement has {k} vectors; together they do not form a basis of the {T.dim}-dimensional module"
        )
    if ats is None:
        ats = "ATS2" if str(getattr(T, "provenance", "")).startswith("att2") else "ATS1"
    chains: list[ChainResult] = []
    evaluations = 0
    restricted = {}
    closure_wit = []
    for name in ("t1", "t2", "t3"):
        prods = _contract(f, T.tensors[name], [comp, comp, comp]) if k else f.zeros((0, T.dim))
        evaluations += prods.shape[0]
        coords, bad = express_in(f, comp, prods) if k else (f.zeros((0, 0)), [])
        for row in bad[:5]:
            i, j, l = np.unravel_index(row, (k, k, k))
            closure_wit.append({"op": name, "triple": [int(i), int(j), int(l)], "value": T.describe(prods[row])})
        restricted[name] = coords.reshape((k, k, k, k)) if k else coords
    chains.append(ChainResult("closure", "pass" if not closure_wit else "fail", closure_wit, evaluations))
    if closure_wit:
        return Report(f"COMPLEMENT/{ats}", chains, evaluations, time.perf_counter() - t0)
    coincide_wit = []
    for other in ("t2", "t3"):
        diff = f.reduce(restricted["t1"] - restricted[other])
        for idx in np.argwhere(np.any(diff != 0, axis=-1))[:5]:
            coincide_wit.append({"ops": f"t1-{other}", "triple": [int(x) for x in idx]})
    chains.append(ChainResult("products-coincide", "pass" if not coincide_wit else "fail", coincide_wit, 2 * k**3))
    if not coincide_wit:
        sub = DenseStructure(f, k, {"t": restricted["t1"]}, [f"c{i + 1}" for i in range(k)])
        rep = check_variety(sub, ats, mode="exhaustive")
        chains.extend(rep.chains)
        evaluations += rep.evaluations
    return Report(f"COMPLEMENT/{ats}", chains, evaluations, time.perf_counter() - t0)
