"""Named axiom sets, stored as identity-language files next to this module.

Each set records how bracket subscripts map to operation names of the
structures it is checked against.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .dsl import IdentityChain, parse
from .structures import TermChain, chain_terms

__all__ = ["AxiomSet", "SETS", "load", "catalog_path", "set_names"]


@dataclass(frozen=True)
class AxiomSet:
    name: str
    filename: str
    op_map: tuple  # ((subscript, op name), ...)
    expected: int

    @property
    def ops(self) -> dict:
        return dict(self.op_map)


ATT_OPS = ((1, "t1"), (2, "t2"), (3, "t3"))

SETS = {
    "DIALGEBRA": AxiomSet("DIALGEBRA", "dialgebra.ids", ((1, "left"), (2, "right")), 5),
    "LEFT_SYMMETRIC_DI": AxiomSet("LEFT_SYMMETRIC_DI", "left_symmetric_di.ids", ((1, "left"), (2, "right")), 5),
    "ASSOC": AxiomSet("ASSOC", "assoc.ids", ((None, "mul"),), 1),
    "LEFT_SYMMETRIC": AxiomSet("LEFT_SYMMETRIC", "left_symmetric.ids", ((None, "mul"),), 1),
    "ATS1": AxiomSet("ATS1", "ats1.ids", ((None, "t"),), 1),
    "ATS2": AxiomSet("ATS2", "ats2.ids", ((None, "t"),), 1),
    "ATT1": AxiomSet("ATT1", "att1.ids", ATT_OPS, 11),
    "ATT2": AxiomSet("ATT2", "att2.ids", ATT_OPS, 11),
    "JTD": AxiomSet("JTD", "jtd.ids", ((1, "j1"), (2, "j2")), 8),
    "LEIBTS": AxiomSet("LEIBTS", "leibts.ids", ((None, "lb"),), 2),
}


def set_names() -> list[str]:
    return list(SETS)


def catalog_path(filename: str):
    return resources.files("trisys").joinpath("catalog").joinpath(filename)


@lru_cache(maxsize=None)
def load(name: str) -> tuple[IdentityChain, ...]:
    try:
        aset = SETS[name.upper()]
    except KeyError:
        raise KeyError(f"unknown axiom set {name!r}; known: {', '.join(SETS)}") from None
    chains = tuple(parse(catalog_path(aset.filename).read_text(encoding="utf-8")))
    if len(chains) != aset.expected:
        raise ValueError(f"{aset.filename}: expected {aset.expected} identities, found {len(chains)}")
    return chains


def term_chains(name: str, op_map: dict | None = None) -> list[TermChain]:
    aset = SETS[name.upper()]
    ops = aset.ops if op_map is None else op_map
    return [chain_terms(c, ops) for c in load(aset.name)]
