import numpy as np
import pytest

from trisys.dialg import BlockContext, free_dialgebra, matrix_dialgebra
from trisys.exactlin import GF
from trisys.trisystems import (
    NotAComplementError,
    TrisystemInstance,
    ann_subspace,
    ats_as_trisystem,
    att1_from_dialgebra,
    att2_from_dialgebra,
    check_association_orders,
    check_variety,
    complement_basis,
    complement_closure_check,
    jtd_products,
    leibts_bracket,
)

F5 = GF(5)


@pytest.fixture(scope="module")
def D():
    return matrix_dialgebra(BlockContext(2, 1, 5))


def unit(D, *labels):
    return np.array([D.basis(D.labels.index(lab)) for lab in labels])


def test_att1_values(D):
    T = att1_from_dialgebra(D)
    E12, E22 = (D.labels.index(x) for x in ("E12", "E22"))
    # (E12 ⊣ E22) ⊣ E22 = E12
    assert T.describe(T.tensors["t1"][E12, E22, E22]) == {"E12": "1"}
    assert check_association_orders(D, "exhaustive").passed


def test_varieties_on_derived_products(D):
    for T, name in ((att1_from_dialgebra(D), "ATT1"), (att2_from_dialgebra(D), "ATT2")):
        assert check_variety(T, name, "exhaustive").passed
        assert check_variety(jtd_products(T), "JTD", "exhaustive").passed
        assert check_variety(leibts_bracket(T), "LEIBTS", "exhaustive").passed


def test_att2_on_free_paired_model():
    T = att2_from_dialgebra(free_dialgebra(5, 5, paired=True))
    assert check_variety(T, "ATT2", "generators").passed


def test_att2_needs_involution():
    with pytest.raises(ValueError):
        att2_from_dialgebra(matrix_dialgebra(BlockContext(2, 1, 5)).replace(star=None))


def test_ann_of_a_triple_system_is_zero():
    t = F5.zeros((2, 2, 2, 2))
    t[0, 0, 0, 0] = 1
    assert ann_subspace(ats_as_trisystem(F5, t)) == []


@pytest.mark.parametrize("kind", [att1_from_dialgebra, att2_from_dialgebra])
def test_ann_on_m21(D, kind):
    T = kind(D)
    ann = ann_subspace(T)
    assert [T.describe(v.data[0]) for v in ann] == [{"E12": "1"}, {"E21": "1"}]
    comp = complement_basis(T)
    assert np.array_equal(comp, unit(D, "E11", "E22"))
    ats = "ATS1" if kind is att1_from_dialgebra else "ATS2"
    assert complement_closure_check(T, comp, ats).passed


def test_three_vector_complement_is_rejected(D):
    T = att2_from_dialgebra(D)
    with pytest.raises(NotAComplementError):
        complement_closure_check(T, unit(D, "E11", "E21", "E22"), "ATS2")


def test_non_closed_complement_is_reported(D):
    T = att1_from_dialgebra(D)
    comp = F5.reduce(unit(D, "E11", "E22") + unit(D, "E12", "E12"))
    rep = complement_closure_check(T, comp, "ATS1")
    assert not rep.passed


def test_json_round_trip(D):
    T = att1_from_dialgebra(D)
    U = TrisystemInstance.from_json(T.to_json())
    assert all(np.array_equal(U.tensors[k], T.tensors[k]) for k in ("t1", "t2", "t3"))
