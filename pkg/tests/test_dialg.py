import numpy as np
import pytest

from trisys.dialg import (
    BlockContext,
    DialgebraInstance,
    PreconditionError,
    check_dialgebra_axioms,
    check_involution,
    check_right_leibniz,
    differential_dialgebra,
    dminus_bracket,
    free_dialgebra,
    free_involution,
    FreeDiWord,
    matrix_dialgebra,
    subalgebra_structure_constants,
)
from trisys.exactlin import GF, QQ

F5 = GF(5)


def test_free_products_follow_the_normal_form():
    F = free_dialgebra(2, 4)
    ab_1 = F.element(FreeDiWord((0, 1), 1))
    ba_2 = F.element(FreeDiWord((1, 0), 2))
    assert F.apply("left", ab_1, ba_2) == {((0, 1, 1, 0), 1): 1}
    assert F.apply("right", ab_1, ba_2) == {((0, 1, 1, 0), 4): 1}
    assert F.apply("left", ab_1, F.element(FreeDiWord((0, 0, 0), 1))) == {}


def test_free_involution_reverses():
    assert free_involution(FreeDiWord((0, 1, 2), 1)) == FreeDiWord((2, 1, 0), 3)


@pytest.mark.parametrize("paired", [False, True])
def test_free_dialgebra_axioms(paired):
    F = free_dialgebra(3, 3, paired=paired)
    assert check_dialgebra_axioms(F, "generators").passed
    assert check_dialgebra_axioms(F, "exhaustive").passed
    assert check_involution(F, "exhaustive").passed


def test_free_dense_copy_agrees():
    D = free_dialgebra(2, 3).to_dense()
    assert check_dialgebra_axioms(D, "exhaustive").passed


@pytest.mark.parametrize("ctx", [BlockContext(2, 1, 5), BlockContext(3, 2, 5), BlockContext(3, 1, None), BlockContext(2, 1, 5, True)])
def test_matrix_dialgebras(ctx):
    D = matrix_dialgebra(ctx)
    assert check_dialgebra_axioms(D, "exhaustive").passed
    assert check_involution(D, "exhaustive").passed


def test_bracket_matches_displayed_formula():
    # [A,B] = (0, a12 b22; -b22 a21, 0) on M_2^1
    L = dminus_bracket(matrix_dialgebra(BlockContext(2, 1, 5)))
    eye = np.eye(4, dtype=np.int64)
    for i in range(4):
        for j in range(4):
            a, b = eye[i].reshape(2, 2), eye[j].reshape(2, 2)
            want = np.array([[0, a[0, 1] * b[1, 1]], [-b[1, 1] * a[1, 0], 0]]) % 5
            assert np.array_equal(L.apply("bracket", eye[i], eye[j]), want.reshape(-1))


def test_bracket_signs_on_the_example_basis():
    L = dminus_bracket(matrix_dialgebra(BlockContext(2, 1, 5)))
    E12, E21, E22 = (F5.eye(4)[k] for k in (1, 2, 3))
    assert np.array_equal(L.apply("bracket", E21, E22), F5.reduce(-E21))
    B3 = F5.reduce(E12 + E22)
    assert np.array_equal(L.apply("bracket", E21, B3), F5.reduce(-E21))
    basis, consts = subalgebra_structure_constants(L, np.array([E12, E21, B3]))
    assert basis.shape[0] == 3
    assert check_right_leibniz(L, "bracket", "exhaustive").passed


def test_differential_dialgebra():
    # span{1, x, y}, x and y square to zero, d(x) = y
    mult = np.zeros((3, 3, 3), dtype=np.int64)
    for i in range(3):
        mult[0, i, i] = mult[i, 0, i] = 1
    d = np.zeros((3, 3), dtype=np.int64)
    d[1, 2] = 1
    D = differential_dialgebra(F5, F5.from_ints(mult), F5.from_ints(d), ["1", "x", "y"])
    assert check_dialgebra_axioms(D, "exhaustive").passed


def test_dual_numbers_with_unit_derivative_are_rejected():
    # GF(5)[t]/(t^2) with d(t) = 1: d(t t) = 0 but d(t) t + t d(t) = 2t
    mult = np.zeros((2, 2, 2), dtype=np.int64)
    mult[0, 0, 0] = mult[0, 1, 1] = mult[1, 0, 1] = 1
    d = np.array([[0, 0], [1, 0]])
    with pytest.raises(PreconditionError, match="derivation"):
        differential_dialgebra(F5, F5.from_ints(mult), F5.from_ints(d))


def test_broken_tensor_gives_witness():
    D = matrix_dialgebra(BlockContext(2, 1, 5))
    left = D.tensors["left"].copy()
    left[3, 3, 3] = 2
    rep = check_dialgebra_axioms(D.replace(left=left), "exhaustive")
    assert not rep.passed
    assert rep.failures()[0].witnesses


def test_json_round_trip():
    D = matrix_dialgebra(BlockContext(2, 1, None))
    E = DialgebraInstance.from_json(D.to_json())
    assert E.field == QQ
    assert all(np.array_equal(E.tensors[k], D.tensors[k]) for k in D.tensors)
