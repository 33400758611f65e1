from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trisys.exactlin import GF, QQ, EchelonBasis, ExactMatrix, Field, KindMismatchError, express_in, rref

F7 = GF(7)
small = st.integers(-50, 50)
fractions = st.fractions(min_value=-20, max_value=20, max_denominator=9)


@given(small, small, small)
def test_gf_ring_laws(x, y, z):
    a, b, c = F7(x), F7(y), F7(z)
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a - a == F7(0)


@given(small.filter(lambda n: n % 7))
def test_gf_inverse(x):
    a = F7(x)
    assert a * a.inverse() == F7(1)
    assert a / a == F7(1)


@given(fractions, fractions)
def test_rationals_stay_exact(x, y):
    assert QQ(x) + QQ(y) == x + y
    assert isinstance(QQ(x) * QQ(y), Fraction)


def test_bad_fields():
    with pytest.raises(ValueError):
        GF(2)
    with pytest.raises(ValueError):
        GF(9)
    with pytest.raises(KindMismatchError):
        GF(5)(GF(7)(1))


def test_json_round_trip():
    for f in (QQ, GF(5), GF(1_000_003)):
        assert Field.from_json(f.to_json()) == f


@settings(max_examples=40)
@given(st.lists(st.lists(st.integers(0, 6), min_size=4, max_size=4), min_size=1, max_size=5))
def test_rref_is_idempotent_and_spans(rows):
    a = F7.from_ints(np.array(rows))
    r, piv = rref(F7, a)
    r2, piv2 = rref(F7, r)
    assert piv == piv2 and np.array_equal(r, r2)
    eb = EchelonBasis.span(F7, list(a), 4)
    _, bad = eb.coords_many(a)
    assert bad == []


def test_int64_matmul_agrees_with_object_arithmetic():
    f = GF(1_000_003)
    rng = np.random.default_rng(1)
    a = f.random_array(rng, (6, 6))
    b = f.random_array(rng, (6, 6))
    slow = (a.astype(object) @ b.astype(object)) % 1_000_003
    assert np.array_equal(f.matmul(a, b), slow.astype(np.int64))


def test_rational_rref_and_membership():
    m = ExactMatrix.from_rows(QQ, [[1, 2, 3], [2, 4, 6], [0, Fraction(1, 2), 1]])
    rows, piv = rref(QQ, m.data)
    assert piv == [0, 1]
    eb = EchelonBasis.span(QQ, list(m.data), 3)
    assert eb.contains(QQ.array([1, 3, 5]))
    assert not eb.contains(QQ.array([0, 0, 1]))


def test_express_in_reports_outsiders():
    basis = F7.from_ints(np.array([[1, 0, 0], [0, 1, 0]]))
    vecs = F7.from_ints(np.array([[3, 4, 0], [0, 0, 1]]))
    coords, bad = express_in(F7, basis, vecs)
    assert bad == [1]
    assert list(coords[0]) == [3, 4]
