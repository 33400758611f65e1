import numpy as np
import pytest

from trisys.dialg import BlockContext, PreconditionError, check_dialgebra_axioms, matrix_dialgebra
from trisys.embed import (
    ClosureError,
    DiEndPair,
    OpDiEndPair,
    build_L_R,
    build_M,
    build_U,
    build_U2,
    check_diend_dialgebra,
    check_diendomorphism_lemma,
    check_extraidentity,
    extraidentity_counterexample,
    lr_operators,
    mutation_sensitivity,
)
from trisys.exactlin import GF, QQ, ExactMatrix
from trisys.trisystems import att1_from_dialgebra, att2_from_dialgebra, check_variety

F5 = GF(5)


@pytest.fixture(scope="module")
def D():
    return matrix_dialgebra(BlockContext(2, 1, 5))


def test_diend_products_by_hand():
    f = DiEndPair(ExactMatrix.from_rows(F5, [[1, 1], [0, 1]]), ExactMatrix.from_rows(F5, [[2, 0], [0, 3]]))
    g = DiEndPair(ExactMatrix.from_rows(F5, [[0, 1], [1, 0]]), ExactMatrix.from_rows(F5, [[1, 0], [1, 1]]))
    # f ⊣ g = (f1 g2, f2 g2), f ⊢ g = (f2 g1, f2 g2)
    assert f.left(g) == DiEndPair(f.f1 @ g.f2, f.f2 @ g.f2)
    assert f.right(g) == DiEndPair(f.f2 @ g.f1, f.f2 @ g.f2)
    x = F5.array([1, 2])
    assert np.array_equal(f.prec(x), f.f1.data @ x % 5)


def test_op_pairs_act_on_rows():
    g = OpDiEndPair(ExactMatrix.from_rows(F5, [[1, 2], [3, 4]]), ExactMatrix.from_rows(F5, [[0, 1], [1, 0]]))
    x = F5.array([1, 0])
    assert list(g.succ(x)) == [1, 2]
    assert list(g.prec(x)) == [0, 1]


@pytest.mark.parametrize("field", [F5, QQ])
def test_lemmas(field):
    assert check_diendomorphism_lemma(field, 3, count=30).passed
    assert check_diend_dialgebra(field, 3, count=20).passed
    assert check_diend_dialgebra(field, 3, count=20, op=True).passed


def test_extraidentity_and_counterexample(D):
    assert check_extraidentity(att1_from_dialgebra(D), count=30).passed
    cex = extraidentity_counterexample(F5, 4, seed=0)
    assert cex is not None
    assert np.any(cex["lhs"] != cex["rhs"])


def test_lr_operators_evaluate_the_products(D):
    T = att1_from_dialgebra(D)
    x, y, z = (D.basis(i) for i in (1, 3, 3))
    ops = lr_operators(T, x, y)
    # L◁(x,y) z = {x,y,z}_1 and L▷(x,y) z = {x,y,z}_2 in the first component
    assert np.array_equal(ops["L◁"].prec(z), T.apply("t1", x, y, z))
    assert np.array_equal(ops["L▷"].prec(z), T.apply("t2", x, y, z))


def test_first_kind(D):
    T = att1_from_dialgebra(D)
    M = build_M(T)
    assert all(c.passed for c in M.products)
    U = build_U(T)
    assert U.passed and U.dim == 7
    assert [b[0] for b in U.blocks] == ["M", "A"]
    x = D.basis(2)
    assert np.array_equal(U.embed(x)[3:], x)


def test_first_kind_rejects_non_att1(D):
    T = att1_from_dialgebra(D)
    t1 = T.tensors["t1"].copy()
    t1[0, 0, 0, 0] = 1
    with pytest.raises(PreconditionError):
        build_U(T.replace(t1=t1))


def test_second_kind_star_is_not_well_defined(D):
    T = att2_from_dialgebra(D)
    lr = build_L_R(T)
    failing = {c.name for c in lr.chains if not c.passed}
    assert failing == {"L-star-well-defined", "R-star-well-defined", "L-star-involutive", "R-star-involutive"}
    with pytest.raises(ClosureError):
        build_U2(T)


def test_second_kind_graph_star(D):
    U2 = build_U2(att2_from_dialgebra(D), star="graph")
    assert U2.passed
    assert U2.dim == 14
    assert check_dialgebra_axioms(U2.algebra, "exhaustive").passed


def test_mutations_mostly_detected(D):
    T = att1_from_dialgebra(D)
    recs = mutation_sensitivity(T, lambda s: check_variety(s, "ATT1", "exhaustive"), count=20, seed=0)
    missed = [r for r in recs if not r["detected"]]
    assert len(recs) == 20 and len(missed) == 1
    # the one missed mutation leaves a structure that really is an ATT1
    (r,) = missed
    idx = tuple(T.labels.index(lab) for lab in r["index"])
    t = T.tensors[r["op"]].copy()
    t[idx] = (t[idx] + r["delta"]) % 5
    assert check_variety(T.replace(**{r["op"]: t}), "ATT1", "exhaustive").passed
