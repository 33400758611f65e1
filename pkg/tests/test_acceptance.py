"""Acceptance suite: one test per criterion, exact comparisons only."""

import itertools
import time

import numpy as np
from trisys import catalog, dsl
from trisys.dialg import (
    BlockContext,
    check_dialgebra_axioms,
    check_involution,
    check_right_leibniz,
    dminus_bracket,
    free_dialgebra,
    matrix_dialgebra,
    subalgebra_structure_constants,
)
from trisys.embed import (
    ClosureError,
    build_L_R,
    build_U,
    build_U2,
    check_diendomorphism_lemma,
    check_extraidentity,
    extraidentity_counterexample,
    mutation_sensitivity,
)
from trisys.exactlin import GF, rref
from trisys.kp import compare_chain_sets, kp_apply
from trisys.trisystems import (
    ann_subspace,
    ats_as_trisystem,
    att1_from_dialgebra,
    att2_from_dialgebra,
    check_variety,
    complement_basis,
    complement_closure_check,
    jtd_products,
    leibts_bracket,
)

F5 = GF(5)


def m21():
    return matrix_dialgebra(BlockContext(2, 1, 5))


def failing(*reports):
    return [f"{r.set}/{c.name}" for r in reports for c in r.chains if not c.passed]


# -- independent oracles: ordinary matrix products with a block mask ------


def unit_matrices(m):
    out = []
    for i, j in itertools.product(range(m), repeat=2):
        e = np.zeros((m, m), dtype=np.int64)
        e[i, j] = 1
        out.append(e)
    return out


def lower_right(x, m1):
    k = x.shape[0] - m1
    out = np.zeros_like(x)
    out[k:, k:] = x[k:, k:]
    return out


def oracle_tensor(m, arity, fn):
    es = unit_matrices(m)
    n = len(es)
    t = np.zeros((n,) * arity + (n,), dtype=np.int64)
    for idx in itertools.product(range(n), repeat=arity):
        t[idx] = fn(*(es[i] for i in idx)).reshape(-1) % 5
    return t


def test_c1_kp_goldens(verdict):
    t0 = time.perf_counter()
    cases = [("ASSOC", "DIALGEBRA"), ("LEFT_SYMMETRIC", "LEFT_SYMMETRIC_DI"), ("ATS1", "ATT1"), ("ATS2", "ATT2")]
    bad = []
    for src, golden in cases:
        (chain,) = catalog.load(src)
        out = kp_apply(chain)
        missing, extra = compare_chain_sets(out.deduped, catalog.load(golden))
        expected = catalog.SETS[golden].expected
        if missing or extra or len(out.deduped) != expected:
            bad.append(f"{golden}: {len(out.deduped)}/{expected}, missing {len(missing)}, extra {len(extra)}")
    dt = time.perf_counter() - t0
    verdict("C1 KP goldens 5/5/11/11", not bad and dt < 1, "; ".join(bad) or f"{dt:.2f}s")


def test_c2_asstoass(verdict):
    t0 = time.perf_counter()
    free = check_variety(att1_from_dialgebra(free_dialgebra(5, 5)), "ATT1", mode="generators")
    mat = check_variety(att1_from_dialgebra(m21()), "ATT1", mode="exhaustive")
    dt = time.perf_counter() - t0
    ok = free.passed and mat.passed and len(mat.chains) == 11 and mat.evaluations == 11 * 4**5 and dt < 5
    verdict("C2 ATT1 on free(5,5) and M_2^1", ok, f"{failing(free, mat)} evals={mat.evaluations} {dt:.2f}s")


def test_c3_jordan_and_leibniz(verdict):
    t0 = time.perf_counter()
    models = {
        "free/att1": att1_from_dialgebra(free_dialgebra(5, 5)),
        "free/att2": att2_from_dialgebra(free_dialgebra(5, 5, paired=True)),
        "M21/att1": att1_from_dialgebra(m21()),
        "M21/att2": att2_from_dialgebra(m21()),
    }
    reps = []
    for name, T in models.items():
        mode = "generators" if name.startswith("free") else "exhaustive"
        reps.append(check_variety(jtd_products(T), "JTD", mode=mode))
        reps.append(check_variety(leibts_bracket(T), "LEIBTS", mode=mode))
    dt = time.perf_counter() - t0
    ok = all(r.passed for r in reps) and dt < 10
    verdict("C3 JTD1-8 and LTSA/LTSB on ATT1 and ATT2", ok, f"{failing(*reps)} {dt:.2f}s")


def matrix_example_mismatches(m):
    D = matrix_dialgebra(BlockContext(m, 1, 5))
    T = att2_from_dialgebra(D)
    star = lambda x: x.T  # noqa: E731
    mask = lambda x: lower_right(x, 1)  # noqa: E731
    oracles = {
        "left": oracle_tensor(m, 2, lambda a, b: a @ mask(b)),
        "right": oracle_tensor(m, 2, lambda a, b: mask(a) @ b),
        "t1": oracle_tensor(m, 3, lambda a, b, c: a @ mask(star(b)) @ mask(c)),
        "t2": oracle_tensor(m, 3, lambda a, b, c: mask(a) @ mask(star(b)) @ mask(c)),
        "t3": oracle_tensor(m, 3, lambda a, b, c: mask(a) @ mask(star(b)) @ c),
    }
    have = dict(D.tensors, **{k: T.tensors[k] for k in ("t1", "t2", "t3")})
    mism = [k for k, o in oracles.items() if not np.array_equal(np.asarray(have[k], dtype=np.int64), o)]
    ax = check_dialgebra_axioms(D, "exhaustive")
    inv = check_involution(D, "exhaustive")
    return [f"M_{m}^1/{k}" for k in mism] + [f"M_{m}^1/{c}" for c in failing(ax, inv)]


def test_c4_matrix_example(verdict):
    t0 = time.perf_counter()
    bad = matrix_example_mismatches(2) + matrix_example_mismatches(3)
    dt = time.perf_counter() - t0
    verdict("C4 block products vs masked oracles on M_2^1, M_3^1", not bad and dt < 5, f"{bad} {dt:.2f}s")


def test_c5_leibniz_example(verdict):
    t0 = time.perf_counter()
    L = dminus_bracket(m21())
    f = L.field
    E = {lab: f.eye(4)[i] for i, lab in enumerate(L.labels)}
    E1, E2, E3, X = E["E11"], E["E12"], E["E21"], E["E22"]
    br = lambda x, y: L.apply("bracket", x, y)  # noqa: E731
    zero = f.zeros(4)
    stated = {
        "[E1,X]=0": (br(E1, X), zero),
        "[E2,X]=E2": (br(E2, X), E2),
        "[E3,X]=E3": (br(E3, X), E3),
    }
    B1, B2, B3 = E2, E3, f.reduce(E2 + X)
    stated.update(
        {
            "[B1,B3]=B1": (br(B1, B3), B1),
            "[B2,B3]=B2": (br(B2, B3), B2),
            "[B3,B3]=B1": (br(B3, B3), B1),
        }
    )
    basis, _ = subalgebra_structure_constants(L, np.array([B1, B2, B3]))
    closed = basis.shape[0] == 3
    leib = check_right_leibniz(L, "bracket", "exhaustive")
    dt = time.perf_counter() - t0
    wrong = [k for k, (got, want) in stated.items() if not np.array_equal(got, want)]
    ok = not wrong and closed and leib.passed and dt < 1
    verdict("C5 Leibniz example relations", ok, f"wrong={wrong} closed={closed} leibniz={leib.passed} {dt:.2f}s")


def test_c6_annihilator(verdict):
    t0 = time.perf_counter()
    ats_t = oracle_tensor(2, 3, lambda a, b, c: a @ b @ c)
    ats = ats_as_trisystem(F5, F5.from_ints(ats_t), [f"E{i + 1}{j + 1}" for i in range(2) for j in range(2)])
    ats_ann = len(ann_subspace(ats))
    T = att2_from_dialgebra(m21())
    # brute force over all basis triples: rank of the differences
    diffs = [
        T.tensors["t1"][i, j, k] - T.tensors[o][i, j, k]
        for i, j, k in itertools.product(range(4), repeat=3)
        for o in ("t2", "t3")
    ]
    brute = len(rref(F5, F5.reduce(np.array(diffs)))[1])
    dim = len(ann_subspace(T))
    rep = complement_closure_check(T, complement_basis(T), "ATS2")
    dt = time.perf_counter() - t0
    ok = ats_ann == 0 and dim == brute == 1 and rep.passed and dt < 2
    verdict("C6 A^ann", ok, f"ats={ats_ann} att2 dim={dim} brute={brute} complement={rep.passed} {dt:.2f}s")


def test_c7_first_kind_embedding(verdict):
    t0 = time.perf_counter()
    U = build_U(att1_from_dialgebra(m21()))
    dt = time.perf_counter() - t0
    dialg = [r for r in U.checks if r.set == "DIALGEBRA"]
    ok = U.passed and U.recovery.passed and dialg and dialg[0].passed and dt < 60
    verdict("C7 first-kind embedding", ok, f"dim={U.dim} {failing(U.recovery, *U.checks)} {dt:.2f}s")


def test_c8_second_kind_embedding(verdict):
    t0 = time.perf_counter()
    T = att2_from_dialgebra(m21())
    lr = build_L_R(T)
    items = [c.name for c in lr.chains if not c.passed]
    try:
        U2 = build_U2(T)
        ok = U2.passed and not items
        detail = f"dim={U2.dim} {failing(U2.recovery, *U2.checks)} items={items}"
    except ClosureError as e:
        ok = False
        detail = f"{e}; failing L/R checks: {items}"
    dt = time.perf_counter() - t0
    verdict("C8 second-kind embedding", ok and dt < 120, f"{detail} {dt:.2f}s")


def test_c9_lemma_suite(verdict):
    t0 = time.perf_counter()
    diend = check_diendomorphism_lemma(F5, 3, count=100, seed=0)
    D = m21()
    extra = [
        check_extraidentity(att1_from_dialgebra(D), count=100, seed=0),
        check_extraidentity(att2_from_dialgebra(D), count=100, seed=0),
    ]
    cex = extraidentity_counterexample(F5, 4, seed=0)
    dt = time.perf_counter() - t0
    ok = diend.passed and all(r.passed for r in extra) and cex is not None and dt < 1
    verdict("C9 lemma suite", ok, f"{failing(diend, *extra)} counterexample={cex is not None} {dt:.2f}s")


def test_c10_mutation_sensitivity(verdict):
    t0 = time.perf_counter()
    D = m21()
    models = {
        "dialgebra": (D, lambda s: check_dialgebra_axioms(s, "exhaustive")),
        "att1": (att1_from_dialgebra(D), lambda s: check_variety(s, "ATT1", "exhaustive")),
        "att2": (att2_from_dialgebra(D), lambda s: check_variety(s, "ATT2", "exhaustive")),
    }
    missed = {}
    for name, (S, check) in models.items():
        recs = mutation_sensitivity(S, check, count=20, seed=0)
        miss = [f"{r['op']}{r['index']}" for r in recs if not r["detected"]]
        if miss:
            missed[name] = miss
    dt = time.perf_counter() - t0
    verdict("C10 mutation sensitivity 20/20 per model", not missed and dt < 30, f"undetected={missed} {dt:.2f}s")
