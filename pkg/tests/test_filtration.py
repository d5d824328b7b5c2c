import itertools
import random

import pytest

from epsclass import filtration as fl
from epsclass import zlin


def brute_elements(relations):
    """All coset representatives of Z^g / L, via the triangular HNF basis."""
    H = zlin.hnf_columns([list(r) for r in relations])
    g = len(H)

    def canon(v):
        v = list(v)
        for i in range(g):
            q = v[i] // H[i][i]
            if q:
                for r in range(g):
                    v[r] -= q * H[r][i]
        return tuple(v)

    reps = [canon(v) for v in itertools.product(
        *[range(H[i][i]) for i in range(g)])]
    return H, canon, sorted(set(reps))


def brute_kernel_order(M, power):
    H, canon, reps = brute_elements(M.relations)
    g = M.ngens
    A = zlin.mat_pow(zlin.mat_sub(zlin.identity(g), M.sigma_rows()), power)
    count = 0
    for v in reps:
        img = [sum(A[i][k] * v[k] for k in range(g)) for i in range(g)]
        if canon(img) == canon([0] * g):
            count += 1
    return count


def test_module_order():
    M = fl.FinitePModule.build(3, [[3, 0], [0, 3]], [[1, 0], [0, 1]])
    assert fl.module_order(M) == 9
    M = fl.FinitePModule.build(2, [[4, 0, 0, 0], [0, 2, 0, 0],
                                   [0, 0, 2, 0], [0, 0, 0, 2]],
                               zlin.identity(4))
    assert fl.module_order(M) == 32


def test_validation_rejects_bad_sigma():
    with pytest.raises(fl.FiltrationError):
        # sigma of order 4 on (Z/3)^2 is no Z/3-action
        fl.FinitePModule.build(3, [[3, 0], [0, 3]], [[0, -1], [1, 0]])
    with pytest.raises(fl.FiltrationError):
        # not a 3-group
        fl.FinitePModule.build(3, [[6, 0], [0, 3]], [[1, 0], [0, 1]])


def test_fixed_subgroup_examples():
    M = fl.FinitePModule.build(3, [[3, 0], [0, 3]], [[1, 0], [0, 1]])
    assert fl.fixed_subgroup(M).order == 9
    M = fl.FinitePModule.build(3, [[3, 0], [0, 3]], [[0, -1], [1, -1]])
    assert fl.fixed_subgroup(M).order == 3
    M, N = fl.from_quadratic(-15015)
    assert N == 5
    assert fl.fixed_subgroup(M).order == 16  # 2^(N-1)


def test_filtration_examples():
    M = fl.FinitePModule.build(3, [[3, 0], [0, 3]], [[0, -1], [1, -1]])
    r = fl.filtration(M, 2)
    assert r.chain == (1, 3, 9) and r.t == (0, 0, 1) and r.m == 2
    M = fl.FinitePModule.build(3, [[3, 0], [0, 3]], [[1, 0], [0, 1]])
    r = fl.filtration(M, 3)
    assert r.chain == (1, 9) and r.t == (0, 2) and r.m == 1
    M = fl.group_ring_block(3, 1, 2)
    r = fl.filtration(M, 2)
    assert r.chain == (1, 3, 9) and r.m == 2


def test_filtration_inconsistent_N():
    M = fl.FinitePModule.build(3, [[3, 0], [0, 3]], [[1, 0], [0, 1]])
    with pytest.raises(fl.FiltrationError):
        fl.filtration(M, 2)  # #M_1 = 9 != 3^(2-1)


def test_dual_routes_and_brute_force():
    rng = random.Random(3)
    for i in range(40):
        p = rng.choice((2, 3))
        N = rng.randint(2, 3)
        try:
            M = fl.synthesize(p, N, seed=i, attempts=100)
        except fl.FiltrationError:
            continue
        if fl.module_order(M) > 3 ** 6:
            continue
        r1 = fl.filtration(M, N)
        r2 = fl.filtration_iterated(M, N)
        assert r1 == r2
        assert fl.order_identity_check(r1)
        for k in range(1, r1.m + 1):
            assert brute_kernel_order(M, k) == r1.chain[k], (p, N, i, k)


def test_rank_from_t():
    assert fl.rank_from_t(2, 6, ()) == (5, 0)
    assert fl.rank_from_t(3, 4, (0, 0)) == (6, 3)
    assert fl.rank_from_t(3, 2, (0, 0)) == (2, 1)


def test_pr_ranks():
    assert fl.pr_ranks(3, 4, (0, 0, 1, 3)) == [6, 2]
    assert fl.pr_ranks(2, 3, (0, 1, 2)) == [2, 1]
    assert fl.pr_ranks(3, 2, (0, 1, 1)) == [1]


def test_from_quadratic_matches_genus():
    from epsclass import quadclass as qc
    for m in (-15, 105, -1155, -15015, -255255):
        d = qc.fundamental_discriminant(m)
        M, N = fl.from_quadratic(d)
        r = fl.filtration(M, N)
        assert fl.order_identity_check(r)
        rank, _ = fl.rank_from_t(2, N, r.t)
        assert rank == N - 1
        _, delta = qc.genus_delta(d)
        # sigma-inversion: Delta = v_2(#M) - (N-1)
        v = 0
        n = r.order
        while n % 2 == 0:
            n //= 2
            v += 1
        assert v - (N - 1) == delta


def test_synthesize_deterministic():
    a = fl.synthesize(3, 3, seed=7)
    b = fl.synthesize(3, 3, seed=7)
    assert a == b
    assert fl.fixed_subgroup(a).order == 9


def test_mc_histogram_shape():
    rep = fl.mc_delta_histogram(3, 2, 20, seed=1)
    assert rep["samples"] == 20
    assert sum(rep["histogram"].values()) == 20
