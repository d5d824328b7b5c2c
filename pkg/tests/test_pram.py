import random
from fractions import Fraction
from math import gcd, isqrt, log

import pytest

from epsclass import pram, zlin
from epsclass.arith import kronecker
from epsclass.quadclass import isqrt_float


# ------------------------------------------------------------ residue units

def brute_unit_elements(D, p, n):
    R = pram.ResidueRing(D, p, n)
    q = R.q
    return R, [(x, y) for x in range(q) for y in range(q)
               if R.is_unit((x, y))]


@pytest.mark.parametrize("D,p,n", [
    (-15, 2, 3), (-20, 2, 3), (-4, 2, 3), (-3, 3, 2), (-7, 2, 3),
    (-24, 3, 2), (5, 5, 2), (-11, 3, 2), (8, 2, 3), (13, 2, 3),
    (-40, 2, 4), (-84, 7, 2),
])
def test_residue_units_against_brute_force(D, p, n):
    U = pram.ResidueUnits(D, p, n)
    R, els = brute_unit_elements(D, p, n)
    assert len(els) == U.order == U.structure.order
    random.seed(7)
    sample = els if len(els) <= 150 else random.sample(els, 80)
    for u in sample:
        v = U.dlog(u)
        w = R.one
        for g, e in zip(U.gens, v):
            w = R.mul(w, R.pow(g, e)) if e >= 0 \
                else R.mul(w, R.pow(R.inv(g), -e))
        assert w == u


def test_residue_units_known_structures():
    # split 2: (O/8)^x = (Z/8)^x x (Z/8)^x
    assert str(pram.residue_units(-15, 2, 3)) == "[2,2,2,2]"
    # ramified 3 at level 1: order (p-1)p = 6
    assert str(pram.residue_units(-15, 3, 1)) == "[6]"
    # inert 3 at level 1: the residue field F_9, cyclic of order 8
    assert str(pram.residue_units(-4, 3, 1)) == "[8]"


def test_splitting_type():
    assert pram.splitting_type(-15, 2) == "split"
    assert pram.splitting_type(-20, 2) == "ramified"
    assert pram.splitting_type(-15, 3) == "ramified"
    assert pram.splitting_type(-11, 3) == "split"
    assert pram.splitting_type(13, 2) == "inert"


# -------------------------------------------------------------------- units

def test_fundamental_unit():
    assert pram.fundamental_unit(5) == (1, 1, -1)       # (1+sqrt5)/2
    assert pram.fundamental_unit(221) == (15, 1, 1)     # (15+sqrt221)/2
    assert pram.fundamental_unit(105) == (82, 8, 1)     # 41+4*sqrt(105)
    assert pram.fundamental_unit(2) == (2, 2, -1)       # 1+sqrt2
    assert pram.fundamental_unit(94) == (4286590, 442128, 1)


# -------------------------------------------------- brute ray class oracle

def _hnf_product(L1, L2, D):
    """Product of two ideal lattices; coords (u, v) for (u + v*sqrt(D))/2."""
    def mul(a, b):
        # ((u1+v1 s)/2)((u2+v2 s)/2) = ((u1u2+v1v2 D)/2 + (u1v2+u2v1)/2 s)/2
        u = (a[0] * b[0] + a[1] * b[1] * D) // 2
        v = (a[0] * b[1] + a[1] * b[0]) // 2
        return [u, v]
    prods = [mul(c1, c2) for c1 in L1 for c2 in L2]
    return zlin.hnf_columns([[p_[i] for p_ in prods] for i in range(2)])


def _lattice_cols(H):
    return [[H[0][j], H[1][j]] for j in range(2)]


def _member(H, v):
    return zlin.solve_lattice(H, list(v)) is not None


def test_ray_class_group_against_brute_force():
    # D = -15, modulus (4): relations from principal (alpha), alpha = +-1 mod 4,
    # over the prime ideals of odd norm <= 200
    D, p, n = -15, 2, 2
    O_cols = [[2, 0], [1, 1]]    # 1 and (1+sqrt D)/2
    primes = []
    for q in range(3, 200):
        if any(q % r == 0 for r in range(2, isqrt(q) + 1)):
            continue
        k = kronecker(D, q)
        if k == -1:
            continue
        for b in range(q + 1):
            if (b * b - D) % (4 * q) == 0:
                H = zlin.hnf_columns([[2 * q, -b], [0, 1]])
                primes.append((q, b, H))
                if k == 1:
                    Hc = zlin.hnf_columns([[2 * q, b], [0, 1]])
                    primes.append((q, -b, Hc))
                break
    idx = {(q, b): i for i, (q, b, _) in enumerate(primes)}
    pow_lat = {}
    for q, b, H in primes:
        cur = zlin.hnf_columns([[c[0] for c in O_cols], [c[1] for c in O_cols]])
        lats = []
        for _ in range(8):
            cur = _hnf_product(_lattice_cols(cur), _lattice_cols(H), D)
            lats.append(cur)
        pow_lat[(q, b)] = lats

    def valuation(q, b, vec):
        v = 0
        for H in pow_lat[(q, b)]:
            if _member(H, vec):
                v += 1
            else:
                break
        return v

    by_q = {}
    for q, b, _ in primes:
        by_q.setdefault(q, []).append(b)
    rels = []
    for x in range(-398, 399, 4):
        for y in range(-100, 101, 4):
            # alpha = (x + y sqrt D)/2 with alpha = +-1 mod 4O and odd norm
            if x % 4 != 2:
                continue
            nrm = (x * x - D * y * y) // 4
            if nrm <= 1 or nrm % 2 == 0:
                continue
            rem = nrm
            support = []
            for q in by_q:
                while rem % q == 0:
                    rem //= q
                    support.append(q)
            if rem != 1:
                continue
            vec = [0] * len(primes)
            for q in set(support):
                for b in by_q[q]:
                    vec[idx[(q, b)]] = valuation(q, b, (x, y))
            rels.append(vec)
    rows = [[r[i] for r in rels] for i in range(len(primes))]
    brute = pram.AbelianGroupStructure.from_relation_matrix(rows, len(primes))
    ray = pram.ray_class_group(D, p, n)
    assert brute.divisors == ray.structure.divisors
    assert ray.order == 4


# ------------------------------------------------------------------ torsion

def test_tor_report_family_anchors():
    rep = pram.tor_report(-15, 2)
    assert str(rep.tor_structure) == "[2]" and rep.w_order == 2
    assert abs(rep.c_tilde - 0.5119160496196) < 1e-12

    rep = pram.tor_report(105, 2)
    assert str(rep.tor_structure) == "[2,2]"

    rep = pram.tor_report(221, 2)
    assert str(rep.tor_structure) == "[16]"
    assert abs(rep.c_tilde - 1.0272342185833848) < 1e-12

    rep = pram.tor_report(-1155, 2)
    assert str(rep.tor_structure) == "[2,2,2]"

    rep = pram.tor_report(-15015, 2)
    assert str(rep.tor_structure) == "[2,2,2,2]"


def test_tor_report_large_anchors():
    rep = pram.tor_report(-101091716, 2)
    assert str(rep.tor_structure) == "[1024,4,2]"
    assert rep.vp == 13 and rep.w_order == 2
    assert pram.ktilde_index(-101091716, 2) == 2

    rep = pram.tor_report(-136159455, 3)
    assert str(rep.tor_structure) == "[2187,3]"
    assert rep.w_order == 3


def test_family_radicands():
    assert pram.family_radicands(5) == [-3, -15, 105, -1155, -15015]


def test_w_group():
    assert pram.w_group(-15, 2) == 2      # m = -15 = 1 mod 8
    assert pram.w_group(-20, 2) == 1
    assert pram.w_group(221, 2) == 1      # 221 = 5 mod 8
    assert pram.w_group(-101091716, 2) == 2
    assert pram.w_group(-3, 3) == 1       # the exceptional field
    assert pram.w_group(-136159455, 3) == 3
    assert pram.w_group(-15, 5) == 1


# -------------------------------------------------------------------- scans

def test_program_vptor_matches_printed_rows():
    rows = [(-1000011, 3, 0.301029755983435929933445793),
            (-1000020, 3, 0.3010295598834164958938994188),
            (-1000036, 4, 0.4013722816881976053812061427),
            (-1000132, 5, 0.5017118661610285687682449315),
            (-1347524, 10, 0.982227596578129040877631145)]
    for D, want_v, want_cp in rows:
        v = pram.program_vptor(D, 2, 20)
        assert v == want_v, D
        cp = v * log(2) / log(isqrt_float(-D))
        assert abs(cp - want_cp) < 1e-12, D


def test_tor_scan_emission():
    recs = pram.tor_scan(10 ** 6, 1000200, 2)
    assert [(r.D, r.vptor) for r in recs] == \
        [(-1000011, 3), (-1000020, 3), (-1000036, 4), (-1000132, 5)]
    assert not any(r.error for r in recs)


def test_merge_tor_maxima():
    a = pram.tor_scan(10 ** 6, 1000100, 2)
    b = pram.tor_scan(1000101, 1000200, 2)
    merged = pram.merge_tor_maxima([a, b])
    assert [(r.D, r.vptor) for r in merged] == \
        [(r.D, r.vptor) for r in pram.tor_scan(10 ** 6, 1000200, 2)]


# ------------------------------------------------------ reflection and ranks

def test_s_class_group():
    s = pram.s_class_group(-15, 2)
    assert s.s_count == 2 and s.structure.order == 1
    s = pram.s_class_group(-84, 2)    # 2 ramified
    assert s.s_count == 1


def test_reflection_identity_sample():
    for d in range(3, 700):
        if pram._fundamental_neg(d):
            assert pram.reflection_check(-d, 2), -d


def test_rank_inequalities():
    for D, p in [(-15, 2), (-255, 2), (-420, 2), (229, 3), (-1155, 2)]:
        r = pram.rank_inequalities(D, p)
        assert r.upper_ok and r.lower_ok, (D, p)


def test_prime_over_forms():
    for D, p in [(-15, 2), (-20, 2), (-15, 3), (-11, 3), (-84, 7), (-7, 2)]:
        f = pram.prime_over(D, p)
        if f is not None:
            assert f.a == p and f.disc() == D
    assert pram.prime_over(13, 2) is None
