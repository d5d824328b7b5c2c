"""Integer utilities: primality, factorization, symbols, primes 1 mod p."""

from __future__ import annotations

import random
from dataclasses import dataclass
from math import gcd, isqrt, log

import numpy as np

# deterministic Miller-Rabin witnesses for n < 2^64 (Sinclair's set)
_MR_WITNESSES_64 = (2, 325, 9375, 28178, 450775, 9780504, 1795265022)
_PROBABILISTIC_ROUNDS = 64

_TRIAL_LIMIT = 10 ** 6
_RHO_ITER_CAP = 1 << 22

_small_primes = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class FactorBudgetError(RuntimeError):
    """A cofactor resisted the configured factorization effort."""


@dataclass(frozen=True)
class Factorization:
    value: int
    factors: tuple[tuple[int, int], ...]  # (prime, exponent), ascending

    def omega(self) -> int:
        return len(self.factors)

    def radical(self) -> int:
        r = 1
        for q, _ in self.factors:
            r *= q
        return r


@dataclass(frozen=True)
class PrimeClassSequence:
    p: int
    primes: tuple[int, ...]


def _mr_round(n: int, a: int, d: int, s: int) -> bool:
    # True if n passes the Miller-Rabin round for witness a
    a %= n
    if a == 0:
        return True
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _small_primes:
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    if n < 1 << 64:
        witnesses = _MR_WITNESSES_64
    else:
        rng = random.Random(n)
        witnesses = [rng.randrange(2, n - 1) for _ in range(_PROBABILISTIC_ROUNDS)]
    return all(_mr_round(n, a, d, s) for a in witnesses)


def _brent_rho(n: int, cap: int) -> int:
    # Brent's cycle variant; returns a nontrivial factor or raises
    if n % 2 == 0:
        return 2
    rng = random.Random(n)
    spent = 0
    while spent < cap:
        y = rng.randrange(1, n)
        c = rng.randrange(1, n)
        m = 128
        g = r = q = 1
        x = ys = y
        while g == 1 and spent < cap:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = gcd(q, n)
                k += m
                spent += min(m, r - k + m)
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = gcd(abs(x - ys), n)
        if 1 < g < n:
            return g
    raise FactorBudgetError(f"rho budget exhausted on {n}")


def _factor_into(n: int, out: dict[int, int], rho_cap: int) -> None:
    if n == 1:
        return
    if is_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    d = _brent_rho(n, rho_cap)
    _factor_into(d, out, rho_cap)
    _factor_into(n // d, out, rho_cap)


def factor(n: int, rho_cap: int = _RHO_ITER_CAP) -> Factorization:
    if n < 1:
        raise ValueError("factor expects a positive integer")
    value = n
    out: dict[int, int] = {}
    for p in _small_primes:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    d = 41
    while d * d <= n and d < _TRIAL_LIMIT:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 2
    if n > 1:
        if d * d > n:
            out[n] = out.get(n, 0) + 1
        else:
            _factor_into(n, out, rho_cap)
    return Factorization(value, tuple(sorted(out.items())))


def omega(n: int) -> int:
    """Number of distinct prime divisors."""
    return factor(abs(n)).omega()


def squarefree_core(n: int) -> tuple[int, int]:
    if n == 0:
        raise ValueError("squarefree_core expects nonzero n")
    sign = -1 if n < 0 else 1
    core = 1
    cof = 1
    for q, e in factor(abs(n)).factors:
        if e % 2:
            core *= q
        cof *= q ** (e // 2)
    return sign * core, cof


def is_squarefree(n: int) -> bool:
    return squarefree_core(n)[1] == 1


def kronecker(a: int, n: int) -> int:
    if n == 0:
        return 1 if abs(a) == 1 else 0
    sign = 1
    if n < 0:
        n = -n
        if a < 0:
            sign = -1
    # pull out the 2-part of n
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            sign = -sign
    a %= n
    # Jacobi symbol (a|n) for odd n > 0
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                sign = -sign
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            sign = -sign
        a %= n
    return sign if n == 1 else 0


def _prime_sieve(limit: int) -> np.ndarray:
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, isqrt(limit) + 1):
        if sieve[i]:
            sieve[i * i:: i] = False
    return sieve


def primes_in_class(p: int, count: int) -> PrimeClassSequence:
    """First `count` primes totally split in Q(mu_p): l = 1 mod p for odd p,
    the odd primes 3, 5, 7, ... for p = 2."""
    if count < 1:
        raise ValueError("count must be >= 1")
    out: list[int] = []
    # grow the sieve until enough primes are found
    limit = max(1000, 4 * p * count * max(1, int(log(max(p * count, 3))) + 1))
    while True:
        sieve = _prime_sieve(limit)
        idx = np.flatnonzero(sieve)
        if p == 2:
            sel = idx[idx >= 3]
        else:
            sel = idx[idx % p == 1]
        if len(sel) >= count:
            out = [int(v) for v in sel[:count]]
            break
        limit *= 2
    return PrimeClassSequence(p, tuple(out))


def pi_class_count(x: int, p: int) -> int:
    """#{l <= x prime : l = 1 mod p} (for p = 2: odd primes <= x)."""
    if x < 2:
        return 0
    sieve = _prime_sieve(x)
    idx = np.flatnonzero(sieve)
    if p == 2:
        return int(np.count_nonzero(idx >= 3))
    return int(np.count_nonzero(idx % p == 1))


@dataclass(frozen=True)
class MVReport:
    p: int
    k_max: int
    holds: bool
    first_violation: tuple[int, int, str] | None  # (k, l_k, which bound)


def mv_bounds_hold(k_max: int, p: int) -> MVReport:
    """Check l_k > ((p-1)/2) k log(l_k/p) and pi(x;1,p) <= 2x/((p-1)log(x/p))
    at x = l_k for k = 1..k_max."""
    seq = primes_in_class(p, k_max)
    half = (p - 1) / 2.0
    for k, lk in enumerate(seq.primes, start=1):
        if lk <= half * k * log(lk / p):
            return MVReport(p, k_max, False, (k, lk, "l_k lower bound"))
        # pi(l_k; 1, p) = k by construction
        if k > 2 * lk / ((p - 1) * log(lk / p)):
            return MVReport(p, k_max, False, (k, lk, "pi upper bound"))
    return MVReport(p, k_max, True, None)
