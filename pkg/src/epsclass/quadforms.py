"""Binary quadratic forms: reduction, Gauss composition, cycles,
and ideal arithmetic with tracked generators.

A form (a, b, c) of discriminant D = b^2 - 4ac corresponds to the lattice
ideal [a, (-b + sqrt(D))/2].  Imaginary discriminants have unique reduced
representatives; real (indefinite) discriminants reduce onto cycles.

Composition inputs are expected with a > 0 (every class, also indefinite,
has such representatives: the sign of a alternates along a cycle).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt


@dataclass(frozen=True, order=True)
class QuadForm:
    a: int
    b: int
    c: int

    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def is_primitive(self) -> bool:
        return gcd(gcd(self.a, self.b), self.c) == 1

    def inverse(self) -> "QuadForm":
        return QuadForm(self.a, -self.b, self.c)

    def __repr__(self):
        return f"({self.a},{self.b},{self.c})"


def principal_form(D: int) -> QuadForm:
    k = D & 1
    return QuadForm(1, k, (k - D) // 4)


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    # (g, u, v): u*a + v*b = g >= 0
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def compose(f: QuadForm, g: QuadForm) -> QuadForm:
    """Dirichlet composition of primitive forms, a > 0 (result not reduced).

    The corresponding ideal identity is I(f) * I(g) = d1 * I(compose(f, g))
    with d1 = gcd(f.a, g.a, (f.b + g.b)/2); see TrackedIdeal.mul.
    """
    a1, b1, c1 = f.a, f.b, f.c
    a2, b2, c2 = g.a, g.b, g.c
    if a1 > a2:
        a1, b1, c1, a2, b2, c2 = a2, b2, c2, a1, b1, c1
    s = (b1 + b2) // 2
    n = b2 - s
    if a2 % a1 == 0:
        y1, d = 0, a1
    else:
        d, u, _ = _xgcd(a2, a1)
        y1 = u
    if s % d == 0:
        y2, x2, d1 = -1, 0, d
    else:
        d1, u, v = _xgcd(s, d)
        x2, y2 = u, -v
    v1 = a1 // d1
    v2 = a2 // d1
    r = (y1 * y2 * n - x2 * c2) % v1
    b3 = b2 + 2 * v2 * r
    a3 = v1 * v2
    c3 = (c2 * d1 + r * (b2 + v2 * r)) // v1
    return QuadForm(a3, b3, c3)


def square(f: QuadForm) -> QuadForm:
    return compose(f, f)


# ---------------------------------------------------------------- imaginary

def reduce_imaginary(f: QuadForm) -> QuadForm:
    a, b, c = f.a, f.b, f.c
    if a < 0:
        a, c = -a, -c
    while True:
        if b > a or b <= -a:
            r = b % (2 * a)
            if r > a:
                r -= 2 * a
            c += (r * r - b * b) // (4 * a)
            b = r
        if a > c:
            a, b, c = c, -b, a
            continue
        if b < 0 and (a == c or b == -a):
            b = -b
        return QuadForm(a, b, c)


def reduced_forms_imaginary(D: int) -> list[QuadForm]:
    """All primitive reduced forms of discriminant D < 0 (one per class)."""
    out = []
    absD = -D
    bmax = isqrt(absD // 3)
    for b in range(absD & 1, bmax + 1, 2):
        M = (b * b + absD) // 4
        a = max(b, 1)
        while a * a <= M:
            if M % a == 0:
                c = M // a
                if gcd(gcd(a, b), c) == 1:
                    out.append(QuadForm(a, b, c))
                    if 0 < b < a < c:
                        out.append(QuadForm(a, -b, c))
            a += 1
    return out


def class_number_imaginary(D: int) -> int:
    return len(reduced_forms_imaginary(D))


# ---------------------------------------------------------------- indefinite

def is_reduced_indefinite(f: QuadForm) -> bool:
    return _red_ind(f.a, f.b, f.disc())


def _red_ind(a: int, b: int, D: int) -> bool:
    # 0 < b < sqrt(D)  and  sqrt(D) - b < 2|a| < sqrt(D) + b
    if b <= 0 or b * b >= D:
        return False
    ta = 2 * abs(a)
    if (b + ta) ** 2 <= D:          # 2|a| <= sqrt(D) - b
        return False
    if ta > b and (ta - b) ** 2 >= D:  # 2|a| >= sqrt(D) + b
        return False
    return True


def normalize_indefinite(f: QuadForm, sqD: int) -> QuadForm:
    a, b, c = f.a, f.b, f.c
    ta = 2 * abs(a)
    if abs(a) > sqD:
        # b in (-|a|, |a|]
        r = b % ta
        if r > abs(a):
            r -= ta
    else:
        # b in (sqD - 2|a|, sqD]
        r = b % ta
        r += ta * ((sqD - r) // ta)
    if r != b:
        c += (r * r - b * b) // (4 * a)
        b = r
    return QuadForm(a, b, c)


def rho_indefinite(f: QuadForm, sqD: int) -> QuadForm:
    return normalize_indefinite(QuadForm(f.c, -f.b, f.a), sqD)


def reduce_indefinite(f: QuadForm) -> QuadForm:
    D = f.disc()
    sqD = isqrt(D)
    g = normalize_indefinite(f, sqD)
    for _ in range(100000):
        if _red_ind(g.a, g.b, D):
            return g
        g = rho_indefinite(g, sqD)
    raise RuntimeError(f"indefinite reduction stuck on {f}")


def cycle_indefinite(f: QuadForm) -> list[QuadForm]:
    """The reduction cycle through (the reduction of) f."""
    D = f.disc()
    sqD = isqrt(D)
    start = f if _red_ind(f.a, f.b, D) else reduce_indefinite(f)
    out = [start]
    g = rho_indefinite(start, sqD)
    while g != start:
        out.append(g)
        g = rho_indefinite(g, sqD)
    return out


def reduced_forms_indefinite(D: int) -> list[QuadForm]:
    """All primitive reduced forms of discriminant D > 0 (non-square)."""
    out = []
    sqD = isqrt(D)
    for b in range(1, sqD + 1):
        if (D - b) % 2:
            continue
        M = (D - b * b) // 4
        if M <= 0:
            continue
        lo = max(1, (sqD - b) // 2)
        hi = (sqD + b + 1) // 2
        for a in range(lo, hi + 1):
            if M % a == 0 and _red_ind(a, b, D):
                c = -(M // a)
                if gcd(gcd(a, b), c) == 1:
                    out.append(QuadForm(a, b, c))
                    out.append(QuadForm(-a, b, -c))
    return out


# ------------------------------------------------------- ideals with history

@dataclass(frozen=True)
class QuadElt:
    """(x + y*sqrt(D)), x and y exact rationals."""
    x: Fraction
    y: Fraction
    D: int

    def mul(self, other: "QuadElt") -> "QuadElt":
        return QuadElt(self.x * other.x + self.y * other.y * self.D,
                       self.x * other.y + self.y * other.x, self.D)

    def inv(self) -> "QuadElt":
        n = self.x * self.x - self.y * self.y * self.D
        return QuadElt(self.x / n, -self.y / n, self.D)

    def norm(self) -> Fraction:
        return self.x * self.x - self.y * self.y * self.D

    @classmethod
    def one(cls, D: int) -> "QuadElt":
        return cls(Fraction(1), Fraction(0), D)

    @classmethod
    def integer(cls, n, D: int) -> "QuadElt":
        return cls(Fraction(n), Fraction(0), D)


@dataclass(frozen=True)
class TrackedIdeal:
    """The ideal gamma * [a, (-b + sqrt(D))/2] for the form (a, b, c).

    Multiplication and reduction keep (form, gamma) exact, so a principal
    ideal reduces to |a| = 1 with an explicit generator gamma^-1... more
    precisely: value = gamma * ideal(form); once |form.a| = 1 the ideal
    (value/gamma) is the maximal order and value = (gamma).
    """
    form: QuadForm
    gamma: QuadElt

    @classmethod
    def from_form(cls, f: QuadForm) -> "TrackedIdeal":
        return cls(f, QuadElt.one(f.disc()))

    def mul(self, other: "TrackedIdeal") -> "TrackedIdeal":
        f, g = self.form, other.form
        D = f.disc()
        s = (f.b + g.b) // 2
        w = gcd(gcd(f.a, g.a), s)
        h = compose(f, g)
        gam = self.gamma.mul(other.gamma).mul(QuadElt.integer(w, D))
        return TrackedIdeal(h, gam)

    def rho_step(self) -> "TrackedIdeal":
        # ideal(a,b,c) = mu * ideal(c,-b,a), mu = (b - sqrt(D)) / (2c)
        a, b, c = self.form.a, self.form.b, self.form.c
        D = self.form.disc()
        mu = QuadElt(Fraction(b, 2 * c), Fraction(-1, 2 * c), D)
        nxt = TrackedIdeal(QuadForm(c, -b, a), self.gamma.mul(mu))
        if D < 0:
            return nxt._normalize_b()
        return nxt._normalize_indef(isqrt(D))

    def _normalize_b(self) -> "TrackedIdeal":
        # b-translation: same lattice, gamma unchanged
        a, b, c = self.form.a, self.form.b, self.form.c
        r = b % (2 * a)
        if r > a:
            r -= 2 * a
        if r != b:
            c += (r * r - b * b) // (4 * a)
            b = r
        return TrackedIdeal(QuadForm(a, b, c), self.gamma)

    def _normalize_indef(self, sqD: int) -> "TrackedIdeal":
        return TrackedIdeal(normalize_indefinite(self.form, sqD), self.gamma)

    def reduce(self) -> "TrackedIdeal":
        D = self.form.disc()
        if D < 0:
            cur = self._normalize_b()
            for _ in range(100000):
                a, b, c = cur.form.a, cur.form.b, cur.form.c
                if a > c:
                    cur = cur.rho_step()
                    continue
                if a == c and b < 0:
                    cur = cur.rho_step()
                return cur
            raise RuntimeError("imaginary reduction stuck")
        sqD = isqrt(D)
        cur = self._normalize_indef(sqD)
        for _ in range(100000):
            if _red_ind(cur.form.a, cur.form.b, D):
                return cur
            cur = cur.rho_step()
        raise RuntimeError("indefinite reduction stuck")

    def principal_generator(self, max_steps: int = 200000) -> QuadElt:
        """Generator of the tracked ideal, assuming it is principal."""
        cur = self.reduce()
        D = self.form.disc()
        steps = 0
        while abs(cur.form.a) != 1:
            if D < 0 or steps > max_steps:
                raise ValueError("ideal is not principal (or walk exhausted)")
            cur = cur.rho_step()
            steps += 1
        # value = gamma * ideal(form) = gamma * O = (gamma)
        return cur.gamma


def ideal_lattice(f: QuadForm) -> list[list[int]]:
    """Columns: Z-basis of ideal(f) in coordinates (p, q), element=(p+q sqrt D)/2."""
    return [[2 * f.a, -f.b], [0, 1]]
