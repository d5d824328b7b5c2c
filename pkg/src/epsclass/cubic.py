"""Cyclic cubic fields by conductor, plus the fixture tables.

A cyclic cubic field of conductor f corresponds to a solution of
4f = a^2 + 27 b^2; there are exactly 2^(omega(f)-1) of them.  Class and
torsion structures for higher degrees (5, 7, 11) come from fixture files
and are validated against genus-theoretic constraints, not recomputed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from math import isqrt, log
from pathlib import Path

from .abgroup import AbelianGroupStructure
from .arith import factor, is_squarefree


class FixtureParseError(ValueError):
    def __init__(self, msg, line=None, col=None):
        where = "" if line is None else f" (line {line}" + \
            ("" if col is None else f", col {col}") + ")"
        super().__init__(msg + where)
        self.line = line
        self.col = col


# ------------------------------------------------------------- enumeration

@dataclass(frozen=True)
class CubicField:
    f: int
    e: int          # v_3(f), 0 or 2
    a: int
    b: int
    poly: tuple     # monic, ascending coefficients (c0, c1, c2, 1)

    def poly_str(self) -> str:
        return poly_to_str(self.poly)


def is_cubic_conductor(f: int) -> bool:
    if f < 7:
        return False
    e = 0
    F = f
    while F % 3 == 0:
        F //= 3
        e += 1
    if e not in (0, 2):
        return False
    if not is_squarefree(F):
        return False
    for q, _ in factor(F).factors:
        if q % 3 != 1:
            return False
    # at least one representation 4f = a^2 + 27 b^2
    Y = 4 * f
    for b in range(1, isqrt(Y // 27) + 1):
        if e == 2 and b % 3 == 0:
            continue
        A = Y - 27 * b * b
        a = isqrt(A)
        if a * a == A:
            return True
    return False


def cubic_polynomials(f: int) -> list[CubicField]:
    """All cyclic cubic fields of conductor f, scanning b upward."""
    e = 2 if f % 9 == 0 else 0
    out = []
    Y = 4 * f
    for b in range(1, isqrt(Y // 27) + 1):
        if e == 2 and b % 3 == 0:
            continue
        A = Y - 27 * b * b
        a = isqrt(A)
        if a * a != A:
            continue
        if e == 0:
            if a % 3 == 1:
                a = -a
            poly = ((f * (a - 3) + 1) // 27, (1 - f) // 3, 1, 1)
        else:
            if a % 9 == 3:
                a = -a
            poly = (-f * a // 27, -f // 3, 0, 1)
        out.append(CubicField(f, e, a, b, poly))
    if not out:
        raise ValueError(f"no field of conductor {f}: not a cubic conductor")
    return out


def _cubic_disc(poly) -> int:
    r, q, p, lead = poly
    assert lead == 1
    return 18 * p * q * r - 4 * p ** 3 * r + p * p * q * q \
        - 4 * q ** 3 - 27 * r * r


def discriminant_filter(fld: CubicField) -> bool:
    """True iff the field discriminant is f^2 (poly disc = f^2 * square)."""
    r, q, p, _ = fld.poly
    # a monic cubic is irreducible over Q iff it has no integer root
    if r == 0:
        raise ValueError("reducible polynomial: root 0")
    for num in _divisors_signed(abs(r)):
        if num ** 3 + p * num * num + q * num + r == 0:
            raise ValueError(f"reducible polynomial: root {num}")
    d = _cubic_disc(fld.poly)
    if d <= 0 or d % (fld.f * fld.f):
        return False
    s2 = d // (fld.f * fld.f)
    return isqrt(s2) ** 2 == s2


def _divisors_signed(n: int):
    for d in range(1, isqrt(n) + 1):
        if n % d == 0:
            yield from (d, -d, n // d, -(n // d))


def ambiguous_number(f: int, p: int) -> int:
    """Number of ambiguous classes, p^(N-1) with N = omega(f)."""
    return p ** (factor(f).omega() - 1)


def rank_window(N: int, p: int) -> tuple[int, int]:
    return N - 1, (p - 1) * (N - 1)


def enumerate_conductors(max_f: int) -> list[int]:
    return [f for f in range(7, max_f + 1) if is_cubic_conductor(f)]


# ---------------------------------------------------------------- fixtures

@dataclass
class Fixture:
    p: int
    f: int | None = None           # conductor of a degree-p field
    m: int | None = None           # quadratic radicand (signed), p-family rows
    N: int | None = None
    poly: tuple | None = None
    cl: AbelianGroupStructure | None = None
    clres: AbelianGroupStructure | None = None
    clord: AbelianGroupStructure | None = None
    tor: AbelianGroupStructure | None = None
    ntor: int | None = None
    cp: float | None = None
    starred: bool = False
    # normic-scan rows
    D: int | None = None
    a: int | None = None
    b: int | None = None
    hp: int | None = None
    hp_parts: tuple | None = None
    source_line: int = 0

    def n_ramified(self) -> int:
        if self.N is not None:
            return self.N
        if self.f is not None:
            return factor(self.f).omega()
        if self.m is not None:
            return factor(abs(self.m)).omega()
        raise ValueError("fixture has no conductor")


_TERM = re.compile(r"([+-]?)(\d*)(?:\*?x(?:\^(\d+))?)?")


def parse_poly(text: str) -> tuple:
    s = re.sub(r"\s+", "", text)
    if not s:
        raise FixtureParseError("empty polynomial")
    coeffs: dict[int, int] = {}
    pos = 0
    while pos < len(s):
        mt = _TERM.match(s, pos)
        if not mt or mt.end() == pos:
            raise FixtureParseError(f"bad polynomial near {s[pos:pos + 8]!r}",
                                    col=pos)
        sign, digits, expo = mt.groups()
        c = int(digits) if digits else 1
        if sign == "-":
            c = -c
        if "x" in s[mt.start():mt.end()]:
            k = int(expo) if expo else 1
        else:
            k = 0
        coeffs[k] = coeffs.get(k, 0) + c
        pos = mt.end()
    deg = max(coeffs)
    return tuple(coeffs.get(k, 0) for k in range(deg + 1))


def poly_to_str(poly) -> str:
    deg = len(poly) - 1
    parts = []
    for k in range(deg, -1, -1):
        c = poly[k]
        if c == 0:
            continue
        sign = "-" if c < 0 else ("+" if parts else "")
        mag = abs(c)
        if k == 0:
            body = str(mag)
        else:
            xs = "x" if k == 1 else f"x^{k}"
            body = xs if mag == 1 else f"{mag}*{xs}"
        parts.append(sign + body)
    return "".join(parts) or "0"


def _parse_group(text: str) -> tuple[AbelianGroupStructure, str, bool]:
    """'[12,2,2]=[4]x[3,..]*' -> (structure, trailing text, starred)."""
    s = text.strip()
    if not s.startswith("["):
        raise FixtureParseError(f"expected '[' in group {text!r}")
    end = s.index("]")
    inner = s[1:end].strip()
    divs = tuple(int(t) for t in inner.split(",")) if inner else ()
    rest = s[end + 1:].strip()
    starred = rest.endswith("*")
    return AbelianGroupStructure(divs), rest.rstrip("*").strip(), starred


_KEYS = ("Structure of Tor", "#Tor", "Clres", "Clord", "Cl", "Cp", "Hp",
         "hp", "conductor", "f", "N", "m", "P", "D", "a", "b", "p")
_KEY_RE = re.compile(
    "(" + "|".join(re.escape(k) for k in _KEYS) + r")\s*=")


def _split_fields(line: str) -> list[tuple[str, str, int]]:
    hits = []
    for mt in _KEY_RE.finditer(line):
        # a key must not be preceded by a letter (so the 'b' of 'Cb' or the
        # 'a' inside 'Structure' never match on their own)
        if mt.start() and (line[mt.start() - 1].isalpha()
                           or line[mt.start() - 1] == "^"):
            continue
        hits.append(mt)
    out = []
    for i, mt in enumerate(hits):
        end = hits[i + 1].start() if i + 1 < len(hits) else len(line)
        out.append((mt.group(1), line[mt.end():end].strip(), mt.start()))
    return out


def _logical_lines(text: str):
    """Join wrapped physical lines; yields (line_number, joined_text)."""
    out: list[list] = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        if not line.strip():
            continue
        stripped = line.strip()
        if stripped.startswith("#") and not stripped.startswith("#Tor="):
            continue
        if out and stripped[0] in "+-":
            out[-1][1] += stripped          # polynomial wrap
        elif out and stripped.startswith(("Cl=", "Clres=", "Hp=")):
            out[-1][1] += " " + stripped    # value pushed to the next line
        else:
            out.append([no, stripped])
    for no, line in out:
        yield no, line


def parse_fixture_line(line: str, p: int = 0, line_no: int = 0,
                       default_f: int | None = None) -> Fixture:
    """One logical line -> partially filled Fixture."""
    fix = Fixture(p=p, f=default_f, source_line=line_no)
    fields = _split_fields(line)
    if not fields:
        raise FixtureParseError(f"no fields in {line!r}", line=line_no)
    for key, val, col in fields:
        try:
            if key == "f":
                fix.f = int(val.split("=")[0])
            elif key == "N":
                fix.N = int(val)
            elif key == "m":
                fix.m = int(val)
            elif key == "p":
                fix.p = int(val)
            elif key == "P":
                fix.poly = parse_poly(val)
            elif key in ("Cl", "Clres", "Clord"):
                g, _, starred = _parse_group(val)
                setattr(fix, key.lower(), g)
                fix.starred = fix.starred or starred
            elif key == "Structure of Tor":
                fix.tor, _, _ = _parse_group(val)
            elif key == "#Tor":
                fix.ntor = int(val)
            elif key == "Cp":
                fix.cp = float(val)
            elif key == "D":
                fix.D = int(val)
            elif key == "a":
                fix.a = int(val)
            elif key == "b":
                fix.b = int(val)
            elif key == "hp":
                fix.hp = int(val)
            elif key == "Hp":
                fix.hp_parts = _parse_group(val)[0].divisors
        except (ValueError, IndexError) as exc:
            if isinstance(exc, FixtureParseError):
                raise
            raise FixtureParseError(
                f"bad value for {key}: {val!r}", line=line_no, col=col)
    return fix


@dataclass
class FixtureFile:
    path: str
    p: int
    conductor: int | None       # Cp base override, if any
    fixtures: list[Fixture] = field(default_factory=list)


def parse_fixture_text(text: str, path: str = "<string>") -> FixtureFile:
    p = 0
    conductor = None
    current_f = None
    out: list[Fixture] = []
    pending: Fixture | None = None
    for no, line in _logical_lines(text):
        fields = dict((k, v) for k, v, _ in _split_fields(line))
        if set(fields) == {"p"}:
            p = int(fields["p"])
            continue
        if "conductor" in fields:
            conductor = int(fields["conductor"])
            continue
        if set(fields) == {"f"} or set(fields) == {"f", "N"}:
            current_f = int(fields["f"].split("=")[0])
            continue
        if not p:
            raise FixtureParseError("missing p= header", line=no)
        if "Structure of Tor" in fields:
            if pending is None:
                raise FixtureParseError("torsion line without a class line",
                                        line=no)
            pending.tor = _parse_group(fields["Structure of Tor"])[0]
            continue
        if "#Tor" in fields:
            if pending is None or pending.tor is None:
                raise FixtureParseError("#Tor line without torsion structure",
                                        line=no)
            pending.ntor = int(fields["#Tor"])
            pending.cp = float(fields["Cp"])
            out.append(pending)
            pending = None
            continue
        fix = parse_fixture_line(line, p=p, line_no=no, default_f=current_f)
        if pending is not None:
            out.append(pending)
            pending = None
        if fix.m is not None or fix.clres is not None or (
                fix.poly is not None and fix.D is None):
            # may be followed by a torsion block
            pending = fix
        else:
            out.append(fix)
    if pending is not None:
        out.append(pending)
    return FixtureFile(path, p, conductor, out)


def parse_fixture_file(path) -> FixtureFile:
    path = Path(path)
    return parse_fixture_text(path.read_text(), str(path))


def fixture_dir() -> Path:
    return Path(__file__).parent / "fixtures"


def load_all_fixtures(root=None) -> list[FixtureFile]:
    root = Path(root) if root else fixture_dir()
    return [parse_fixture_file(f) for f in sorted(root.glob("p*/*.txt"))]


# -------------------------------------------------------------- validation

def _residue_degree(q: int, p: int) -> int:
    """Multiplicative order of q mod p (residue degree of q in Q(mu_p))."""
    r = q % p
    k = 1
    acc = r
    while acc != 1:
        acc = acc * r % p
        k += 1
    return k


def _structure_checks(g: AbelianGroupStructure, p: int, N: int,
                      what: str) -> list[str]:
    errs = []
    lo, hi = rank_window(N, p)
    rk = g.p_rank(p)
    if not lo <= rk <= hi:
        errs.append(f"{what}: {p}-rank {rk} outside [{lo},{hi}]")
    vp = g.vp(p)
    if vp < N - 1:
        errs.append(f"{what}: {p}-part p^{vp} smaller than the ambiguous "
                    f"number p^{N - 1}")
    for q, _ in factor(g.order).factors if g.order > 1 else ():
        if q == p:
            continue
        dim = g.p_rank(q)
        deg = _residue_degree(q, p)
        if dim % deg:
            errs.append(f"{what}: {q}-part dimension {dim} not a multiple "
                        f"of the residue degree {deg}")
    return errs


def delta_from_fixture(fix: Fixture) -> tuple[int, int]:
    N = fix.n_ramified()
    g = fix.cl if fix.cl is not None else fix.clres
    delta = g.p_rank(fix.p) - (N - 1)
    Delta = g.vp(fix.p) - (N - 1)
    if delta < 0 or Delta < delta:
        raise ValueError(f"Chevalley violation: delta={delta} Delta={Delta}")
    return delta, Delta


def _sig_agree(got: float, want: float, sig: int = 6) -> bool:
    if want == 0:
        return got == 0
    import math
    scale = 10.0 ** (math.floor(math.log10(abs(want))) - sig + 1)
    return abs(got - want) <= scale


def validate_fixture(fix: Fixture, cp_conductor: int | None = None) -> list[str]:
    """Empty list means the row passes every applicable check."""
    errs: list[str] = []
    p = fix.p
    if fix.D is not None:
        # normic-scan row: internal consistency + printed statistic
        prod = 1
        for d in fix.hp_parts or ():
            prod *= d
        if prod != fix.hp:
            errs.append(f"hp {fix.hp} != product of parts {prod}")
        n = fix.hp
        while n % p == 0:
            n //= p
        if n != 1:
            errs.append(f"hp {fix.hp} is not a power of {p}")
        if fix.cp is not None and not _sig_agree(
                2 * log(fix.hp) / log(fix.D), fix.cp):
            errs.append(f"Cp mismatch: printed {fix.cp}")
        return errs
    try:
        N = fix.n_ramified()
    except ValueError:
        return ["no conductor information"]
    for what, g in (("Cl", fix.cl), ("Clres", fix.clres), ("Tor", fix.tor)):
        if g is not None:
            errs += _structure_checks(g, p, N, what)
    g = fix.cl if fix.cl is not None else fix.clres
    if g is not None:
        delta = g.p_rank(p) - (N - 1)
        Delta = g.vp(p) - (N - 1)
        if Delta < delta:
            errs.append(f"Delta {Delta} < delta {delta}")
        if fix.starred and delta <= 0 and Delta <= 0:
            errs.append("starred row without exceptional classes")
    if fix.clord is not None and fix.clres is not None:
        if fix.clres.order not in (fix.clord.order, 2 * fix.clord.order):
            errs.append("restricted/ordinary orders differ by more than 2")
    if fix.ntor is not None:
        prod = fix.tor.order if fix.tor is not None else None
        if prod is not None and prod != fix.ntor:
            errs.append(f"#Tor {fix.ntor} != product of structure {prod}")
        if fix.cp is not None:
            if fix.m is not None:
                base = log(abs(fix.m)) / 2
            else:
                base = log(cp_conductor or fix.f)
            if not _sig_agree(log(fix.ntor) / base, fix.cp):
                errs.append(f"Cp mismatch: printed {fix.cp}, computed "
                            f"{log(fix.ntor) / base:.8f}")
    return errs


@dataclass
class ValidationReport:
    files: int
    rows: int
    failures: list  # (path, line, message)

    @property
    def ok(self) -> bool:
        return not self.failures


def validate_all(root=None) -> ValidationReport:
    files = load_all_fixtures(root)
    failures = []
    rows = 0
    for ff in files:
        for fix in ff.fixtures:
            rows += 1
            for msg in validate_fixture(fix, cp_conductor=ff.conductor):
                failures.append((ff.path, fix.source_line, msg))
    return ValidationReport(len(files), rows, failures)
