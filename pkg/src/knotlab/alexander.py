"""Exact integer Laurent polynomials, Alexander polynomials, and unit-circle root analysis.

Coefficients are exact Python integers throughout; only the evaluation of a
polynomial on the unit circle uses floating point, with root isolation done by
bisection down to width 1e-9.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import lru_cache


class NotSymmetric(ValueError):
    """Polynomial is not in the symmetric normalized form."""


class NotNormalizable(ValueError):
    """Polynomial cannot be put in the form p(t) = p(1/t), p(1) = 1."""


class NotAKnot(ValueError):
    """Braid closure has more than one component."""


class NotInteger(TypeError):
    """An integer limit slope was required."""


# ---------------------------------------------------------------------------
# Laurent polynomials


@dataclass(frozen=True)
class IntLaurentPoly:
    """Integer Laurent polynomial  sum_j coeffs[j - lo] * t**j.

    The zero polynomial is stored as empty coeffs with lo = 0.  Instances are
    immutable; all arithmetic is exact.
    """

    coeffs: tuple[int, ...] = field(default=())
    lo: int = 0

    @staticmethod
    def from_dict(d: dict[int, int]) -> "IntLaurentPoly":
        d = {e: int(c) for e, c in d.items() if c != 0}
        if not d:
            return IntLaurentPoly()
        lo, hi = min(d), max(d)
        return IntLaurentPoly(tuple(d.get(e, 0) for e in range(lo, hi + 1)), lo)

    @staticmethod
    def monomial(coeff: int, exp: int = 0) -> "IntLaurentPoly":
        return IntLaurentPoly.from_dict({exp: coeff})

    def as_dict(self) -> dict[int, int]:
        return {self.lo + i: c for i, c in enumerate(self.coeffs) if c != 0}

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def hi(self) -> int:
        return self.lo + len(self.coeffs) - 1

    def __bool__(self) -> bool:
        return not self.is_zero

    def __add__(self, other: "IntLaurentPoly") -> "IntLaurentPoly":
        d = self.as_dict()
        for e, c in other.as_dict().items():
            d[e] = d.get(e, 0) + c
        return IntLaurentPoly.from_dict(d)

    def __neg__(self) -> "IntLaurentPoly":
        return IntLaurentPoly(tuple(-c for c in self.coeffs), self.lo)

    def __sub__(self, other: "IntLaurentPoly") -> "IntLaurentPoly":
        return self + (-other)

    def __mul__(self, other: "IntLaurentPoly") -> "IntLaurentPoly":
        if self.is_zero or other.is_zero:
            return IntLaurentPoly()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return IntLaurentPoly.from_dict(
            {self.lo + other.lo + k: c for k, c in enumerate(out)}
        )

    def shift(self, k: int) -> "IntLaurentPoly":
        """Multiply by t**k."""
        if self.is_zero:
            return self
        return IntLaurentPoly(self.coeffs, self.lo + k)

    def scale(self, c: int) -> "IntLaurentPoly":
        if c == 0:
            return IntLaurentPoly()
        return IntLaurentPoly(tuple(c * a for a in self.coeffs), self.lo)

    def reverse(self) -> "IntLaurentPoly":
        """The polynomial p(1/t)."""
        return IntLaurentPoly(tuple(reversed(self.coeffs)), -self.hi)

    @property
    def degree_span(self) -> int:
        """Width of the support (degree of t**-lo * p as an ordinary polynomial)."""
        return 0 if self.is_zero else len(self.coeffs) - 1

    def content(self) -> int:
        return math.gcd(*[abs(c) for c in self.coeffs]) if self.coeffs else 0

    def __call__(self, t):
        """Evaluate at a numeric (int, Fraction, float, complex) argument."""
        if self.is_zero:
            return 0
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc * t ** self.lo

    def divmod_exact(self, divisor: "IntLaurentPoly") -> tuple["IntLaurentPoly", "IntLaurentPoly"]:
        """Polynomial division after stripping monomial units from both sides.

        Returns (quotient, remainder) with self ~ quotient*divisor + remainder up
        to the stripped t-powers; exactness of a division test only needs
        remainder == 0, which is unit-independent.
        """
        if divisor.is_zero:
            raise ZeroDivisionError("division by zero polynomial")
        num = list(self.coeffs)
        den = list(divisor.coeffs)
        q = [0] * max(len(num) - len(den) + 1, 0)
        lead = den[-1]
        for i in range(len(num) - len(den), -1, -1):
            if num[i + len(den) - 1] % lead != 0:
                # not exactly divisible at this step; remainder is nonzero
                break
            f = num[i + len(den) - 1] // lead
            q[i] = f
            for j, d in enumerate(den):
                num[i + j] -= f * d
        quot = IntLaurentPoly.from_dict(
            {self.lo - divisor.lo + k: c for k, c in enumerate(q)}
        )
        rem = IntLaurentPoly.from_dict({self.lo + k: c for k, c in enumerate(num)})
        return quot, rem

    def divides(self, other: "IntLaurentPoly") -> bool:
        """True if self divides other exactly in Z[t, 1/t]."""
        if other.is_zero:
            return True
        if self.is_zero:
            return False
        _, rem = other.divmod_exact(self)
        return rem.is_zero

    # -- text format ------------------------------------------------------

    def to_text(self) -> str:
        """Render like '3t^2-6t+7-6t^-1+3t^-2' (descending exponents)."""
        if self.is_zero:
            return "0"
        parts = []
        for e in range(self.hi, self.lo - 1, -1):
            c = self.as_dict().get(e, 0)
            if c == 0:
                continue
            sign = "-" if c < 0 else ("+" if parts else "")
            mag = abs(c)
            if e == 0:
                body = str(mag)
            else:
                coeff = "" if mag == 1 else str(mag)
                power = "t" if e == 1 else f"t^{e}"
                body = coeff + power
            parts.append(sign + body)
        return "".join(parts)

    @staticmethod
    def from_text(text: str) -> "IntLaurentPoly":
        """Parse the format produced by to_text (whitespace tolerated)."""
        s = text.replace(" ", "")
        if s in ("", "0"):
            return IntLaurentPoly()
        token = re.compile(r"([+-]?)(\d*)(t(?:\^(-?\d+))?)?")
        pos, d = 0, {}
        while pos < len(s):
            m = token.match(s, pos)
            if not m or m.end() == pos:
                raise ValueError(f"cannot parse polynomial at ...{s[pos:]!r}")
            sign, num, tpart, exp = m.groups()
            coeff = int(num) if num else 1
            if sign == "-":
                coeff = -coeff
            e = 0
            if tpart:
                e = int(exp) if exp is not None else 1
            d[e] = d.get(e, 0) + coeff
            pos = m.end()
        return IntLaurentPoly.from_dict(d)

    def to_json(self) -> dict:
        return {"lo": self.lo, "coeffs": list(self.coeffs)}

    @staticmethod
    def from_json(obj) -> "IntLaurentPoly":
        if isinstance(obj, str):
            return IntLaurentPoly.from_text(obj)
        if isinstance(obj, dict):
            return IntLaurentPoly.from_dict(
                {obj["lo"] + i: c for i, c in enumerate(obj["coeffs"])}
            )
        # plain coefficient list is interpreted as centered symmetric form
        coeffs = list(obj)
        if len(coeffs) % 2 != 1:
            raise ValueError("centered coefficient list must have odd length")
        return IntLaurentPoly.from_dict(
            {i - (len(coeffs) // 2): c for i, c in enumerate(coeffs)}
        )


ONE = IntLaurentPoly((1,), 0)
T = IntLaurentPoly((1,), 1)


def normalize(poly: IntLaurentPoly) -> IntLaurentPoly:
    """Normalize so that p(t) = p(1/t) and p(1) = 1.

    Knot Alexander polynomials admit exactly one such representative; anything
    else raises NotNormalizable.
    """
    if poly.is_zero:
        raise NotNormalizable("zero polynomial")
    span = poly.degree_span
    if span % 2 != 0:
        raise NotNormalizable("support width is odd; cannot center")
    centered = poly.shift(-(poly.lo + span // 2))
    if centered.reverse() != centered:
        raise NotNormalizable("not palindromic")
    at_one = centered(1)
    if at_one == 1:
        return centered
    if at_one == -1:
        return -centered
    raise NotNormalizable(f"p(1) = {at_one}, expected +-1")


def is_normalized(poly: IntLaurentPoly) -> bool:
    return (not poly.is_zero) and poly.reverse() == poly and poly(1) == 1


# ---------------------------------------------------------------------------
# Cyclotomic machinery


@lru_cache(maxsize=None)
def cyclotomic(n: int) -> IntLaurentPoly:
    """The n-th cyclotomic polynomial, computed by exact recursive division."""
    if n < 1:
        raise ValueError("n must be positive")
    p = IntLaurentPoly.from_dict({n: 1, 0: -1})  # t^n - 1
    for d in range(1, n):
        if n % d == 0:
            q, rem = p.divmod_exact(cyclotomic(d))
            assert rem.is_zero
            p = q
    return p


def _euler_phi(n: int) -> int:
    out, m = 1, n
    p = 2
    while p * p <= m:
        if m % p == 0:
            k = 0
            while m % p == 0:
                m //= p
                k += 1
            out *= (p - 1) * p ** (k - 1)
        p += 1
    if m > 1:
        out *= m - 1
    return out


def cyclotomic_indices_up_to_degree(max_deg: int) -> list[int]:
    """All n with euler_phi(n) <= max_deg (finite by elementary bounds)."""
    if max_deg < 1:
        return []
    ns, n = [], 1
    # phi(n) >= sqrt(n/2) for all n, so n <= 2*(max_deg^2) + 1 suffices.
    while n <= 2 * max_deg * max_deg + 1:
        if _euler_phi(n) <= max_deg:
            ns.append(n)
        n += 1
    return ns


def cyclotomic_factor_split(poly: IntLaurentPoly) -> tuple[dict[int, int], IntLaurentPoly]:
    """Split off all cyclotomic factors Phi_n with multiplicity.

    Returns (multiset of indices as {n: multiplicity}, cyclotomic-free
    remainder).  The product of the parts reproduces the input up to the
    monomial unit stripped during division.
    """
    if poly.is_zero:
        raise ValueError("zero polynomial")
    rem = poly
    found: dict[int, int] = {}
    for n in cyclotomic_indices_up_to_degree(poly.degree_span):
        phi = cyclotomic(n)
        while phi.divides(rem):
            rem, r = rem.divmod_exact(phi)
            assert r.is_zero
            found[n] = found.get(n, 0) + 1
            if rem.degree_span == 0:
                return found, rem
    return found, rem


# ---------------------------------------------------------------------------
# Unit circle analysis


def eval_unit_circle(poly: IntLaurentPoly, theta: float) -> float:
    """Evaluate a symmetric normalized polynomial at e^{i theta} (real-valued)."""
    if poly.is_zero or poly.reverse() != poly:
        raise NotSymmetric("eval_unit_circle requires the symmetric normalized form")
    d = poly.as_dict()
    out = float(d.get(0, 0))
    for j in range(1, poly.hi + 1):
        c = d.get(j, 0)
        if c:
            out += 2.0 * c * math.cos(j * theta)
    return out


@dataclass(frozen=True)
class CircleRootReport:
    """Sign-change analysis of theta -> p(e^{i theta}) on (0, pi]."""

    obstructed: bool
    witnesses: tuple[tuple[float, float], ...]  # intervals bracketing odd-order roots
    cyclotomic_part: tuple[tuple[int, int], ...]  # (index, multiplicity)


def odd_circle_root_obstruction(
    poly: IntLaurentPoly, samples: int = 10_000, isolate: float = 1e-9
) -> CircleRootReport:
    """Detect an odd-order unit-circle root that is not a root of unity.

    Strips all cyclotomic factors first, then scans the remainder's real values
    on (0, pi] for sign changes; each change is isolated by bisection.  An
    "obstructed" verdict means the knot cannot have infinitely many SU(2)-cyclic
    surgeries.
    """
    poly = normalize(poly) if not is_normalized(poly) else poly
    cyc, rem = cyclotomic_factor_split(poly)
    if rem.degree_span == 0:
        return CircleRootReport(False, (), tuple(sorted(cyc.items())))
    sym = rem
    if sym.reverse() != sym:
        # centering: remainder of a symmetric poly by symmetric cyclotomics
        # stays palindromic up to a shift
        sym = sym.shift(-(sym.lo + sym.degree_span // 2))
        if sym.reverse() != sym:
            raise NotSymmetric("cyclotomic-free remainder is not palindromic")
    if sym(1) < 0:
        sym = -sym
    f = lambda th: eval_unit_circle(sym, th)
    witnesses = []
    prev_th, prev_v = 0.0, f(0.0)
    for i in range(1, samples + 1):
        th = math.pi * i / samples
        v = f(th)
        if prev_v == 0.0:
            prev_th, prev_v = th, v
            continue
        if v != 0.0 and (v < 0) != (prev_v < 0):
            a, b = prev_th, th
            fa = f(a)
            while b - a > isolate:
                m = 0.5 * (a + b)
                fm = f(m)
                if fm == 0.0:
                    a, b = m - isolate / 2, m + isolate / 2
                    break
                if (fm < 0) != (fa < 0):
                    b = m
                else:
                    a, fa = m, fm
            witnesses.append((a, b))
        prev_th, prev_v = th, v
    return CircleRootReport(bool(witnesses), tuple(witnesses), tuple(sorted(cyc.items())))


def determinant(poly: IntLaurentPoly) -> int:
    """|p(-1)| for a normalized polynomial, exactly."""
    return abs(poly(-1) if poly.lo >= 0 else poly.shift(-poly.lo)(-1))


def coeff_abs_sum(poly: IntLaurentPoly) -> int:
    return sum(abs(c) for c in poly.coeffs)


def fox_milnor_necessary(poly: IntLaurentPoly) -> bool:
    """Necessary slice condition: the determinant is a perfect square."""
    d = determinant(poly)
    return math.isqrt(d) ** 2 == d


def small_knot_multiple_rule(poly: IntLaurentPoly, r) -> bool:
    """For each odd-order root of unity root e^{2 pi i p/q} of poly, check q | r.

    Odd-order roots of unity are read off the cyclotomic factors of odd
    multiplicity; Phi_q contributes primitive q-th roots.
    """
    if not isinstance(r, int) or isinstance(r, bool):
        raise NotInteger("limit slope must be an integer for small knots")
    cyc, _ = cyclotomic_factor_split(poly)
    for q, mult in cyc.items():
        if mult % 2 == 1 and r % q != 0:
            return False
    return True


# ---------------------------------------------------------------------------
# Braids and the Burau determinant


def braid_permutation(word: list[int], strands: int) -> list[int]:
    perm = list(range(strands))
    for letter in word:
        i = abs(letter) - 1
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
    return perm


def braid_closure_is_knot(word: list[int], strands: int) -> bool:
    perm = braid_permutation(word, strands)
    seen, j = {0}, perm[0]
    while j not in seen:
        seen.add(j)
        j = perm[j]
    return len(seen) == strands


def _reduced_burau_generator(i: int, n: int, inverse: bool) -> list[list[IntLaurentPoly]]:
    """(n-1)x(n-1) reduced Burau matrix of sigma_i (1-indexed i)."""
    zero, one = IntLaurentPoly(), ONE
    m = [[one if r == c else zero for c in range(n - 1)] for r in range(n - 1)]
    t, tinv = T, IntLaurentPoly((1,), -1)
    j = i - 1  # row/col of the acted basis vector
    if not inverse:
        m[j][j] = -t
        if j > 0:
            m[j - 1][j] = t
        if j < n - 2:
            m[j + 1][j] = one
    else:
        m[j][j] = -tinv
        if j > 0:
            m[j - 1][j] = one
        if j < n - 2:
            m[j + 1][j] = tinv
    return m


def _mat_mul(a, b):
    n = len(a)
    return [
        [
            sum((a[r][k] * b[k][c] for k in range(n)), IntLaurentPoly())
            for c in range(n)
        ]
        for r in range(n)
    ]


def _mat_det(m) -> IntLaurentPoly:
    n = len(m)
    if n == 0:
        return ONE
    if n == 1:
        return m[0][0]
    det = IntLaurentPoly()
    for c in range(n):
        if m[0][c].is_zero:
            continue
        minor = [[m[r][cc] for cc in range(n) if cc != c] for r in range(1, n)]
        term = m[0][c] * _mat_det(minor)
        det = det + (term if c % 2 == 0 else -term)
    return det


def alexander_from_braid(word: list[int], strands: int | None = None) -> IntLaurentPoly:
    """Alexander polynomial of a braid closure via the reduced Burau determinant.

    The closure must be a knot (single permutation cycle).  Returns the
    normalized symmetric representative.
    """
    if strands is None:
        strands = max((abs(w) for w in word), default=1) + 1
    if not braid_closure_is_knot(word, strands):
        raise NotAKnot("braid closure is not a single component")
    if strands == 1:
        return ONE
    n = strands
    mat = None
    for letter in word:
        g = _reduced_burau_generator(abs(letter), n, letter < 0)
        mat = g if mat is None else _mat_mul(mat, g)
    if mat is None:
        mat = [[ONE if r == c else IntLaurentPoly() for c in range(n - 1)] for r in range(n - 1)]
    # det(burau - I) * (1 - t) / (1 - t^n) = Delta up to units
    for r in range(n - 1):
        mat[r][r] = mat[r][r] - ONE
    num = _mat_det(mat) * (ONE - T)
    den = ONE - IntLaurentPoly.from_dict({n: 1})
    quot, rem = num.divmod_exact(den)
    if not rem.is_zero:
        raise ArithmeticError("Burau determinant not divisible by 1 - t^n")
    return normalize(quot)


def torus_knot_alexander(p: int, q: int) -> IntLaurentPoly:
    """Delta_{T(p,q)} = (t^{pq} - 1)(t - 1) / ((t^p - 1)(t^q - 1)), normalized."""
    if math.gcd(p, q) != 1 or abs(p) < 2 or abs(q) < 2:
        raise ValueError("need coprime p, q with |p|,|q| >= 2")
    p, q = abs(p), abs(q)
    tn = lambda k: IntLaurentPoly.from_dict({k: 1, 0: -1})
    num = tn(p * q) * tn(1)
    quot, rem = num.divmod_exact(tn(p))
    assert rem.is_zero
    quot, rem = quot.divmod_exact(tn(q))
    assert rem.is_zero
    return normalize(quot)
