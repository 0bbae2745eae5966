"""Bivariate integer Laurent polynomials, Newton polygons, and edge polynomial tests.

All arithmetic is exact.  Root-of-unity coefficients live in the quotient ring
Z[x]/Phi_n(x) so that divisibility by M^p L^q - omega is an exact test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .alexander import IntLaurentPoly, cyclotomic, cyclotomic_indices_up_to_degree

INF = float("inf")  # infinite boundary slope sentinel


class ZeroPolynomial(ValueError):
    pass


class DegeneratePoint(ValueError):
    pass


class SideNotOnPolygon(ValueError):
    pass


class NotCoprime(ValueError):
    pass


# ---------------------------------------------------------------------------
# Bivariate Laurent polynomials


@dataclass(frozen=True)
class BivLaurentPoly:
    """Map (exp_M, exp_L) -> nonzero integer coefficient, finite support."""

    terms: tuple[tuple[tuple[int, int], int], ...]

    @staticmethod
    def from_dict(d: dict[tuple[int, int], int]) -> "BivLaurentPoly":
        items = tuple(sorted((k, int(v)) for k, v in d.items() if v != 0))
        return BivLaurentPoly(items)

    @staticmethod
    def from_triples(triples) -> "BivLaurentPoly":
        """[[m_exp, l_exp, coeff], ...] as used by the A-polynomial file format."""
        d: dict[tuple[int, int], int] = {}
        for m, l, c in triples:
            key = (int(m), int(l))
            d[key] = d.get(key, 0) + int(c)
        return BivLaurentPoly.from_dict(d)

    def to_triples(self) -> list[list[int]]:
        return [[m, l, c] for (m, l), c in self.terms]

    def as_dict(self) -> dict[tuple[int, int], int]:
        return dict(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def support(self) -> list[tuple[int, int]]:
        return [k for k, _ in self.terms]

    def __add__(self, other: "BivLaurentPoly") -> "BivLaurentPoly":
        d = self.as_dict()
        for k, v in other.terms:
            d[k] = d.get(k, 0) + v
        return BivLaurentPoly.from_dict(d)

    def __neg__(self) -> "BivLaurentPoly":
        return BivLaurentPoly(tuple((k, -v) for k, v in self.terms))

    def __sub__(self, other: "BivLaurentPoly") -> "BivLaurentPoly":
        return self + (-other)

    def __mul__(self, other: "BivLaurentPoly") -> "BivLaurentPoly":
        d: dict[tuple[int, int], int] = {}
        for (m1, l1), c1 in self.terms:
            for (m2, l2), c2 in other.terms:
                key = (m1 + m2, l1 + l2)
                d[key] = d.get(key, 0) + c1 * c2
        return BivLaurentPoly.from_dict(d)

    def strip_content(self) -> "BivLaurentPoly":
        """Divide out the integer content (sign preserved)."""
        if self.is_zero:
            return self
        g = math.gcd(*[abs(c) for _, c in self.terms])
        return BivLaurentPoly(tuple((k, c // g) for k, c in self.terms))


def monomial(m: int, l: int, coeff: int = 1) -> BivLaurentPoly:
    return BivLaurentPoly.from_dict({(m, l): coeff})


def binomial(p: int, q: int, const: int) -> BivLaurentPoly:
    """M^p L^q + const."""
    return BivLaurentPoly.from_dict({(p, q): 1, (0, 0): const})


# ---------------------------------------------------------------------------
# Newton polygons


def _cross(o, a, b) -> int:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _convex_hull(points: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Monotone-chain hull over exact integer points, counterclockwise.

    Degenerate inputs give a single point or the two segment endpoints.
    """
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower: list[tuple[int, int]] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[int, int]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 0:
        return pts[:1]
    if len(hull) == 1 or all(_cross(pts[0], pts[-1], p) == 0 for p in pts):
        return [pts[0], pts[-1]]
    return hull


@dataclass(frozen=True)
class NewtonPolygon:
    """Convex hull of a lattice support; vertices counterclockwise.

    A point has one vertex; a segment has its two endpoints.
    """

    vertices: tuple[tuple[int, int], ...]

    @property
    def is_point(self) -> bool:
        return len(self.vertices) == 1

    @property
    def is_segment(self) -> bool:
        return len(self.vertices) == 2

    def sides(self) -> list[tuple[tuple[int, int], tuple[int, int]]]:
        """Sides as ordered vertex pairs; a segment has a single side."""
        v = self.vertices
        if len(v) <= 1:
            return []
        if len(v) == 2:
            return [(v[0], v[1])]
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]

    def contains_side(self, side) -> bool:
        a, b = tuple(side[0]), tuple(side[1])
        return (a, b) in self.sides() or (b, a) in self.sides()


def newton_polygon(f: BivLaurentPoly) -> NewtonPolygon:
    if f.is_zero:
        raise ZeroPolynomial("Newton polygon of the zero polynomial")
    return NewtonPolygon(tuple(_convex_hull(f.support())))


def minkowski_sum(p: NewtonPolygon, q: NewtonPolygon) -> NewtonPolygon:
    sums = [
        (a[0] + b[0], a[1] + b[1]) for a in p.vertices for b in q.vertices
    ]
    return NewtonPolygon(tuple(_convex_hull(sums)))


def binomial_irreducibility(p: int, q: int) -> bool:
    """M^p L^q - k is irreducible iff its Newton segment has no interior lattice point."""
    if (p, q) == (0, 0):
        raise ValueError("(p, q) must be nonzero")
    return math.gcd(abs(p), abs(q)) == 1


def boundary_slopes_from_sides(poly: NewtonPolygon) -> list:
    """Boundary slopes detected by the polygon: reciprocal of each side's slope.

    Sides live in the (M, L)-plane; a side of direction (dm, dl) detects the
    boundary slope dm/dl, with horizontal sides giving the infinite slope and
    vertical sides giving 0.  Returns deduplicated Fractions (INF for infinity),
    sorted with INF last.
    """
    if poly.is_point:
        raise DegeneratePoint("a single point has no sides")
    out = set()
    for (m0, l0), (m1, l1) in poly.sides():
        dm, dl = m1 - m0, l1 - l0
        out.add(INF if dl == 0 else Fraction(dm, dl))
    finite = sorted(s for s in out if s is not INF)
    return finite + ([INF] if INF in out else [])


def edge_polynomial(f: BivLaurentPoly, side) -> IntLaurentPoly:
    """Sum of coefficients along one side of the Newton polygon, by M-exponent."""
    poly = newton_polygon(f)
    if not poly.contains_side(side):
        raise SideNotOnPolygon(f"{side} is not a side of {poly.vertices}")
    (a, b) = tuple(side[0]), tuple(side[1])
    d: dict[int, int] = {}
    for (m, l), c in f.terms:
        if _cross(a, b, (m, l)) == 0 and min(a[0], b[0]) <= m <= max(a[0], b[0]) \
                and min(a[1], b[1]) <= l <= max(a[1], b[1]):
            d[m] = d.get(m, 0) + c
    return IntLaurentPoly.from_dict(d)


def cyclotomic_product_test(theta: IntLaurentPoly) -> bool:
    """True iff theta is, up to a monomial unit, a product of cyclotomic polynomials."""
    if theta.is_zero:
        raise ZeroPolynomial("zero edge polynomial")
    rem = theta.shift(-theta.lo)
    if rem.coeffs[-1] < 0:
        rem = -rem
    changed = True
    while changed and rem.degree_span > 0:
        changed = False
        for n in cyclotomic_indices_up_to_degree(rem.degree_span):
            phi = cyclotomic(n)
            while phi.divides(rem):
                rem, r = rem.divmod_exact(phi)
                assert r.is_zero
                changed = True
                if rem.degree_span == 0:
                    break
            if rem.degree_span == 0:
                break
    return rem.degree_span == 0 and abs(rem.coeffs[0]) == 1


# ---------------------------------------------------------------------------
# Roots of unity and exact divisibility


@dataclass(frozen=True)
class RootOfUnity:
    """e^{2 pi i k / n} stored in lowest terms (0 <= power < order, gcd = 1)."""

    order: int
    power: int

    @staticmethod
    def make(n: int, k: int) -> "RootOfUnity":
        if n < 1:
            raise ValueError("order must be positive")
        k %= n
        g = math.gcd(k, n) if k else n
        return RootOfUnity(n // g, k // g)

    @staticmethod
    def one() -> "RootOfUnity":
        return RootOfUnity(1, 0)

    @staticmethod
    def minus_one() -> "RootOfUnity":
        return RootOfUnity(2, 1)

    def as_complex(self) -> complex:
        import cmath

        return cmath.exp(2j * cmath.pi * self.power / self.order)


class CyclotomicInt:
    """Element of Z[x]/Phi_n(x), represented by an integer coefficient vector."""

    __slots__ = ("n", "vec")

    def __init__(self, n: int, vec):
        self.n = n
        phi = cyclotomic(n)
        deg = phi.degree_span
        v = list(vec)
        # reduce modulo Phi_n via exact division remainder
        while len(v) > deg:
            lead = v.pop()
            if lead:
                for i, c in enumerate(phi.coeffs[:-1]):
                    v[len(v) - deg + i] -= lead * c
        v += [0] * (deg - len(v))
        self.vec = tuple(v)

    @staticmethod
    def x_power(n: int, e: int) -> "CyclotomicInt":
        e %= n  # x^n == 1 in Z[x]/Phi_n
        return CyclotomicInt(n, [0] * e + [1])

    def __add__(self, other: "CyclotomicInt") -> "CyclotomicInt":
        return CyclotomicInt(self.n, [a + b for a, b in zip(self.vec, other.vec)])

    def __mul__(self, other) -> "CyclotomicInt":
        if isinstance(other, int):
            return CyclotomicInt(self.n, [other * a for a in self.vec])
        out = [0] * (len(self.vec) + len(other.vec) - 1)
        for i, a in enumerate(self.vec):
            if a:
                for j, b in enumerate(other.vec):
                    out[i + j] += a * b
        return CyclotomicInt(self.n, out)

    __rmul__ = __mul__

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.vec)

    def __eq__(self, other) -> bool:
        return self.n == other.n and self.vec == other.vec


def divides_binomial(a: BivLaurentPoly, p: int, q: int, omega: RootOfUnity) -> bool:
    """Exact test of whether M^p L^q - omega divides a over Z[x]/Phi_n.

    Uses the unimodular change of variables X = M^p L^q, Y = M^s L^t (with
    p t - q s = 1): divisibility by X - omega is equivalent to vanishing of the
    substitution X = omega, carried out exactly in the cyclotomic quotient ring.
    """
    if (p, q) == (0, 0) or math.gcd(abs(p), abs(q)) != 1:
        raise NotCoprime("need coprime (p, q)")
    if a.is_zero:
        return True
    g, s, t = _ext_gcd(p, q)
    assert g == 1  # p*s + q*t = 1 -> matrix [[p, -t],[q, s]] has det p*s + q*t = 1
    n = omega.order
    buckets: dict[int, CyclotomicInt] = {}
    for (m, l), c in a.terms:
        # (m, l) = alpha*(p, q) + beta*(-t, s); inverse of [[p, -t],[q, s]]
        alpha = s * m + t * l
        beta = -q * m + p * l
        term = CyclotomicInt.x_power(n, omega.power * alpha) * c
        if beta in buckets:
            buckets[beta] = buckets[beta] + term
        else:
            buckets[beta] = term
    return all(v.is_zero for v in buckets.values())


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """g, x, y with a*x + b*y = g = gcd(a, b)."""
    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r:
        qt = old_r // r
        old_r, r = r, old_r - qt * r
        old_x, x = x, old_x - qt * x
        old_y, y = y, old_y - qt * y
    if old_r < 0:
        old_r, old_x, old_y = -old_r, -old_x, -old_y
    return old_r, old_x, old_y
