"""SU(2) quaternion algebra and the pillowcase quotient.

The pillowcase is the torus (R/2piZ)^2 modulo the involution
(alpha, beta) ~ (-alpha, -beta); its cut-open fundamental domain is
[0, pi] x [0, 2pi).  Points store the canonical representative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi
ANGLE_TOL = 1e-9  # canonical comparison tolerance for angles
UNIT_TOL = 1e-12
COMMUTE_TOL = 1e-9


class NotUnit(ValueError):
    pass


class NonCommuting(ValueError):
    pass


class SamplingTooCoarse(ValueError):
    pass


# ---------------------------------------------------------------------------
# SU(2) as unit quaternions


@dataclass(frozen=True)
class SU2Element:
    """Unit quaternion a + bi + cj + dk, i.e. the matrix [[a+ib, c+id], [-c+id, a-ib]]."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if abs(self.norm_sq() - 1.0) > 1e-9:
            raise NotUnit(f"norm^2 = {self.norm_sq()!r} is not 1")

    @staticmethod
    def identity() -> "SU2Element":
        return SU2Element(1.0, 0.0, 0.0, 0.0)

    @staticmethod
    def from_axis_angle(angle: float, axis) -> "SU2Element":
        ax = np.asarray(axis, dtype=float)
        ax = ax / np.linalg.norm(ax)
        s = math.sin(angle)
        return SU2Element(math.cos(angle), s * ax[0], s * ax[1], s * ax[2])

    @staticmethod
    def diagonal(alpha: float) -> "SU2Element":
        """diag(e^{i alpha}, e^{-i alpha}) = cos(alpha) + sin(alpha) i."""
        return SU2Element(math.cos(alpha), math.sin(alpha), 0.0, 0.0)

    def norm_sq(self) -> float:
        return self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d

    @property
    def trace(self) -> float:
        return 2.0 * self.a

    def __mul__(self, o: "SU2Element") -> "SU2Element":
        a1, b1, c1, d1 = self.a, self.b, self.c, self.d
        a2, b2, c2, d2 = o.a, o.b, o.c, o.d
        return SU2Element(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )

    def inverse(self) -> "SU2Element":
        return SU2Element(self.a, -self.b, -self.c, -self.d)

    def conjugate_by(self, g: "SU2Element") -> "SU2Element":
        return g * self * g.inverse()

    def axis(self) -> np.ndarray:
        """Unit rotation axis; undefined (zero) for +-identity."""
        v = np.array([self.b, self.c, self.d])
        n = np.linalg.norm(v)
        return v / n if n > 1e-15 else v

    def angle(self) -> float:
        """Rotation angle in [0, pi] (arccos of the real part)."""
        return math.acos(max(-1.0, min(1.0, self.a)))

    def commutator_defect(self, o: "SU2Element") -> float:
        """Frobenius size of [self, o] as quaternions; 0 iff they commute."""
        pq, qp = self * o, o * self
        return math.sqrt(
            (pq.a - qp.a) ** 2 + (pq.b - qp.b) ** 2 + (pq.c - qp.c) ** 2 + (pq.d - qp.d) ** 2
        )

    def matrix(self) -> np.ndarray:
        return np.array(
            [
                [self.a + 1j * self.b, self.c + 1j * self.d],
                [-self.c + 1j * self.d, self.a - 1j * self.b],
            ]
        )


# ---------------------------------------------------------------------------
# Pillowcase points


@dataclass(frozen=True)
class PillowcasePoint:
    """Canonical representative: alpha in [0, pi]; beta in [0, 2pi); on the
    edges alpha in {0, pi}, beta is folded into [0, pi]."""

    alpha: float
    beta: float

    def as_tuple(self) -> tuple[float, float]:
        return (self.alpha, self.beta)


def _mod_two_pi(x: float) -> float:
    y = math.fmod(x, TWO_PI)
    if y < 0.0:
        y += TWO_PI
    if TWO_PI - y < ANGLE_TOL:
        y = 0.0
    return y


def iota_canonicalize(alpha: float, beta: float) -> PillowcasePoint:
    """Reduce mod 2pi and apply the involution so alpha lands in [0, pi].

    On the edges alpha in {0, pi} the identification (., beta) ~ (., 2pi-beta)
    folds beta into [0, pi].
    """
    a = _mod_two_pi(alpha)
    b = _mod_two_pi(beta)
    if a > math.pi + ANGLE_TOL:
        a = TWO_PI - a
        b = _mod_two_pi(-b)
    elif a > math.pi:
        a = math.pi
    if a < ANGLE_TOL or math.pi - a < ANGLE_TOL:
        if b > math.pi:
            b = TWO_PI - b
    return PillowcasePoint(a, b)


def central_twist(p: PillowcasePoint) -> PillowcasePoint:
    """The involution (alpha, beta) -> (pi - alpha, 2pi - beta); image-preserving."""
    return iota_canonicalize(math.pi - p.alpha, TWO_PI - p.beta)


def mirror_point(p: PillowcasePoint) -> PillowcasePoint:
    """Mirror transformation (alpha, beta) -> (alpha, 2pi - beta)."""
    return iota_canonicalize(p.alpha, TWO_PI - p.beta)


def pillowcase_distance(p: PillowcasePoint, q: PillowcasePoint) -> float:
    """Quotient metric: min distance over the lifts of q to the plane."""
    best = float("inf")
    for sgn in (1.0, -1.0):
        da = sgn * q.alpha - p.alpha
        db = sgn * q.beta - p.beta
        da = da - TWO_PI * round(da / TWO_PI)
        db = db - TWO_PI * round(db / TWO_PI)
        best = min(best, math.hypot(da, db))
    return best


def pillowcase_coords(m: SU2Element, l: SU2Element) -> PillowcasePoint:
    """Coordinates of a commuting pair after simultaneous diagonalization.

    alpha = arccos(trace(m)/2); beta is the angle of l on the common axis,
    signed so that the pair is the canonical representative.
    """
    for g in (m, l):
        if abs(g.norm_sq() - 1.0) > 1e-9:
            raise NotUnit(f"norm^2 = {g.norm_sq()}")
    defect = m.commutator_defect(l)
    if defect > COMMUTE_TOL:
        raise NonCommuting(f"commutator defect {defect:.3e} exceeds {COMMUTE_TOL}")
    alpha = m.angle()
    beta0 = l.angle()
    sin_a = math.sin(alpha)
    sin_b = math.sin(beta0)
    if sin_a > 1e-9 and sin_b > 1e-9:
        sign = 1.0 if float(np.dot(m.axis(), l.axis())) >= 0.0 else -1.0
        return iota_canonicalize(alpha, sign * beta0)
    # One of the two is central: beta (or alpha) is defined up to the edge fold.
    return iota_canonicalize(alpha, beta0)


# ---------------------------------------------------------------------------
# Lifting paths to the plane


@dataclass(frozen=True)
class PlanarLift:
    """Continuous lift of a pillowcase path to R^2.

    The basepoint branch takes the first point's canonical coordinates with
    beta in [0, 2pi); each subsequent point picks the lift closest to its
    predecessor.
    """

    points: tuple[tuple[float, float], ...]

    def as_array(self) -> np.ndarray:
        return np.array(self.points)

    @property
    def beta_span(self) -> float:
        betas = [b for _, b in self.points]
        return max(betas) - min(betas)


def lift_path(arc: list[PillowcasePoint], max_step: float = math.pi / 4) -> PlanarLift:
    """Lift a sampled pillowcase path to the plane by continuous branch choice.

    Consecutive pillowcase distances must stay below max_step (default pi/4);
    projecting the result back recovers the input pointwise.
    """
    if not arc:
        return PlanarLift(())
    out = [(arc[0].alpha, arc[0].beta)]
    for prev, cur in zip(arc, arc[1:]):
        if pillowcase_distance(prev, cur) >= max_step:
            raise SamplingTooCoarse(
                f"step {pillowcase_distance(prev, cur):.4f} >= {max_step:.4f}"
            )
        pa, pb = out[-1]
        best = None
        for sgn in (1.0, -1.0):
            a0, b0 = sgn * cur.alpha, sgn * cur.beta
            a = a0 + TWO_PI * round((pa - a0) / TWO_PI)
            b = b0 + TWO_PI * round((pb - b0) / TWO_PI)
            d = math.hypot(a - pa, b - pb)
            if best is None or d < best[0]:
                best = (d, (a, b))
        out.append(best[1])
    return PlanarLift(tuple(out))


def project_lift(lift: PlanarLift) -> list[PillowcasePoint]:
    return [iota_canonicalize(a, b) for a, b in lift.points]


def hausdorff_distance(points_a, points_b) -> float:
    """Symmetric Hausdorff distance between two finite pillowcase point sets."""
    pa = list(points_a)
    pb = list(points_b)
    if not pa or not pb:
        return float("inf") if pa or pb else 0.0

    def one_sided(xs, ys):
        return max(min(pillowcase_distance(x, y) for y in ys) for x in xs)

    return max(one_sided(pa, pb), one_sided(pb, pa))
