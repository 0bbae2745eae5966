"""Numerical pillowcase images of SU(2) character varieties of knot groups.

For each meridian angle alpha on a grid, all conjugacy classes of irreducible
representations with rho(meridian) = diag(e^{i alpha}, e^{-i alpha}) are found
by multi-start damped Gauss-Newton over the remaining generators (unit
quaternions), the residual U(1) conjugation is gauge-fixed, and solutions are
continued in alpha into arcs.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .pillowcase import (
    TWO_PI,
    PillowcasePoint,
    PlanarLift,
    iota_canonicalize,
    lift_path,
    mirror_point,
    pillowcase_distance,
)


class PresentationInvalid(ValueError):
    pass


class InvalidTorusParams(ValueError):
    pass


class ZeroWinding(ValueError):
    pass


# ---------------------------------------------------------------------------
# Presentations


Word = tuple[int, ...]  # signed 1-based generator indices; negative = inverse


def parse_word(text: str, generators: list[str]) -> Word:
    """Parse 'u v U V' (case flags the inverse) into signed indices."""
    idx = {g: i + 1 for i, g in enumerate(generators)}
    out = []
    for tok in text.split():
        base = tok.lower()
        if base not in idx:
            raise PresentationInvalid(f"unknown generator {tok!r}")
        out.append(idx[base] if tok == base else -idx[base])
    return tuple(out)


def word_to_text(word: Word, generators: list[str]) -> str:
    return " ".join(
        generators[abs(s) - 1] if s > 0 else generators[abs(s) - 1].upper() for s in word
    )


def _exponent_vector(word: Word, k: int) -> list[int]:
    v = [0] * k
    for s in word:
        v[abs(s) - 1] += 1 if s > 0 else -1
    return v


def _integer_kernel_functional(rows: list[list[int]], k: int) -> list[int]:
    """Primitive phi in Z^k with rows . phi = 0, when the kernel is 1-dimensional."""
    frac_rows = [[Fraction(x) for x in r] for r in rows]
    # Gaussian elimination to row echelon
    pivots = []
    r = 0
    for c in range(k):
        piv = next((i for i in range(r, len(frac_rows)) if frac_rows[i][c] != 0), None)
        if piv is None:
            continue
        frac_rows[r], frac_rows[piv] = frac_rows[piv], frac_rows[r]
        lead = frac_rows[r][c]
        frac_rows[r] = [x / lead for x in frac_rows[r]]
        for i in range(len(frac_rows)):
            if i != r and frac_rows[i][c] != 0:
                f = frac_rows[i][c]
                frac_rows[i] = [a - f * b for a, b in zip(frac_rows[i], frac_rows[r])]
        pivots.append(c)
        r += 1
    if len(pivots) != k - 1:
        raise PresentationInvalid(
            f"abelianization has rank defect {k - len(pivots)}, expected 1 free generator"
        )
    free = next(c for c in range(k) if c not in pivots)
    phi = [Fraction(0)] * k
    phi[free] = Fraction(1)
    for i, c in enumerate(pivots):
        phi[c] = -frac_rows[i][free]
    denom = math.lcm(*[f.denominator for f in phi])
    ints = [int(f * denom) for f in phi]
    g = math.gcd(*[abs(x) for x in ints])
    ints = [x // g for x in ints]
    if sum(1 for x in ints if x < 0) > sum(1 for x in ints if x > 0):
        ints = [-x for x in ints]
    return ints


@dataclass(frozen=True)
class KnotPresentation:
    """Finite presentation of a knot group with peripheral words.

    Validated on construction: H_1 must be infinite cyclic with the meridian a
    generator and the longitude nullhomologous.
    """

    generators: tuple[str, ...]
    relators: tuple[Word, ...]
    meridian: Word
    longitude: Word

    def __post_init__(self):
        k = len(self.generators)
        if k == 0:
            raise PresentationInvalid("no generators")
        rows = [_exponent_vector(r, k) for r in self.relators]
        if k == 1:
            if any(any(x != 0 for x in r) for r in rows):
                raise PresentationInvalid("relators kill the single generator")
            phi = [1]
        else:
            phi = _integer_kernel_functional(rows, k)
            # torsion-freeness: gcd of maximal minors of the relator matrix is 1
            if rows:
                minors = []
                for cols in itertools.combinations(range(k), k - 1):
                    for rws in itertools.combinations(range(len(rows)), k - 1):
                        m = [[rows[i][j] for j in cols] for i in rws]
                        minors.append(abs(_int_det(m)))
                nonzero = [m for m in minors if m]
                if not nonzero or math.gcd(*nonzero) != 1:
                    raise PresentationInvalid("H_1 has torsion; not a knot group")
        mu_img = sum(p * e for p, e in zip(phi, _exponent_vector(self.meridian, k)))
        if abs(mu_img) != 1:
            raise PresentationInvalid(f"meridian maps to {mu_img} in H_1, expected +-1")
        lam_img = sum(p * e for p, e in zip(phi, _exponent_vector(self.longitude, k)))
        if lam_img != 0:
            raise PresentationInvalid(f"longitude maps to {lam_img} in H_1, expected 0")
        object.__setattr__(self, "_phi", tuple(phi))

    @property
    def phi(self) -> tuple[int, ...]:
        """Abelianization functional H_1-degree of each generator."""
        return self._phi

    @property
    def meridional(self) -> bool:
        """True when every generator is a degree-1 (meridian-like) element."""
        return all(p == 1 for p in self.phi)

    @staticmethod
    def from_json(obj: dict) -> "KnotPresentation":
        gens = list(obj["generators"])
        rel = tuple(parse_word(w, gens) for w in obj["relators"])
        return KnotPresentation(
            tuple(gens),
            rel,
            parse_word(obj["meridian"], gens),
            parse_word(obj["longitude"], gens),
        )

    def to_json(self) -> dict:
        gens = list(self.generators)
        return {
            "generators": gens,
            "relators": [word_to_text(w, gens) for w in self.relators],
            "meridian": word_to_text(self.meridian, gens),
            "longitude": word_to_text(self.longitude, gens),
        }


def _int_det(m: list[list[int]]) -> int:
    n = len(m)
    if n == 0:
        return 1
    if n == 1:
        return m[0][0]
    det = 0
    for c in range(n):
        if m[0][c] == 0:
            continue
        minor = [[m[r][cc] for cc in range(n) if cc != c] for r in range(1, n)]
        det += (1 if c % 2 == 0 else -1) * m[0][c] * _int_det(minor)
    return det


# -- standard presentations -------------------------------------------------


def braid_presentation(word: list[int], strands: int | None = None) -> KnotPresentation:
    """Wirtinger presentation of a braid closure, with meridian and longitude.

    Generators are the top arcs x1..xn; relators identify the bottom arcs with
    the top ones; the longitude collects the over-arcs passed under, times
    meridian^(-writhe).
    """
    if strands is None:
        strands = max((abs(w) for w in word), default=1) + 1
    n = strands
    gens = [f"x{i + 1}" for i in range(n)] if n > 2 else ["u", "v"][:n]
    # arcs as words in the generators
    arcs: list[Word] = [(i + 1,) for i in range(n)]
    inv = lambda w: tuple(-s for s in reversed(w))
    events: list[tuple] = []  # per crossing: (under position, over word, sign)
    for letter in word:
        i = abs(letter) - 1
        if letter > 0:
            # strand at position i passes over
            over = arcs[i]
            arcs[i], arcs[i + 1] = over + arcs[i + 1] + inv(over), over
            events.append((i + 1, over, 1))
        else:
            over = arcs[i + 1]
            arcs[i], arcs[i + 1] = over, inv(over) + arcs[i] + over
            events.append((i, over, -1))
    relators = tuple(arcs[j] + (-(j + 1),) for j in range(n) if len(arcs[j]) != 1 or arcs[j][0] != j + 1)
    if not relators:
        relators = ((1, -1),)
    # longitude: follow the closure starting at the top of strand 1; each
    # under-passage below the over-arc o contributes o^{sign}, accumulated on
    # the left (the conjugator g satisfies g_{k+1} = o^{sign} g_k)
    writhe = sum(1 if w > 0 else -1 for w in word)
    contribs: list[Word] = []
    pos = 0
    visited = 0
    perm_total = n  # safety bound on laps
    while True:
        for (under_pos, over, sign), letter in zip(events, word):
            i = abs(letter) - 1
            if pos == under_pos:
                contribs.append(over if sign > 0 else inv(over))
                pos = i if pos == i + 1 else i + 1
            elif pos == i or pos == i + 1:
                pos = i if pos == i + 1 else i + 1
        visited += 1
        if pos == 0 or visited > perm_total:
            break
    if pos != 0:
        raise PresentationInvalid("braid closure is not a knot")
    lam: list[int] = []
    for w in reversed(contribs):
        lam.extend(w)
    lam.extend([-1] * writhe if writhe > 0 else [1] * (-writhe))
    return KnotPresentation(tuple(gens), relators, (1,), tuple(lam))


def two_bridge_presentation(p: int, q: int) -> KnotPresentation:
    """Schubert presentation <u, v | u w = w v> of the 2-bridge knot K(p/q).

    w = v^{e1} u^{e2} v^{e3} ... with e_i = (-1)^floor(i q / p); the longitude
    is reverse(w) * w * u^{-2 sum(e_i)}.
    """
    if p % 2 == 0 or p < 3 or math.gcd(p, q) != 1 or not 0 < q < p:
        raise PresentationInvalid("need odd p >= 3 and 0 < q < p coprime")
    eps = [(-1) ** ((i * q) // p) for i in range(1, p)]
    w: list[int] = []
    for i, e in enumerate(eps):
        g = 2 if i % 2 == 0 else 1  # v, u, v, u, ...
        w.append(e * g)
    relator = tuple([1] + w + [-2] + [-s for s in reversed(w)])
    e_sum = sum(eps)
    lam = tuple(list(reversed(w)) + w + [-1] * (2 * e_sum) if e_sum >= 0 else
                list(reversed(w)) + w + [1] * (-2 * e_sum))
    return KnotPresentation(("u", "v"), (relator,), (1,), lam)


def torus_presentation(p: int, q: int) -> KnotPresentation:
    """<x, y | x^p = y^q> with the standard Seifert-fibered peripheral words.

    The meridian is x^u y^v where u*q + v*p = 1; the longitude is
    x^p mu^{-pq}.
    """
    if math.gcd(p, q) != 1 or abs(p) < 2 or abs(q) < 2:
        raise InvalidTorusParams(f"need coprime |p|,|q| >= 2, got ({p}, {q})")
    g, u, v = _ext_gcd(q, p)
    assert g == 1
    mu = tuple(([1] * u if u >= 0 else [-1] * (-u)) + ([2] * v if v >= 0 else [-2] * (-v)))
    mu_inv = tuple(-s for s in reversed(mu))
    lam = tuple([1] * p) + mu_inv * (p * q)
    relator = tuple([1] * p + [-2] * q)
    return KnotPresentation(("x", "y"), (relator,), mu, lam)


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
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


# ---------------------------------------------------------------------------
# Batched quaternion algebra


def _qmul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    a1, b1, c1, d1 = x[..., 0], x[..., 1], x[..., 2], x[..., 3]
    a2, b2, c2, d2 = y[..., 0], y[..., 1], y[..., 2], y[..., 3]
    return np.stack(
        [
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ],
        axis=-1,
    )


def _qinv(x: np.ndarray) -> np.ndarray:
    out = x.copy()
    out[..., 1:] *= -1.0
    return out


def _word_eval(word: Word, gens: np.ndarray) -> np.ndarray:
    """gens: (B, ngen, 4) unit quaternions -> (B, 4) product along the word."""
    B = gens.shape[0]
    out = np.zeros((B, 4))
    out[:, 0] = 1.0
    for s in word:
        q = gens[:, abs(s) - 1, :]
        out = _qmul(out, q if s > 0 else _qinv(q))
    return out


# ---------------------------------------------------------------------------
# Images


@dataclass
class Arc:
    """Sampled arc with per-point solver residuals and closure tags."""

    points: list[PillowcasePoint]
    residuals: list[float]
    closure_start: bool = False
    closure_end: bool = False

    def lift(self) -> PlanarLift:
        return lift_path(self.points, max_step=math.pi)


@dataclass
class PillowcaseImage:
    """Arcs and isolated points of the traced irreducible character variety."""

    arcs: list[Arc] = field(default_factory=list)
    isolated_points: list[PillowcasePoint] = field(default_factory=list)
    alpha_margin: float = 0.0
    sampling_step: float = 0.0
    solver_residual: float = 0.0
    tags: frozenset[str] = frozenset()

    @property
    def is_empty(self) -> bool:
        return not self.arcs and not self.isolated_points

    def all_points(self) -> list[PillowcasePoint]:
        pts = [p for arc in self.arcs for p in arc.points]
        pts.extend(self.isolated_points)
        return pts

    def to_csv_rows(self) -> list[tuple]:
        rows = []
        for k, arc in enumerate(self.arcs):
            for p, r in zip(arc.points, arc.residuals):
                rows.append((k, p.alpha, p.beta, r))
        for j, p in enumerate(self.isolated_points):
            rows.append((-1 - j, p.alpha, p.beta, 0.0))
        return rows


# ---------------------------------------------------------------------------
# The tracer


@dataclass(frozen=True)
class TraceOptions:
    resolution: int = 256
    starts: int = 64
    seed: int = 0
    iterations: int = 80
    residual_tol: float = 1e-10
    irreducible_tol: float = 1e-4
    match_threshold: float = 0.2
    refine_endpoints: bool = True


def _solver_residual(
    pres: KnotPresentation,
    gens: np.ndarray,
    cos_a: np.ndarray,
    sin_a: np.ndarray,
    unknown: list[int],
    fixed_meridian: int | None,
) -> np.ndarray:
    """Stacked residuals: relators = 1, unit norms, and the meridian constraint."""
    B = gens.shape[0]
    res = []
    for rel in pres.relators:
        w = _word_eval(rel, gens)
        w[:, 0] -= 1.0
        res.append(w)
    for g in unknown:
        q = gens[:, g, :]
        res.append((np.sum(q * q, axis=1) - 1.0)[:, None])
    if fixed_meridian is None:
        mu = _word_eval(pres.meridian, gens)
        mu[:, 0] -= cos_a
        mu[:, 1] -= sin_a
        res.append(mu)
    else:
        for g in unknown:
            if pres.phi[g] == 1:
                res.append((gens[:, g, 0] - cos_a)[:, None])
    return np.concatenate(res, axis=1)


def _gauge_fix(gens: np.ndarray, unknown: list[int]) -> np.ndarray:
    """Rotate about the diagonal axis so a designated generator has d = 0, c >= 0."""
    out = gens.copy()
    B = gens.shape[0]
    cd = np.zeros((B, 2))
    pick = np.full(B, -1, dtype=int)
    for g in unknown:
        mag = np.hypot(gens[:, g, 2], gens[:, g, 3])
        take = (pick < 0) & (mag > 1e-8)
        pick[take] = g
        cd[take] = gens[take, g, 2:4]
    phi = np.arctan2(cd[:, 1], cd[:, 0])
    phi[pick < 0] = 0.0
    half = phi / 2.0
    rot = np.stack([np.cos(-half), np.sin(-half), np.zeros(B), np.zeros(B)], axis=1)
    for g in range(gens.shape[1]):
        out[:, g, :] = _qmul(_qmul(rot, gens[:, g, :]), _qinv(rot))
    return out


def _orbit_distance(g1: np.ndarray, g2: np.ndarray) -> float:
    """Distance between solutions modulo the residual U(1) gauge.

    Conjugation by rotations about the diagonal axis spins every generator's
    (c, d) pair by a common angle; the optimal alignment angle has a closed
    form, leaving a gauge-invariant comparison.
    """
    ab = float(np.max(np.abs(g1[:, :2] - g2[:, :2])))
    c1, d1 = g1[:, 2], g1[:, 3]
    c2, d2 = g2[:, 2], g2[:, 3]
    dot = float(np.sum(c1 * c2 + d1 * d2))
    crs = float(np.sum(c1 * d2 - d1 * c2))
    if abs(dot) < 1e-30 and abs(crs) < 1e-30:
        return max(ab, float(np.max(np.hypot(c1, d1) + np.hypot(c2, d2))) if len(c1) else ab)
    phi = math.atan2(crs, dot)
    cph, sph = math.cos(phi), math.sin(phi)
    cr = c1 * cph - d1 * sph
    dr = c1 * sph + d1 * cph
    cd = float(np.max(np.hypot(cr - c2, dr - d2)))
    return max(ab, cd)


def _irreducibility(gens: np.ndarray) -> np.ndarray:
    """Max pairwise commutator defect over the generator images."""
    B, ngen, _ = gens.shape
    worst = np.zeros(B)
    for i in range(ngen):
        for j in range(i + 1, ngen):
            x, y = gens[:, i, :], gens[:, j, :]
            diff = _qmul(x, y) - _qmul(y, x)
            worst = np.maximum(worst, np.linalg.norm(diff, axis=1))
    return worst


def _solve_alpha_batch(
    pres: KnotPresentation,
    alphas: np.ndarray,
    opts: TraceOptions,
    seeds: list[np.ndarray] | None = None,
) -> list[list[dict]]:
    """Solve the relator system at each alpha; returns per-alpha solution dicts."""
    ngen = len(pres.generators)
    mer_gen = None
    if pres.meridional and len(pres.meridian) == 1 and pres.meridian[0] > 0:
        mer_gen = pres.meridian[0] - 1
    unknown = [g for g in range(ngen) if g != mer_gen]
    nvar = 4 * len(unknown)
    if nvar == 0:
        return [[] for _ in alphas]
    rng = np.random.default_rng(opts.seed)
    nal = len(alphas)
    B = opts.starts
    total = nal * B
    cos_a = np.repeat(np.cos(alphas), B)
    sin_a = np.repeat(np.sin(alphas), B)

    # initial states: random rotation axes at angle alpha for meridional
    # generators, fully random unit quaternions otherwise
    gens = np.zeros((total, ngen, 4))
    for g in range(ngen):
        if g == mer_gen:
            gens[:, g, 0] = cos_a
            gens[:, g, 1] = sin_a
        elif pres.phi[g] == 1 and mer_gen is not None:
            axes = rng.normal(size=(total, 3))
            axes /= np.linalg.norm(axes, axis=1, keepdims=True)
            gens[:, g, 0] = cos_a
            gens[:, g, 1:] = sin_a[:, None] * axes
        else:
            q = rng.normal(size=(total, 4))
            gens[:, g, :] = q / np.linalg.norm(q, axis=1, keepdims=True)
            # seed half the starts at the rational angles forced by relators in
            # which g appears with a pure power (central-element structure)
            exps = [abs(sum(1 if s == g + 1 else -1 for s in rel if abs(s) == g + 1))
                    for rel in pres.relators]
            e = max(exps, default=0)
            if e >= 2:
                rows = (np.arange(total).reshape(nal, B)[:, : max(1, (3 * B) // 4)]).ravel()
                ks = rng.integers(1, e, size=len(rows))
                theta = math.pi * ks / e
                axes = rng.normal(size=(len(rows), 3))
                axes /= np.linalg.norm(axes, axis=1, keepdims=True)
                gens[rows, g, 0] = np.cos(theta)
                gens[rows, g, 1:] = np.sin(theta)[:, None] * axes
    if seeds:  # warm starts appended per alpha would complicate batching; mix in
        for k, seed_list in enumerate(seeds):
            for s_i, sol in enumerate(seed_list[: max(1, B // 4)]):
                gens[k * B + s_i] = sol

    def pack(gq):
        return gq[:, unknown, :].reshape(total, nvar)

    def unpack(x):
        g = gens.copy()
        g[:, unknown, :] = x.reshape(total, len(unknown), 4)
        return g

    x = pack(gens)

    def resid(xv):
        return _solver_residual(pres, unpack(xv), cos_a, sin_a, unknown, mer_gen)

    r = resid(x)
    m = r.shape[1]
    h = 1e-7
    lam = 1e-2
    for it in range(opts.iterations):
        J = np.empty((total, m, nvar))
        for v in range(nvar):
            xp = x.copy()
            xp[:, v] += h
            J[:, :, v] = (resid(xp) - r) / h
        JTJ = np.einsum("bmi,bmj->bij", J, J)
        JTr = np.einsum("bmi,bm->bi", J, r)
        A = JTJ + lam * np.eye(nvar)[None, :, :]
        bad = ~np.all(np.isfinite(A.reshape(total, -1)), axis=1)
        if bad.any():
            A[bad] = np.eye(nvar)
            JTr[bad] = 0.0
        delta = np.linalg.solve(A, -JTr[..., None])[..., 0]
        x = x + delta
        # keep iterates on the unit-quaternion product (projected step)
        xq = x.reshape(total, len(unknown), 4)
        norms = np.linalg.norm(xq, axis=2, keepdims=True)
        np.clip(norms, 1e-3, None, out=norms)
        xq /= norms
        blown = ~np.all(np.isfinite(xq.reshape(total, -1)), axis=1)
        if blown.any():
            fresh = rng.normal(size=(int(blown.sum()), len(unknown), 4))
            fresh /= np.linalg.norm(fresh, axis=2, keepdims=True)
            xq[blown] = fresh
        x = xq.reshape(total, nvar)
        r = resid(x)
        lam = max(lam * 0.5, 1e-9)

    rnorm = np.linalg.norm(r, axis=1)
    good = rnorm < opts.residual_tol
    gq = _gauge_fix(unpack(x), unknown)
    irr = _irreducibility(gq)
    lam_q = _word_eval(pres.longitude, gq)
    betas = np.mod(np.arctan2(lam_q[:, 1], lam_q[:, 0]), TWO_PI)
    lam_offaxis = np.hypot(lam_q[:, 2], lam_q[:, 3])

    out: list[list[dict]] = []
    for k in range(nal):
        sel = np.where(good[k * B : (k + 1) * B])[0] + k * B
        sols: list[dict] = []
        for i in sel:
            if irr[i] < opts.irreducible_tol:
                continue
            if lam_offaxis[i] > 1e-6:
                continue  # longitude failed to commute: spurious
            if any(
                _orbit_distance(gq[i], s["gens"]) < 1e-5
                and _circ_dist(betas[i], s["beta"]) < 1e-5
                for s in sols
            ):
                continue
            sols.append(
                {
                    "alpha": float(alphas[k]),
                    "beta": float(betas[i]),
                    "residual": float(rnorm[i]),
                    "gens": gq[i].copy(),
                }
            )
        sols.sort(key=lambda s: s["beta"])
        out.append(sols)
    return out


def _circ_dist(a: float, b: float) -> float:
    d = abs(a - b) % TWO_PI
    return min(d, TWO_PI - d)


def trace_image(
    pres: KnotPresentation, resolution: int = 256, options: TraceOptions | None = None
) -> PillowcaseImage:
    """Trace the pillowcase image of the irreducible character variety.

    Solutions at neighboring grid alphas are matched by nearest neighbor in
    (generator data, beta) with a 0.2 rad threshold; clusters spanning fewer
    than 3 samples are emitted as isolated points.
    """
    if resolution < 64:
        raise ValueError("resolution must be at least 64")
    opts = options or TraceOptions(resolution=resolution)
    if opts.resolution != resolution:
        opts = TraceOptions(**{**opts.__dict__, "resolution": resolution})
    alphas = np.linspace(0.0, math.pi, resolution + 2)[1:-1]
    per_alpha = _solve_alpha_batch(pres, alphas, opts)

    arcs_open: list[dict] = []
    arcs_done: list[dict] = []
    for k, sols in enumerate(per_alpha):
        matched = set()
        still_open = []
        for arc in arcs_open:
            best, best_d = None, None
            for idx, s in enumerate(sols):
                if idx in matched:
                    continue
                d = max(
                    _orbit_distance(s["gens"], arc["last"]["gens"]),
                    _circ_dist(s["beta"], arc["last"]["beta"]),
                )
                if best is None or d < best_d:
                    best, best_d = idx, d
            if best is not None and best_d < opts.match_threshold:
                matched.add(best)
                arc["samples"].append(sols[best])
                arc["last"] = sols[best]
                still_open.append(arc)
            else:
                arcs_done.append(arc)
        arcs_open = still_open
        for idx, s in enumerate(sols):
            if idx not in matched:
                arcs_open.append({"samples": [s], "last": s})
    arcs_done.extend(arcs_open)

    image = PillowcaseImage(
        sampling_step=float(alphas[1] - alphas[0]),
        solver_residual=opts.residual_tol,
    )
    margin = math.pi
    for arc in arcs_done:
        samples = arc["samples"]
        if len(samples) < 3:
            for s in samples:
                image.isolated_points.append(iota_canonicalize(s["alpha"], s["beta"]))
                margin = min(margin, s["alpha"], math.pi - s["alpha"])
            continue
        pts = [iota_canonicalize(s["alpha"], s["beta"]) for s in samples]
        resid = [s["residual"] for s in samples]
        a = Arc(points=pts, residuals=resid)
        if opts.refine_endpoints:
            _refine_arc_endpoints(pres, a, samples, opts)
        for p in pts:
            margin = min(margin, p.alpha, math.pi - p.alpha)
        image.arcs.append(a)
    image.alpha_margin = margin if margin < math.pi else 0.0
    image.arcs.sort(key=lambda a: (a.points[0].alpha, a.points[0].beta))
    return image


def _refine_arc_endpoints(
    pres: KnotPresentation, arc: Arc, samples: list[dict], opts: TraceOptions
) -> None:
    """Extrapolate 2-generator meridional arc endpoints to the reducible locus.

    Near an endpoint the free generator's axis angle gamma tends to 0 or pi;
    alpha is a smooth even function of gamma there, so solving at a shrinking
    gamma sequence and extrapolating in gamma^2 pins the endpoint, which is
    appended as a closure-tagged point with beta = 0.
    """
    if len(pres.generators) != 2 or not pres.meridional:
        return
    if len(pres.meridian) != 1 or pres.meridian[0] != 1:
        return
    for end in (0, -1):
        s = samples[end]
        g = s["gens"][1]
        sin_a = math.sin(s["alpha"])
        if sin_a < 1e-6:
            continue
        axis = g[1:] / sin_a
        gamma = math.atan2(math.hypot(axis[1], axis[2]), axis[0])
        near_pi = gamma > math.pi / 2
        delta_end = (math.pi - gamma) if near_pi else gamma
        if delta_end > 1.2 or delta_end < 1e-8:
            continue
        pts, alpha_seed = [], s["alpha"]
        ok = True
        for j in range(4):
            delta = delta_end / (2.0**j)
            gam = (math.pi - delta) if near_pi else delta
            alpha_j = _solve_alpha_at_gamma(pres, gam, alpha_seed)
            if alpha_j is None:
                ok = False
                break
            pts.append((delta * delta, alpha_j))
            alpha_seed = alpha_j
        if not ok:
            continue
        alpha_star = _neville(pts, 0.0)
        if not (0.0 < alpha_star < math.pi):
            continue
        endpoint = iota_canonicalize(alpha_star, 0.0)
        if end == 0:
            arc.points.insert(0, endpoint)
            arc.residuals.insert(0, 0.0)
            arc.closure_start = True
        else:
            arc.points.append(endpoint)
            arc.residuals.append(0.0)
            arc.closure_end = True


def _solve_alpha_at_gamma(
    pres: KnotPresentation, gamma: float, alpha_seed: float
) -> float | None:
    """Newton in alpha alone, with the second generator's axis angle frozen."""
    cg, sg = math.cos(gamma), math.sin(gamma)

    def resid(alpha: float) -> np.ndarray:
        gens = np.zeros((1, 2, 4))
        gens[0, 0] = [math.cos(alpha), math.sin(alpha), 0.0, 0.0]
        gens[0, 1] = [math.cos(alpha), math.sin(alpha) * cg, math.sin(alpha) * sg, 0.0]
        rs = [
            _word_eval(rel, gens)[0] - np.array([1.0, 0.0, 0.0, 0.0])
            for rel in pres.relators
        ]
        return np.concatenate(rs)

    alpha = alpha_seed
    h = 1e-7
    for _ in range(60):
        r = resid(alpha)
        if np.max(np.abs(r)) < 1e-13:
            break
        dr = (resid(alpha + h) - r) / h
        denom = float(dr @ dr)
        if denom < 1e-18:
            return None
        alpha -= float(dr @ r) / denom
    if np.max(np.abs(resid(alpha))) > 1e-9:
        return None
    return alpha


def _neville(points: list[tuple[float, float]], x: float) -> float:
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    n = len(points)
    for level in range(1, n):
        for i in range(n - level):
            ys[i] = ((x - xs[i + level]) * ys[i] + (xs[i] - x) * ys[i + 1]) / (
                xs[i] - xs[i + level]
            )
    return ys[0]


# ---------------------------------------------------------------------------
# Torus knots, satellites, connected sums


def torus_knot_image(
    p: int, q: int, resolution: int = 256, options: TraceOptions | None = None
) -> PillowcaseImage:
    """Image of the (p, q) torus knot, traced from <x, y | x^p = y^q>."""
    pres = torus_presentation(p, q)
    opts = options or TraceOptions(resolution=resolution, irreducible_tol=1e-3)
    return trace_image(pres, resolution, opts)


@dataclass(frozen=True)
class SatelliteSpec:
    """Satellite parameters: winding number w; (p, q) and branch data for cables."""

    winding: int
    cable: tuple[int, int] | None = None

    def __post_init__(self):
        if self.cable is not None:
            p, q = self.cable
            if math.gcd(p, q) != 1 or q < 2:
                raise ValueError("cable parameters need gcd(p, q) = 1 and q >= 2")


def satellite_image(img: PillowcaseImage, spec: SatelliteSpec) -> PillowcaseImage:
    """Companion-induced part of a satellite image (tagged partial).

    Each point (alpha, beta) contributes ((alpha + 2 pi k)/w, w beta) for
    k = 0..|w|-1.
    """
    w = spec.winding
    if w == 0:
        raise ZeroWinding("satellite transform needs nonzero winding number")
    out = PillowcaseImage(
        sampling_step=img.sampling_step / abs(w),
        solver_residual=img.solver_residual,
        tags=img.tags | {"partial"},
    )
    for k in range(abs(w)):
        for arc in img.arcs:
            pts = [
                iota_canonicalize((p.alpha + TWO_PI * k) / w, w * p.beta)
                for p in arc.points
            ]
            out.arcs.append(Arc(pts, list(arc.residuals), arc.closure_start, arc.closure_end))
        for p in img.isolated_points:
            out.isolated_points.append(
                iota_canonicalize((p.alpha + TWO_PI * k) / w, w * p.beta)
            )
    pts = out.all_points()
    out.alpha_margin = min(
        (min(p.alpha, math.pi - p.alpha) for p in pts), default=0.0
    )
    return out


def connected_sum_image(img1: PillowcaseImage, img2: PillowcaseImage) -> PillowcaseImage:
    """Points (alpha, b1 + b2) over shared alphas, plus both inputs (tagged partial)."""
    out = PillowcaseImage(
        sampling_step=max(img1.sampling_step, img2.sampling_step),
        solver_residual=max(img1.solver_residual, img2.solver_residual),
        tags=img1.tags | img2.tags | {"partial"},
    )
    for src in (img1, img2):
        for arc in src.arcs:
            out.arcs.append(Arc(list(arc.points), list(arc.residuals), arc.closure_start, arc.closure_end))
        out.isolated_points.extend(src.isolated_points)
    for a1 in img1.arcs:
        for a2 in img2.arcs:
            pts = _combine_arcs_by_alpha(a1, a2)
            if len(pts) >= 2:
                out.arcs.append(Arc(pts, [0.0] * len(pts)))
    pts = out.all_points()
    out.alpha_margin = min(
        (min(p.alpha, math.pi - p.alpha) for p in pts), default=0.0
    )
    return out


def _combine_arcs_by_alpha(a1: Arc, a2: Arc) -> list[PillowcasePoint]:
    """beta-sum of two arcs over the alphas of the first that both cover."""
    l2 = a2.lift().as_array()
    if len(l2) < 2:
        return []
    order = np.argsort(l2[:, 0])
    a2_alpha, a2_beta = l2[order, 0], l2[order, 1]
    lo, hi = a2_alpha[0], a2_alpha[-1]
    out = []
    for p in a1.points:
        if lo - 1e-12 <= p.alpha <= hi + 1e-12:
            b2 = float(np.interp(p.alpha, a2_alpha, a2_beta))
            out.append(iota_canonicalize(p.alpha, p.beta + b2))
    return out


def mirror_image(img: PillowcaseImage) -> PillowcaseImage:
    """Pointwise (alpha, beta) -> (alpha, 2 pi - beta)."""
    out = PillowcaseImage(
        alpha_margin=img.alpha_margin,
        sampling_step=img.sampling_step,
        solver_residual=img.solver_residual,
        tags=img.tags,
    )
    for arc in img.arcs:
        out.arcs.append(
            Arc([mirror_point(p) for p in arc.points], list(arc.residuals),
                arc.closure_start, arc.closure_end)
        )
    out.isolated_points = [mirror_point(p) for p in img.isolated_points]
    return out


# ---------------------------------------------------------------------------
# Line fitting


@dataclass(frozen=True)
class ArcLine:
    """Fitted line beta = slope * alpha + intercept on the planar lift."""

    slope: float  # the value -r; math.inf for vertical arcs
    intercept: float  # reduced into [0, 2 pi)
    alpha_range: tuple[float, float]
    max_residual: float
    curved: bool


def fit_arc_lines(img: PillowcaseImage, tol: float = 1e-6) -> list[ArcLine]:
    """Least-squares line per arc on the planar lift; flags arcs exceeding tol."""
    out = []
    for arc in img.arcs:
        if len(arc.points) < 8:
            continue
        lift = arc.lift().as_array()
        al, be = lift[:, 0], lift[:, 1]
        span = al.max() - al.min()
        if span < 1e-9:
            resid = float(np.max(np.abs(al - al.mean())))
            out.append(
                ArcLine(math.inf, float(al.mean()), (al.min(), al.max()), resid, resid > tol)
            )
            continue
        A = np.stack([al, np.ones_like(al)], axis=1)
        coef, *_ = np.linalg.lstsq(A, be, rcond=None)
        resid = float(np.max(np.abs(A @ coef - be)))
        out.append(
            ArcLine(
                float(coef[0]),
                float(coef[1] % TWO_PI),
                (float(al.min()), float(al.max())),
                resid,
                resid > tol,
            )
        )
    return out


def connecting_path_winding(img: PillowcaseImage, tol: float = 1e-6) -> int:
    """Largest count of full 2 pi beta-sweeps between reducible-line contacts.

    Each arc is lifted; contacts are lift points with beta in 2 pi Z (within
    tol) plus closure-tagged endpoints.  A return of >= 1 certifies a path from
    beta = 0 to beta = 2 pi in the fundamental domain.
    """
    best = 0
    for arc in img.arcs:
        lift = arc.lift().as_array()
        betas = lift[:, 1]
        segments: list[tuple[float, float]] = []
        prev = betas[0]
        anchor = betas[0]
        for i in range(1, len(betas)):
            lo, hi = sorted((betas[i - 1], betas[i]))
            k0 = math.ceil(lo / TWO_PI - 1e-12)
            while k0 * TWO_PI <= hi + 1e-12:
                segments.append((anchor, k0 * TWO_PI))
                anchor = k0 * TWO_PI
                k0 += 1
        segments.append((anchor, betas[-1]))
        if arc.closure_start:
            segments.insert(0, (TWO_PI * round(betas[0] / TWO_PI), betas[0]))
        if arc.closure_end:
            segments.append((betas[-1], TWO_PI * round(betas[-1] / TWO_PI)))
        span = max((abs(b - a) for a, b in segments), default=0.0)
        best = max(best, int((span + tol) // TWO_PI))
    return best
