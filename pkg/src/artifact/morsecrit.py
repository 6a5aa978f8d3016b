"""Critical points of a fixed Morse function on random real plane curves, and
tangent lines from a point to complex plane curves."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import bivariate as bv
from .ensembles import MomentEstimate, rng_for, sample_kostlan_rng
from .homog import HomPoly
from .polycore import MultiPoly

CRIT_EXCLUSION = 1e-4
RANK_TOL = 1e-8


@dataclass(frozen=True)
class MorseFunctionSpec:
    """p = A/B for quadratic forms A = x^T diag(a) x and B = x^T diag(b) x."""

    a: Tuple[float, ...] = (1.0, 2.0, 3.0)
    b: Tuple[float, ...] = (1.0, 1.0, 1.0)

    def critical_points(self) -> List[np.ndarray]:
        # with distinct ratios a_j / b_j the critical points are the coordinate points
        return [np.eye(len(self.a))[j] for j in range(len(self.a))]

    def value(self, x: np.ndarray) -> float:
        a, b = np.array(self.a), np.array(self.b)
        return float(np.sum(a * x * x) / np.sum(b * x * x))


@dataclass
class CritPointRecord:
    point: np.ndarray
    morse_index: int
    residual: float
    rank_margin: float
    multiplier: float
    second_derivative: float


@dataclass
class CritReport:
    points: List[CritPointRecord]
    degenerate: bool
    attempts: int
    n_failed: int = 0

    def counts(self) -> Dict[int, int]:
        out = {0: 0, 1: 0}
        for r in self.points:
            out[r.morse_index] += 1
        return out


def _ternary_quadric(diag: Sequence[float]) -> MultiPoly:
    t = {}
    for j, c in enumerate(diag):
        e = [0, 0, 0]
        e[j] = 2
        t[tuple(e)] = float(c)
    return MultiPoly(3, t, 2)


def tangency_polynomial(sigma: MultiPoly, p: MorseFunctionSpec) -> MultiPoly:
    """det(grad sigma, grad A, grad B): vanishes where p restricted to the curve is critical."""
    A = _ternary_quadric(p.a)
    B = _ternary_quadric(p.b)
    gA = [A.derivative(j) for j in range(3)]
    gB = [B.derivative(j) for j in range(3)]
    w = [gA[1] * gB[2] - gA[2] * gB[1],
         gA[2] * gB[0] - gA[0] * gB[2],
         gA[0] * gB[1] - gA[1] * gB[0]]
    out = None
    for j in range(3):
        term = sigma.derivative(j) * w[j]
        out = term if out is None else out + term
    return out


def _second_derivative(sig: HomPoly, x: np.ndarray, p: MorseFunctionSpec):
    """Second derivative of p along the curve at a critical point, and the multiplier."""
    g = np.array([gi(x[None])[0] for gi in sig.gradient()]).real
    H = np.array([[gij(x[None])[0] for gij in gi.gradient()] for gi in sig.gradient()]).real
    a, b = np.array(p.a), np.array(p.b)
    A, B = np.sum(a * x * x), np.sum(b * x * x)
    pv = A / B
    gA, gB = 2 * a * x, 2 * b * x
    gp = (gA - pv * gB) / B
    Hp = (np.diag(2 * a) - pv * np.diag(2 * b) - np.outer(gp, gB) - np.outer(gB, gp)) / B
    lam = float(gp @ g / (g @ g))
    t = np.cross(g, x)
    t /= np.linalg.norm(t)
    return float(t @ (Hp - lam * H) @ t), lam


def _rank_margin(fns: Sequence[HomPoly], x: np.ndarray) -> float:
    """Smallest singular value of the tangential Jacobian with unit-normalised rows."""
    rows = []
    P = np.eye(3) - np.outer(x, x)
    for f in fns:
        g = P @ np.array([gi(x[None])[0] for gi in f.gradient()]).real
        rows.append(g / max(np.linalg.norm(g), 1e-300))
    return float(np.linalg.svd(np.array(rows), compute_uv=False)[-1])


def find_crit_points(sigma, p: MorseFunctionSpec = MorseFunctionSpec(),
                     rng: Optional[np.random.Generator] = None, max_attempts: int = 3) -> CritReport:
    """Critical points of p restricted to the real plane curve {sigma = 0} in RP^2.

    Solves {sigma = 0, det(grad sigma, grad A, grad B) = 0} by elimination in a
    randomly rotated chart. A trial whose index counts violate the Morse
    equality is re-solved from another rotation and the candidate sets are
    merged.
    """
    if isinstance(sigma, HomPoly):
        sigma_mp = sigma.to_multipoly(sigma.degree)
    else:
        sigma_mp = sigma
    sig = HomPoly.from_multipoly(sigma_mp)
    h = HomPoly.from_multipoly(tangency_polynomial(sigma_mp, p))
    rng = rng if rng is not None else np.random.default_rng(0)
    excluded = p.critical_points()
    pts: List[np.ndarray] = []
    failed = 0
    attempts = 0
    records: List[CritPointRecord] = []
    degenerate = False
    for attempts in range(1, max_attempts + 1):
        pts, _, failed = bv_solve(sig, h, rng, pts)
        records, degenerate = _classify(sig, h, pts, p, excluded)
        c = {0: 0, 1: 0}
        for r in records:
            c[r.morse_index] += 1
        # non-converging candidates are usually spurious complex pairs; only a
        # violated Morse equality signals a missed real solution
        if c[0] == c[1]:
            break
    return CritReport(records, degenerate, attempts, failed)


def bv_solve(sig: HomPoly, h: HomPoly, rng, extra):
    from .zerolocus import solve_plane_system
    return solve_plane_system([sig, h], real=True, method="rotated", rng=rng, extra=extra)


def _classify(sig, h, pts, p, excluded):
    records = []
    degenerate = False
    scale = max(sig.abs_coef_sum(), 1e-300)
    for x in pts:
        x = np.real(x)
        x = x / np.linalg.norm(x)
        if min(min(np.linalg.norm(x - e), np.linalg.norm(x + e)) for e in excluded) < CRIT_EXCLUSION:
            continue
        res = abs(sig(x[None])[0])
        margin = _rank_margin([sig, h], x)
        d2, lam = _second_derivative(sig, x, p)
        if margin < RANK_TOL:
            degenerate = True
        records.append(CritPointRecord(x, 0 if d2 > 0 else 1, float(res / scale), margin, lam, d2))
    return records, degenerate


@dataclass
class CritTrial:
    trial: int
    counts: Dict[int, int]
    degenerate: bool
    morse_equality: bool


def crit_trials(d: int, n_trials: int, seed: int, p: MorseFunctionSpec = MorseFunctionSpec()
                ) -> List[CritTrial]:
    out = []
    for t in range(n_trials):
        rng = rng_for(seed, t)
        s = sample_kostlan_rng(2, d, 1, rng)
        rep = find_crit_points(HomPoly(s.exps, s.coefs[0]), p, rng)
        c = rep.counts()
        out.append(CritTrial(t, c, rep.degenerate, c[0] == c[1]))
    return out


def estimate_crit_density(d: int, i: int, n_trials: int, seed: int,
                          trials: Optional[List[CritTrial]] = None) -> MomentEstimate:
    """Mean #Crit_i / d over Kostlan plane curves of degree d (degenerate trials dropped)."""
    if i not in (0, 1):
        raise ValueError("index must be 0 or 1 for plane curves")
    trials = trials if trials is not None else crit_trials(d, n_trials, seed)
    keep = [t for t in trials if not t.degenerate]
    disc = len(trials) - len(keep)
    if disc > 0.05 * len(trials):
        raise RuntimeError(f"{disc} of {len(trials)} trials degenerate")
    vals = np.array([t.counts[i] / d for t in keep], dtype=float)
    return MomentEstimate.from_samples(f"E#Crit_{i}/d(d={d})", vals, seed, disc)


# complex tangent lines through a point

def polar_polynomial(sigma: HomPoly, base: Sequence[complex]) -> HomPoly:
    """sum_i q_i d sigma / d x_i for the point q = base (homogeneous coordinates)."""
    out_e, out_c = [], []
    for q, g in zip(base, sigma.gradient()):
        if q != 0:
            out_e.append(g.exps)
            out_c.append(g.coefs * q)
    E = np.vstack(out_e)
    C = np.concatenate(out_c)
    uniq, inv = np.unique(E, axis=0, return_inverse=True)
    acc = np.zeros(len(uniq), dtype=complex)
    np.add.at(acc, inv.ravel(), C)
    return HomPoly(uniq, acc)


def sample_complex_kostlan(d: int, rng: np.random.Generator) -> HomPoly:
    from .ensembles import homogeneous_exponents, kostlan_weights
    E = homogeneous_exponents(3, d)
    w = kostlan_weights(3, d)
    a = (rng.standard_normal(len(w)) + 1j * rng.standard_normal(len(w))) * math.sqrt(0.5)
    return HomPoly(E, a * w)


def count_crit_complex_curve(sigma: HomPoly, base: Tuple[complex, complex],
                             rng: Optional[np.random.Generator] = None) -> int:
    """Number of points of {sigma = 0} in CP^2 whose tangent line passes through (a, b).

    The tangent line at x passes through q = [1 : a : b] exactly when the polar
    sum_i q_i d sigma/dx_i vanishes at x, so the count is the number of common
    zeros of sigma and its polar, d(d - 1) for a smooth curve and generic q.
    """
    from .zerolocus import solve_plane_system
    q = (1.0, base[0], base[1])
    if abs(sigma(np.array([q], dtype=complex))[0]) < 1e-12 * sigma.abs_coef_sum():
        raise ValueError("base point lies on the curve")
    pol = polar_polynomial(sigma, q)
    rng = rng if rng is not None else np.random.default_rng(0)
    pts, _, _ = solve_plane_system([sigma, pol], real=False, method="rotated", rng=rng)
    return len(pts)


def lefschetz_trials(d: int, n_trials: int, seed: int):
    """Rows (trial, count, expected) for random complex curves and base points."""
    rows = []
    for t in range(n_trials):
        rng = rng_for(seed, t)
        s = sample_complex_kostlan(d, rng)
        base = tuple(rng.standard_normal(2) + 1j * rng.standard_normal(2))
        c = count_crit_complex_curve(s, base, rng)
        rows.append({"trial": t, "seed": seed, "d": d, "count": c, "expected": d * (d - 1)})
    return rows
