"""Polynomial systems in the projective plane: two equations, finitely many solutions.

The system is moved to an affine chart (optionally after an orthogonal or
unitary change of coordinates), the chart coefficients are recovered by a
2-D FFT on a torus of roots of unity, one variable is eliminated with a
Sylvester matrix, and the resulting polynomial eigenvalue problem is solved
by a block companion linearisation. Candidates are polished by Newton's
method in homogeneous coordinates.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

HomFn = Callable[[np.ndarray], np.ndarray]


def chart_coefficients(fn: HomFn, deg: int, Q: np.ndarray, chart: int = 0) -> np.ndarray:
    """Coefficients G[i, j] of g(u, v) = fn(Q @ lift(u, v)).

    ``lift`` puts 1 in slot ``chart`` and (u, v) in the other two slots. The
    result is exact up to rounding because g has degree <= deg in each
    variable and is sampled on a (deg+1) x (deg+1) grid of roots of unity.
    """
    m = deg + 1
    w = np.exp(2j * np.pi * np.arange(m) / m)
    U, V = np.meshgrid(w, w, indexing="ij")
    pts = np.empty((m * m, 3), dtype=complex)
    others = [c for c in range(3) if c != chart]
    pts[:, chart] = 1.0
    pts[:, others[0]] = U.ravel()
    pts[:, others[1]] = V.ravel()
    vals = fn(pts @ Q.T).reshape(m, m)
    return np.fft.fft2(vals) / (m * m)


def _trim(G: np.ndarray, tol: float) -> np.ndarray:
    """Zero out entries negligible relative to the largest coefficient."""
    G = G.copy()
    G[np.abs(G) < tol * np.max(np.abs(G))] = 0
    return G


def sylvester_pencil(F: np.ndarray, G: np.ndarray) -> List[np.ndarray]:
    """Sylvester matrix in u as a polynomial in v: returns [S_0, S_1, ..., S_D]."""
    m = _deg_in(F, 0)
    n = _deg_in(G, 0)
    D = max(_deg_in(F, 1), _deg_in(G, 1))
    size = m + n
    dtype = np.result_type(F, G)
    S = [np.zeros((size, size), dtype=dtype) for _ in range(D + 1)]
    for r in range(n):
        for i in range(m + 1):
            col = r + (m - i)
            for k in range(F.shape[1]):
                if F[i, k] != 0:
                    S[k][r, col] = F[i, k]
    for r in range(m):
        for i in range(n + 1):
            col = r + (n - i)
            for k in range(G.shape[1]):
                if G[i, k] != 0:
                    S[k][n + r, col] = G[i, k]
    return S


def _deg_in(F: np.ndarray, axis: int) -> int:
    nz = np.nonzero(np.any(F != 0, axis=1 - axis))[0]
    return int(nz.max()) if len(nz) else 0


def polyeig_values(S: Sequence[np.ndarray]) -> np.ndarray:
    """Finite eigenvalues v of sum_k S_k v^k, via a block companion matrix."""
    D = len(S) - 1
    s = S[0].shape[0]
    if D == 0:
        return np.zeros(0, dtype=complex)
    lead = S[D]
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu = scipy.linalg.lu_factor(lead, check_finite=False)
        cond_ok = np.min(np.abs(np.diag(lu[0]))) > 1e-12 * np.max(np.abs(lead))
    except (ValueError, np.linalg.LinAlgError):
        cond_ok = False
    if cond_ok:
        C = np.zeros((s * D, s * D), dtype=np.result_type(*S, float))
        C[: s * (D - 1), s:] = np.eye(s * (D - 1))
        for k in range(D):
            C[s * (D - 1):, s * k:s * (k + 1)] = -scipy.linalg.lu_solve(lu, S[k],
                                                                          check_finite=False)
        return np.linalg.eigvals(C)
    A = np.zeros((s * D, s * D), dtype=np.result_type(*S, float))
    B = np.eye(s * D, dtype=A.dtype)
    A[: s * (D - 1), s:] = np.eye(s * (D - 1))
    for k in range(D):
        A[s * (D - 1):, s * k:s * (k + 1)] = -S[k]
    B[s * (D - 1):, s * (D - 1):] = lead
    al, be = scipy.linalg.eig(A, B, right=False, homogeneous_eigvals=True)
    finite = np.abs(be) > 1e-10 * np.abs(al)
    return al[finite] / be[finite]


def _poly_in_u(F: np.ndarray, v: complex) -> np.ndarray:
    """Coefficients (ascending in u) of F(u, v) for fixed v."""
    return F @ (v ** np.arange(F.shape[1]))


def chart_candidates(F: np.ndarray, G: np.ndarray, real: bool,
                     imag_tol: float = 1e-4, radius: Optional[float] = None
                     ) -> List[Tuple[complex, complex]]:
    """Candidate common zeros (u, v) of the chart polynomials F and G."""
    S = sylvester_pencil(F, G)
    vs = polyeig_values(S)
    out = []
    for v in vs:
        if not np.isfinite(v):
            continue
        if radius is not None and abs(v) > radius:
            continue
        if real:
            if abs(v.imag) > imag_tol * (1 + abs(v)):
                continue
            v = complex(v.real, 0.0)
        cf = _poly_in_u(F, v)
        cg = _poly_in_u(G, v)
        nz = np.nonzero(np.abs(cf) > 1e-14 * np.max(np.abs(cf)))[0]
        if len(nz) == 0:
            continue
        us = np.roots(cf[: nz.max() + 1][::-1]) if nz.max() > 0 else np.zeros(0)
        if len(us) == 0:
            continue
        gv = np.abs(np.polyval(cg[::-1], us))
        scale = np.polyval(np.abs(cg[::-1]), np.abs(us)) + 1e-300
        rel = gv / scale
        best = np.argsort(rel)
        # a generic v coordinate carries one solution; keep near-ties as well
        for idx in best[:2]:
            if idx != best[0] and rel[idx] > 10 * rel[best[0]] + 1e-8:
                continue
            u = us[idx]
            if real and abs(u.imag) > imag_tol * (1 + abs(u)):
                continue
            if radius is not None and abs(u) > radius:
                continue
            out.append((complex(u.real, 0.0) if real else u, v))
    return out


@dataclass
class NewtonResult:
    x: np.ndarray
    residual: float
    converged: bool
    sigma_min: float


def newton_projective(fns: Sequence[HomFn], jacs: Sequence[Callable[[np.ndarray], np.ndarray]],
                      x0: np.ndarray, scales: Sequence[float], tol: float = 1e-9,
                      max_iter: int = 40) -> NewtonResult:
    """Newton's method for two homogeneous equations on the unit sphere of C^3 or R^3.

    ``jacs[i](x)`` returns the gradient of ``fns[i]`` at x. The third equation
    fixes the normalisation <x0, x> = 1 for the current iterate. ``scales``
    divide the residuals so that the tolerance is relative.
    """
    x = np.asarray(x0, dtype=np.result_type(x0, float))
    x = x / np.linalg.norm(x)
    res = np.inf
    sig = 0.0
    for _ in range(max_iter):
        r = np.array([fns[0](x[None])[0] / scales[0], fns[1](x[None])[0] / scales[1]])
        J = np.vstack([jacs[0](x) / scales[0], jacs[1](x) / scales[1], np.conj(x)])
        res = float(np.max(np.abs(r)))
        rhs = np.concatenate([-r, [0.0]])
        try:
            dx = np.linalg.solve(J, rhs)
        except np.linalg.LinAlgError:
            break
        x = x + dx
        x = x / np.linalg.norm(x)
        if np.linalg.norm(dx) < 1e-15:
            break
    r = np.array([fns[0](x[None])[0] / scales[0], fns[1](x[None])[0] / scales[1]])
    res = float(np.max(np.abs(r)))
    Jt = np.vstack([jacs[0](x) / scales[0], jacs[1](x) / scales[1]])
    # restrict to the tangent space of the sphere at x
    Pt = np.eye(3) - np.outer(x, np.conj(x))
    sig = float(np.linalg.svd(Jt @ Pt, compute_uv=False)[-1])
    return NewtonResult(x, res, res < tol, sig)


def canonical_projective(x: np.ndarray) -> np.ndarray:
    """Representative of the line through x with unit norm and a positive largest entry."""
    x = x / np.linalg.norm(x)
    j = int(np.argmax(np.abs(x)))
    ph = x[j] / abs(x[j])
    return x / ph


def dedupe_projective(points: Sequence[np.ndarray], tol: float = 1e-6) -> List[np.ndarray]:
    """Drop points whose projective distance to an earlier point is below ``tol``."""
    kept: List[np.ndarray] = []
    for p in points:
        p = canonical_projective(p)
        dup = False
        for q in kept:
            c = abs(np.vdot(q, p))
            # sin of the angle between the lines
            if np.sqrt(max(0.0, 1.0 - min(1.0, c) ** 2)) < tol:
                dup = True
                break
        if not dup:
            kept.append(p)
    return kept


def random_orthogonal(rng: np.random.Generator, complex_: bool = False) -> np.ndarray:
    if complex_:
        Z = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    else:
        Z = rng.standard_normal((3, 3))
    Qm, Rm = np.linalg.qr(Z)
    d = np.diag(Rm)
    return Qm * (d / np.abs(d))


def lift(u: complex, v: complex, chart: int) -> np.ndarray:
    x = np.empty(3, dtype=complex)
    others = [c for c in range(3) if c != chart]
    x[chart] = 1.0
    x[others[0]] = u
    x[others[1]] = v
    return x
