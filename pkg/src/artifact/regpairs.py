"""Regular pairs (U, P): transversality certificates and the constants built on them."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.optimize
import scipy.special
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .ensembles import (MomentEstimate, homogeneous_exponents, kostlan_weights, rng_for)
from .polycore import MultiPoly, PolyMap, bargmann_fock_norm_sq, evaluate_many, sum_of_squares

Blocks = Tuple[Tuple[int, ...], ...]


@dataclass(frozen=True)
class RegularPair:
    """Polynomial map P on the open ball of radius ``radius`` in R^n.

    ``blocks`` optionally lists coordinate blocks such that for every
    orthogonal g acting on one block there is an orthogonal Q with
    P(g x) = Q P(x). Then |P| and the singular values of dP depend only on
    the block norms, and certification runs on the reduced radial grid.
    """

    radius: float
    P: PolyMap
    blocks: Optional[Blocks] = None
    name: str = ""

    @property
    def n(self) -> int:
        return self.P.nvars

    @property
    def k(self) -> int:
        return self.P.k

    @property
    def R_UP(self) -> float:
        return max(1.0, self.radius)


@dataclass
class TransversalityCert:
    delta: float
    eps: float
    h: float
    boundary_margin: float
    interior_margin: float
    raw_boundary_margin: float
    raw_interior_margin: float
    lipschitz: Dict[str, float]
    certified: bool
    failure: Optional[str] = None
    where: Optional[Tuple[float, ...]] = None
    n_cells: int = 0

    def to_dict(self) -> dict:
        return {
            "delta": self.delta, "eps": self.eps, "h": self.h,
            "boundary_margin": self.boundary_margin, "interior_margin": self.interior_margin,
            "raw_boundary_margin": self.raw_boundary_margin,
            "raw_interior_margin": self.raw_interior_margin,
            "certified": self.certified, "failure": self.failure,
            "where": list(self.where) if self.where is not None else None,
            "n_cells": self.n_cells,
        }


@dataclass
class PairConstants:
    log_rho_R: float
    log_norm_sq: float
    log_tau: float
    log_m_tau: float
    log_c_sigma_lower: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


# sup bounds over a ball from coefficients

def _monomial_sup(e: Sequence[int], radius: float) -> float:
    """max of |x^e| over the ball of the given radius."""
    tot = sum(e)
    if tot == 0:
        return 1.0
    v = radius ** tot
    for k in e:
        if k:
            v *= (k / tot) ** (k / 2)
    return v


def sup_bound(p: MultiPoly, radius: float) -> float:
    return sum(abs(c) * _monomial_sup(e, radius) for e, c in p.terms.items())


def derivative_bound(p: MultiPoly, radius: float, order: int) -> float:
    """Frobenius bound on the order-th derivative tensor of p over the ball."""
    tot = 0.0
    for idx in itertools.product(range(p.nvars), repeat=order):
        q = p
        for j in idx:
            q = q.derivative(j)
        tot += sup_bound(q, radius) ** 2
    return math.sqrt(tot)


def hessian_bound(p: MultiPoly, radius: float) -> float:
    return derivative_bound(p, radius, 2)


# grids

def _reduced_grid(pair: RegularPair, h: float):
    """Boxes of side h covering the (reduced) domain.

    Returns cell centres in full coordinates, the lower and upper corners of
    each box in reduced coordinates, and the box half-diagonal. With blocks
    the reduced coordinates are the block norms and the representative point
    puts each norm on the first coordinate of its block.
    """
    R = pair.radius
    n = pair.n
    nc = int(math.ceil(R / h))
    if pair.blocks is not None:
        blocks = [b for b in pair.blocks if len(b)]
        m = len(blocks)
        lo_ax = np.arange(nc) * h
    else:
        blocks = [(j,) for j in range(n)]
        m = n
        lo_ax = np.arange(-nc, nc) * h
    lo = np.stack(np.meshgrid(*([lo_ax] * m), indexing="ij"), -1).reshape(-1, m)
    hi = lo + h
    red = lo + 0.5 * h
    # keep boxes meeting the closed ball of radius R
    near = np.sqrt(np.sum(np.where(lo > 0, lo, np.where(hi < 0, hi, 0.0)) ** 2, axis=1))
    keep = near <= R
    lo, hi, red = lo[keep], hi[keep], red[keep]
    X = np.zeros((red.shape[0], n))
    for j, b in enumerate(blocks):
        X[:, b[0]] = red[:, j]
    far = np.sqrt(np.sum(np.maximum(np.abs(lo), np.abs(hi)) ** 2, axis=1))
    return X, lo, hi, near[keep], far, blocks, h * math.sqrt(m) / 2


def _eval(p: MultiPoly, X: np.ndarray) -> np.ndarray:
    if not p.terms:
        return np.zeros(X.shape[0])
    return evaluate_many(p, X)


def _restrict(p: MultiPoly, blocks, n: int) -> MultiPoly:
    """p at the representative point, as a polynomial in the reduced coordinates."""
    first = {b[0]: j for j, b in enumerate(blocks)}
    t: Dict[Tuple[int, ...], float] = {}
    for e, c in p.terms.items():
        if any(e[v] and v not in first for v in range(n)):
            continue
        f = [0] * len(blocks)
        for v, j in first.items():
            f[j] = e[v]
        f = tuple(f)
        t[f] = t.get(f, 0.0) + c
    return MultiPoly(len(blocks), t)


def _power_interval(lo, hi, e: int):
    if e == 0:
        return np.ones_like(lo), np.ones_like(lo)
    a, b = lo ** e, hi ** e
    if e % 2 == 0:
        zero = (lo < 0) & (hi > 0)
        return np.where(zero, 0.0, np.minimum(a, b)), np.maximum(a, b)
    return a, b


def interval_eval(p: MultiPoly, lo: np.ndarray, hi: np.ndarray):
    """Enclosure of p over the boxes [lo, hi] by termwise interval arithmetic."""
    L = np.zeros(lo.shape[0])
    H = np.zeros(lo.shape[0])
    for e, c in p.terms.items():
        ml = np.ones(lo.shape[0])
        mh = np.ones(lo.shape[0])
        for v, k in enumerate(e):
            if k:
                pl, ph = _power_interval(lo[:, v], hi[:, v], k)
                cands = np.stack([ml * pl, ml * ph, mh * pl, mh * ph])
                ml, mh = cands.min(0), cands.max(0)
        if c >= 0:
            L += c * ml
            H += c * mh
        else:
            L += c * mh
            H += c * ml
    return L, H


def _sq_interval(L, H):
    lo = np.where((L <= 0) & (H >= 0), 0.0, np.minimum(L * L, H * H))
    return lo, np.maximum(L * L, H * H)


def _taylor_bounds(comps, grads, X, n, k, rho, Rb, lip):
    """Lower bounds for |P| and sigma_min(dP) on the ball of radius rho around each centre."""
    N = X.shape[0]
    vals = np.stack([_eval(c, X) for c in comps], 1)
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError("non-finite evaluation of P")
    absP = np.linalg.norm(vals, axis=1)
    J = np.stack([np.stack([_eval(g, X) for g in grads[a]], 1) for a in range(k)], 1)
    Hs = np.stack([np.stack([np.stack([_eval(grads[a][j].derivative(l), X) for l in range(n)], 1)
                             for j in range(n)], 1) for a in range(k)], 1)
    hop = np.linalg.norm(Hs, ord=2, axis=(2, 3))
    M2 = math.sqrt(sum(hessian_bound(c, Rb) ** 2 for c in comps))
    M3 = [derivative_bound(c, Rb, 3) for c in comps]
    lip["P_hessian"] = M2
    lip["P_third"] = math.sqrt(sum(v * v for v in M3))
    lowP = absP - rho * np.linalg.norm(J, ord=2, axis=(1, 2)) - 0.5 * rho * rho * M2

    # dP(x) = dP(c) + D^2P(c)[x - c] + O(rho^2)
    sv = np.linalg.svd(J, compute_uv=False)[:, -1]
    dJ = rho * np.linalg.norm(hop, axis=1) + 0.5 * rho * rho * lip["P_third"]
    jweyl = sv - dJ
    row_low = np.linalg.norm(J, axis=2) - rho * hop - 0.5 * rho * rho * np.array(M3)[None, :]

    G = np.einsum("naj,nbj->nab", J, J)
    E = np.zeros((N, k, k))
    for a in range(k):
        for b in range(a + 1, k):
            g = MultiPoly(n, {})
            for j in range(n):
                g = g + grads[a][j] * grads[b][j]
            if g.terms and any(sum(e) > 0 for e in g.terms):
                gn = np.sqrt(sum(_eval(g.derivative(j), X) ** 2 for j in range(n)))
                E[:, a, b] = E[:, b, a] = rho * gn + 0.5 * rho * rho * hessian_bound(g, Rb)
    diag_low = np.maximum(row_low, 0.0) ** 2
    off = (np.abs(G) + E).sum(2) - np.abs(np.einsum("naa->na", G))
    gersh = np.min(diag_low - off, axis=1)
    sig_low = np.maximum(np.sqrt(np.maximum(gersh, 0.0)), jweyl)
    sig_raw = sv
    return absP, lowP, sig_low, sig_raw


def _interval_bounds(comps, grads, lo, hi, blocks, n, k):
    """Lower bounds for |P|^2 and sigma_min(dP)^2 over each reduced box."""
    p2 = np.zeros(lo.shape[0])
    for c in comps:
        L, H = interval_eval(_restrict(c, blocks, n), lo, hi)
        p2 += _sq_interval(L, H)[0]
    rg = [[_restrict(g, blocks, n) for g in grads[a]] for a in range(k)]
    Gl = np.zeros((lo.shape[0], k))
    off = np.zeros((lo.shape[0], k))
    for a in range(k):
        for b in range(a, k):
            g = MultiPoly(len(blocks), {})
            for j in range(n):
                g = g + rg[a][j] * rg[b][j]
            L, H = interval_eval(g, lo, hi)
            if a == b:
                Gl[:, a] = np.maximum(L, 0.0)
            else:
                m = np.maximum(np.abs(L), np.abs(H))
                off[:, a] += m
                off[:, b] += m
    return p2, np.maximum(np.min(Gl - off, axis=1), 0.0)


def certify(pair: RegularPair, delta: float, eps: float, h: Optional[float] = None
            ) -> TransversalityCert:
    """Grid certificate that (delta, eps) is a transversality pair for (U, P).

    Condition 1: |P| > delta on the shell R - h <= |y| <= R.
    Condition 2: the smallest singular value of dP is at least eps wherever
    |P| < delta.

    The domain is covered by boxes of side h (in block-norm coordinates when
    the pair declares symmetry blocks). Every box gets two rigorous lower
    bounds and the larger one is used:

    * interval arithmetic on P and on the Gram matrix G = dP dP^T over the
      box, with Gershgorin's inequality for the smallest eigenvalue; this is
      exact for monomials and so sharp when a tight level falls on a grid line;
    * second-order Taylor bounds on the ball around the box centre, using the
      exact first and second derivatives at the centre and coefficient bounds
      on the next derivative over the ball of radius R + rho.

    Gershgorin in either form keeps orthogonal constant rows exact, since
    identically vanishing Gram entries get zero correction.
    """
    if delta <= 0 or eps <= 0:
        raise ValueError("delta and eps must be positive")
    R = pair.radius
    if h is None:
        m = len([b for b in pair.blocks if len(b)]) if pair.blocks is not None else pair.n
        h = R / (256 if m <= 2 else 128)
    if h > R / 64 * (1 + 1e-12):
        raise ValueError("grid spacing must be at most R/64")
    X, lo, hi, near, far, blocks, rho = _reduced_grid(pair, h)
    comps = list(pair.P.components)
    k, n = pair.k, pair.n
    grads = [[c.derivative(j) for j in range(n)] for c in comps]
    lip: Dict[str, float] = {}
    absP, lowP_t, sig_t, sig_raw = _taylor_bounds(comps, grads, X, n, k, rho, R + rho, lip)
    p2_i, g_i = _interval_bounds(comps, grads, lo, hi, blocks, n, k)
    lowP = np.maximum(lowP_t, np.sqrt(p2_i))
    sig_low = np.maximum(sig_t, np.sqrt(g_i))

    r = np.linalg.norm(X, axis=1)
    shell = (far >= R - h) & (near <= R)
    shell_raw = (r >= R - h) & (r <= R)
    sub = lowP < delta
    sub_raw = (absP < delta) & (r < R)

    bmargin = float(np.min(lowP[shell])) if np.any(shell) else math.inf
    raw_b = float(np.min(absP[shell_raw])) if np.any(shell_raw) else math.inf
    imargin = float(np.min(sig_low[sub])) if np.any(sub) else math.inf
    raw_i = float(np.min(sig_raw[sub_raw])) if np.any(sub_raw) else math.inf

    failure, where = None, None
    if not bmargin > delta:
        failure = "boundary: |P| <= delta near the boundary of U"
        idx = np.nonzero(shell)[0][np.argmin(lowP[shell])]
        where = tuple(float(v) for v in X[idx])
    elif not imargin >= eps:
        failure = "interior: singular value below eps on the delta-sublevel"
        idx = np.nonzero(sub)[0][np.argmin(sig_low[sub])]
        where = tuple(float(v) for v in X[idx])
    return TransversalityCert(delta, eps, h, bmargin, imargin, raw_b, raw_i, lip,
                              failure is None, failure, where, int(X.shape[0]))


# built-in pairs

def builtin_sphere_pair(n: int, k: int) -> RegularPair:
    """P = (x_1, ..., x_{k-1}, x_k^2 + ... + x_n^2 - 1) on the ball of radius 2."""
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    comps = []
    for j in range(k - 1):
        comps.append(MultiPoly.variable(n, j))
    comps.append(sum_of_squares(n, range(k - 1, n)) - MultiPoly.constant(n, 1.0))
    blocks = (tuple(range(k - 1)), tuple(range(k - 1, n)))
    return RegularPair(2.0, PolyMap(tuple(comps)), blocks, f"sphere(n={n},k={k})")


def builtin_product_pair(n: int, k: int, i: int) -> RegularPair:
    """Q = (y_{n-i-1}, ..., y_{n-i-k+1}, (|x|^2 - 2)^2 + sum_{j <= n-k-i} y_j^2 - 1).

    x has i + 1 coordinates and y the remaining n - i - 1; the domain is the
    ball of radius sqrt 6 and the zero set is isotopic to S^i x S^(n-i-k).
    """
    if not (1 <= k <= n and 0 <= i <= n - k):
        raise ValueError("need 1 <= k <= n and 0 <= i <= n - k")
    xs = tuple(range(i + 1))
    ya = tuple(range(i + 1, n - k + 1))
    yb = tuple(range(n - k + 1, n))
    x2 = sum_of_squares(n, xs) - MultiPoly.constant(n, 2.0)
    qk = x2 * x2 + sum_of_squares(n, ya) - MultiPoly.constant(n, 1.0)
    # Q_j = y_{n-i-j}: y index n-i-j is coordinate n-j, for j = 1..k-1
    comps = [MultiPoly.variable(n, n - j) for j in range(1, k)]
    comps.append(qk)
    return RegularPair(math.sqrt(6.0), PolyMap(tuple(comps)), (xs, ya, yb),
                       f"product(n={n},k={k},i={i})")


def valid_product_indices(n_max: int = 4):
    for n in range(1, n_max + 1):
        for k in range(1, n + 1):
            for i in range(0, n - k + 1):
                yield n, k, i


# constants

def log_g_R(s: float, R: float, n: int) -> float:
    return 2 * n * math.log((R + s) / s) + math.pi * (R + s) ** 2


def rho_R(R: float, n: int) -> float:
    """log of inf_{s > 0} (R+s)^(2n) s^(-2n) exp(pi (R+s)^2)."""
    if R <= 0 or n < 1:
        raise ValueError("need R > 0 and n >= 1")
    res = scipy.optimize.minimize_scalar(lambda s: log_g_R(s, R, n), bounds=(1e-12, 10 * R + 10),
                                         method="bounded", options={"xatol": 1e-12})
    return float(res.fun)


def tau(pair: RegularPair, certs: Sequence[TransversalityCert]) -> float:
    """log tau = log(24 k rho_R ||P||^2 min_certs (1/delta^2 + pi n / eps^2))."""
    if not certs:
        raise ValueError("tau needs at least one certificate")
    n, k = pair.n, pair.k
    best = min(1.0 / c.delta ** 2 + math.pi * n / c.eps ** 2 for c in certs)
    return (math.log(24 * k) + rho_R(pair.R_UP, n) + math.log(bargmann_fock_norm_sq(pair.P))
            + math.log(best))


ASYMPTOTIC_TAU = 30.0


def _log_f_exact(u: float, t: float) -> float:
    # a^2 = t + u, integral = (sqrt(pi)/2) erfcx(a) exp(-a^2)
    a = math.sqrt(t + u)
    return (math.log(u) - math.log(t + u) - math.log(2.0)
            + math.log(scipy.special.erfcx(a)) - t - u)


def _log_f_asymptotic(u: float, t: float) -> float:
    # integral ~ exp(-a^2) / (2a)
    a2 = t + u
    return (math.log(u) - math.log(a2) - 0.5 * math.log(math.pi) - math.log(2.0)
            - 0.5 * math.log(a2) - t - u)


def log_m_tau(log_tau_value: float) -> float:
    """log sup_{a >= sqrt(tau)} (1/sqrt(pi)) (1 - tau/a^2) int_a^inf exp(-t^2) dt.

    Parametrised by u = a^2 - tau > 0 so that 1 - tau/a^2 = u / a^2 keeps full
    precision even for tau ~ e^60.
    """
    if not math.isfinite(log_tau_value):
        if log_tau_value == -math.inf:
            return math.log(0.5)
        raise ValueError("log tau must be finite")
    t = math.exp(log_tau_value)
    f = _log_f_exact if t <= ASYMPTOTIC_TAU else _log_f_asymptotic
    res = scipy.optimize.minimize_scalar(lambda u: -f(u, t), bounds=(1e-14, 20.0 + t),
                                         method="bounded", options={"xatol": 1e-12})
    # refine on a bracket around the optimum from a log-spaced scan
    us = np.logspace(-12, math.log10(20.0 + t), 400)
    fs = np.array([f(u, t) for u in us])
    j = int(np.argmax(fs))
    lo, hi = us[max(j - 1, 0)], us[min(j + 1, len(us) - 1)]
    res2 = scipy.optimize.minimize_scalar(lambda u: -f(u, t), bounds=(lo, hi),
                                          method="bounded", options={"xatol": 1e-14})
    return float(max(-res.fun, -res2.fun, fs[j]))


def log_ball_volume(n: int, R: float) -> float:
    return 0.5 * n * math.log(math.pi) + n * math.log(R) - math.lgamma(n / 2 + 1)


def log_c_sigma_lower(pair: RegularPair, certs: Sequence[TransversalityCert]) -> float:
    return log_m_tau(tau(pair, certs)) - pair.n * math.log(2.0) - log_ball_volume(pair.n, pair.R_UP)


def pair_constants(pair: RegularPair, certs: Sequence[TransversalityCert]) -> PairConstants:
    lt = tau(pair, certs)
    lm = log_m_tau(lt)
    return PairConstants(rho_R(pair.R_UP, pair.n), math.log(bargmann_fock_norm_sq(pair.P)), lt, lm,
                         lm - pair.n * math.log(2.0) - log_ball_volume(pair.n, pair.R_UP))


# candidate (delta, eps) values, target values first
SPHERE_LADDER = ((0.75, 1.0), (0.7, 1.0), (0.75, 0.9), (0.5, 1.0), (0.5, 0.5))
PRODUCT_LADDER = ((0.45, 1.0), (0.4, 1.0), (0.25, 1.0), (0.25, 0.5))


def certified_certs(pair: RegularPair, ladder: Sequence[Tuple[float, float]]
                    ) -> List[TransversalityCert]:
    return [c for c in (certify(pair, d, e) for d, e in ladder) if c.certified]


# planar zero-set components on a grid

def grid_components(F: np.ndarray) -> Tuple[int, np.ndarray, np.ndarray]:
    """Connected components of the piecewise-linear zero set of grid values F.

    Nodes are cells with a sign change among their corners; two cells are
    joined when their shared edge carries a sign change. Returns the number
    of components, the flat indices of the mixed cells and their labels.
    """
    s = F > 0
    ny, nx = F.shape
    c00, c01, c10, c11 = s[:-1, :-1], s[:-1, 1:], s[1:, :-1], s[1:, 1:]
    mixed = ~((c00 == c01) & (c00 == c10) & (c00 == c11))
    cell_id = -np.ones(mixed.shape, dtype=np.int64)
    idx = np.flatnonzero(mixed)
    cell_id.flat[idx] = np.arange(len(idx))
    rows, cols = [], []
    # horizontal neighbours share the vertical edge between (i, j+1) and (i+1, j+1)
    vedge = s[:-1, 1:-1] != s[1:, 1:-1]
    a, b = cell_id[:, :-1], cell_id[:, 1:]
    m = vedge & (a >= 0) & (b >= 0)
    rows.append(a[m]); cols.append(b[m])
    hedge = s[1:-1, :-1] != s[1:-1, 1:]
    a, b = cell_id[:-1, :], cell_id[1:, :]
    m = hedge & (a >= 0) & (b >= 0)
    rows.append(a[m]); cols.append(b[m])
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    if len(idx) == 0:
        return 0, idx, np.zeros(0, dtype=int)
    A = coo_matrix((np.ones(len(r)), (r, c)), shape=(len(idx), len(idx)))
    nc, labels = connected_components(A, directed=False)
    return int(nc), idx, labels


def components_in_disk(F: np.ndarray, inside_cell: np.ndarray) -> Tuple[int, int]:
    """(components entirely inside, components touching the outside)."""
    nc, idx, labels = grid_components(F)
    if nc == 0:
        return 0, 0
    ins = inside_cell.flat[idx]
    all_in = np.ones(nc, dtype=bool)
    np.logical_and.at(all_in, labels, ins)
    return int(all_in.sum()), int(nc - all_in.sum())


# stability under small perturbations

def _disk_grid(R: float, N: int):
    ax = np.linspace(-R, R, N)
    U, V = np.meshgrid(ax, ax, indexing="ij")
    pts = np.stack([U.ravel(), V.ravel()], 1)
    inside_v = (U ** 2 + V ** 2 < R * R)
    inside_c = inside_v[:-1, :-1] & inside_v[:-1, 1:] & inside_v[1:, :-1] & inside_v[1:, 1:]
    return pts, inside_v, inside_c


def random_perturbation(n: int, k: int, rng: np.random.Generator, max_degree: int = 3) -> PolyMap:
    comps = []
    for _ in range(k):
        t = {}
        for d in range(max_degree + 1):
            for e in homogeneous_exponents(n, d):
                t[tuple(e)] = rng.standard_normal()
        comps.append(MultiPoly(n, t))
    return PolyMap(tuple(comps))


def scale_perturbation(g: PolyMap, pts: np.ndarray, delta: float, eps: float,
                       factor: float = 0.9) -> Tuple[PolyMap, float]:
    """Rescale g so that its grid sup is factor*delta or its grid derivative norm factor*eps."""
    vals = np.stack([_eval(c, pts) for c in g.components], 1)
    sup_g = float(np.max(np.linalg.norm(vals, axis=1)))
    n = g.nvars
    J = np.stack([np.stack([_eval(c.derivative(j), pts) for j in range(n)], 1)
                  for c in g.components], 1)
    sup_dg = float(np.max(np.linalg.norm(J, ord=2, axis=(1, 2))))
    c = factor * min(delta / sup_g, eps / sup_dg)
    return PolyMap(tuple(comp.scale(c) for comp in g.components)), c


def count_pair_components(pair: RegularPair, g: Optional[PolyMap] = None, N: int = 257) -> int:
    """Components of {P + g = 0} inside U for a planar hypersurface pair (n = 2, k = 1)."""
    if pair.n != 2 or pair.k != 1:
        raise ValueError("grid component counting is implemented for n = 2, k = 1")
    pts, inside_v, inside_c = _disk_grid(pair.radius, N)
    f = _eval(pair.P.components[0], pts)
    if g is not None:
        f = f + _eval(g.components[0], pts)
    inner, touching = components_in_disk(f.reshape(N, N), inside_c)
    return inner


def stability_trial(pair: RegularPair, cert: TransversalityCert, g: Optional[PolyMap],
                    seed: int = 0, N: int = 257) -> bool:
    """Whether {P + g = 0} in U has as many components as {P = 0}."""
    base = count_pair_components(pair, None, N)
    if g is None:
        return True
    return count_pair_components(pair, g, N) == base


def stability_experiment(n_trials: int, seed: int, delta: float = 0.75, eps: float = 1.0,
                         factor: float = 0.9, N: int = 257) -> List[dict]:
    pair = builtin_sphere_pair(2, 1)
    cert = certify(pair, delta, eps)
    pts, _, _ = _disk_grid(pair.radius, N)
    pts_in = pts[np.sum(pts ** 2, 1) < pair.radius ** 2]
    rows = []
    for t in range(n_trials):
        rng = rng_for(seed, t)
        g, c = scale_perturbation(random_perturbation(2, 1, rng), pts_in, delta, eps, factor)
        ok = stability_trial(pair, cert, g, seed, N)
        rows.append({"trial": t, "seed": seed, "scale": c, "preserved": ok})
    return rows


# presence of a small oval in a shrinking ball

GRID_PER_UNIT = 32


def barrier_hits(d: int, radii: Sequence[float], n_trials: int, seed: int) -> np.ndarray:
    """hits[t, j] = 1 if the Kostlan plane curve of trial t has a closed oval
    entirely inside the ball of rescaled radius radii[j] around [1:0:0].

    Rescaled radius R corresponds to affine radius sqrt(pi) R / sqrt(d). All
    radii share one grid of spacing 1/GRID_PER_UNIT rescaled units, so hits
    are monotone in R for every trial.
    """
    Rmax = max(radii)
    if d < 4 * Rmax * Rmax:
        raise ValueError(f"need d >= 4 R^2, got d={d}, R={Rmax}")
    N = int(2 * Rmax * GRID_PER_UNIT) + 1
    ax = np.linspace(-Rmax, Rmax, N)
    scale = math.sqrt(math.pi / d)
    U, V = np.meshgrid(ax, ax, indexing="ij")
    rr = U ** 2 + V ** 2
    E = homogeneous_exponents(3, d)
    w = kostlan_weights(3, d)
    # coefficient matrix C[j, l] of u^j v^l in the chart x0 = 1
    pu = (ax * scale)[:, None] ** np.arange(d + 1)[None, :]
    insides = []
    for R in radii:
        iv = rr < R * R
        insides.append(iv[:-1, :-1] & iv[:-1, 1:] & iv[1:, :-1] & iv[1:, 1:])
    hits = np.zeros((n_trials, len(radii)), dtype=int)
    for t in range(n_trials):
        rng = rng_for(seed, t)
        a = rng.standard_normal(len(w)) * math.sqrt(0.5) * w
        C = np.zeros((d + 1, d + 1))
        C[E[:, 1], E[:, 2]] = a
        F = pu @ C @ pu.T
        nc, idx, labels = grid_components(F)
        if nc == 0:
            continue
        for j, ins in enumerate(insides):
            all_in = np.ones(nc, dtype=bool)
            np.logical_and.at(all_in, labels, ins.flat[idx])
            hits[t, j] = int(all_in.any())
    return hits


def barrier_probability_mc(d: int, R: float, n_trials: int, seed: int) -> MomentEstimate:
    hits = barrier_hits(d, [R], n_trials, seed)[:, 0]
    return MomentEstimate.from_samples(f"barrier(d={d},R={R})", hits.astype(float), seed)
