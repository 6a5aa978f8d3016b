"""Random matrix and random polynomial samplers with seeded Monte Carlo estimators.

Every random draw comes from ``rng_for(seed, *keys)``, a generator keyed by a
SeedSequence spawn key, so any chunk or trial can be regenerated on its own.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np

from .polycore import MultiPoly, PolyMap

SIGNATURE_TOL = 1e-10
CHUNK = 100_000


def rng_for(seed: int, *keys: int) -> np.random.Generator:
    """Generator for the stream identified by ``(seed, keys)``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.default_rng(ss)


@dataclass(frozen=True)
class MomentEstimate:
    target: str
    value: float
    std_error: float
    n_samples: int
    seed: int
    n_discarded: int = 0

    def to_json(self) -> str:
        d = asdict(self)
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_samples(cls, target: str, samples: np.ndarray, seed: int,
                     n_discarded: int = 0) -> "MomentEstimate":
        samples = np.asarray(samples, dtype=float)
        n = samples.size
        if n == 0:
            raise ValueError("no samples")
        mean = float(np.mean(samples))
        se = float(np.std(samples, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return cls(target, mean, se, n, int(seed), int(n_discarded))


def _chunks(n: int, size: int = CHUNK):
    start, c = 0, 0
    while start < n:
        yield c, min(size, n - start)
        start += size
        c += 1


# symmetric matrices

def sample_sym_batch(m: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` real symmetric m x m matrices, diagonal N(0,1), off-diagonal N(0,1/2)."""
    G = rng.standard_normal((count, m, m)) * math.sqrt(0.5)
    # (G + G^T)/sqrt(2) has off-diagonal variance 1/2 and diagonal variance 1
    return (G + np.swapaxes(G, 1, 2)) / math.sqrt(2.0)


def sample_sym(m: int, seed: int) -> np.ndarray:
    if m < 0:
        raise ValueError("m must be >= 0")
    if m == 0:
        return np.zeros((0, 0))
    return sample_sym_batch(m, 1, rng_for(seed))[0]


def signature(A: np.ndarray, tol: float = SIGNATURE_TOL) -> Tuple[int, int, bool]:
    """Return ``(n_positive, n_negative, near_singular)`` for a symmetric matrix."""
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 0, 0, False
    if not np.allclose(A, A.T):
        raise ValueError("matrix is not symmetric")
    lam = np.linalg.eigvalsh(A)
    flagged = bool(np.any(np.abs(lam) < tol))
    return int(np.sum(lam >= tol)), int(np.sum(lam <= -tol)), flagged


def _batch_signature(A: np.ndarray, tol: float = SIGNATURE_TOL):
    lam = np.linalg.eigvalsh(A)
    pos = np.sum(lam >= tol, axis=1)
    flagged = np.any(np.abs(lam) < tol, axis=1)
    return pos, flagged, np.abs(np.prod(lam, axis=1))


def estimate_e_R(i: int, j: int, n_samples: int, seed: int) -> MomentEstimate:
    """Mean of |det A| restricted to signature (i, j), A from ``sample_sym``."""
    if n_samples <= 0:
        raise ValueError("n_samples must be positive")
    if i < 0 or j < 0:
        raise ValueError("signature entries must be non-negative")
    m = i + j
    target = f"e_R({i},{j})"
    if m == 0:
        return MomentEstimate(target, 1.0, 0.0, n_samples, seed)
    parts, discarded = [], 0
    for c, size in _chunks(n_samples):
        A = sample_sym_batch(m, size, rng_for(seed, c))
        pos, flagged, absdet = _batch_signature(A)
        keep = ~flagged
        discarded += int(np.sum(flagged))
        parts.append(np.where(pos[keep] == i, absdet[keep], 0.0))
    return MomentEstimate.from_samples(target, np.concatenate(parts), seed, discarded)


def estimate_abs_det_sym(m: int, n_samples: int, seed: int) -> MomentEstimate:
    """Unrestricted E|det A| over ``sample_sym(m)``."""
    if m == 0:
        return MomentEstimate("E|det|sym(0)", 1.0, 0.0, n_samples, seed)
    parts = []
    for c, size in _chunks(n_samples):
        A = sample_sym_batch(m, size, rng_for(seed, c))
        parts.append(np.abs(np.linalg.det(A)))
    return MomentEstimate.from_samples(f"E|det|sym({m})", np.concatenate(parts), seed)


def mehta_mc(m: int, p: float, n_samples: int, seed: int) -> MomentEstimate:
    """Mean of |det A|^p for iid N(0, 1/2) square matrices."""
    if m < 0 or p < 0:
        raise ValueError("need m >= 0 and p >= 0")
    target = f"mehta({m},{p})"
    if m == 0:
        return MomentEstimate(target, 1.0, 0.0, n_samples, seed)
    parts = []
    for c, size in _chunks(n_samples):
        A = rng_for(seed, c).standard_normal((size, m, m)) * math.sqrt(0.5)
        parts.append(np.abs(np.linalg.det(A)) ** p)
    return MomentEstimate.from_samples(target, np.concatenate(parts), seed)


def sample_complex_sym_batch(m: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Complex symmetric matrices with E|a_ii|^2 = 2 and E|a_ij|^2 = 1."""
    re = rng.standard_normal((count, m, m))
    im = rng.standard_normal((count, m, m))
    G = (re + 1j * im) * math.sqrt(0.5)
    S = (G + np.swapaxes(G, 1, 2)) / math.sqrt(2.0)
    # diagonal of S now has E|a|^2 = 2, off-diagonal E|a|^2 = 1
    return S


def estimate_e_C(m: int, n_samples: int, seed: int) -> MomentEstimate:
    target = f"e_C({m})"
    if m == 0:
        return MomentEstimate(target, 1.0, 0.0, n_samples, seed)
    parts = []
    for c, size in _chunks(n_samples):
        A = sample_complex_sym_batch(m, size, rng_for(seed, c))
        parts.append(np.abs(np.linalg.det(A)) ** 2)
    return MomentEstimate.from_samples(target, np.concatenate(parts), seed)


# Kostlan ensemble

@lru_cache(maxsize=64)
def homogeneous_exponents(nvars: int, d: int) -> np.ndarray:
    """All exponent vectors of total degree d in ``nvars`` variables, lexicographic."""
    out: List[Tuple[int, ...]] = []

    def rec(prefix, left, slots):
        if slots == 1:
            out.append(prefix + (left,))
            return
        for a in range(left + 1):
            rec(prefix + (a,), left - a, slots - 1)

    rec((), d, nvars)
    arr = np.array(out, dtype=int).reshape(-1, nvars)
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=64)
def kostlan_weights(nvars: int, d: int) -> np.ndarray:
    """sqrt of the multinomial coefficients d!/(i_0! ... i_n!)."""
    E = homogeneous_exponents(nvars, d)
    lg = math.lgamma(d + 1) - np.sum(np.vectorize(math.lgamma)(E + 1.0), axis=1)
    w = np.exp(0.5 * lg)
    w.setflags(write=False)
    return w


@dataclass
class KostlanSample:
    """A random homogeneous PolyMap stored as dense coefficient arrays.

    ``coefs[c, t]`` is the coefficient of ``exps[t]`` in component ``c``.
    """

    n: int
    d: int
    k: int
    exps: np.ndarray
    coefs: np.ndarray
    seed: Optional[int] = None
    _polymap: Optional[PolyMap] = field(default=None, repr=False)

    @property
    def polymap(self) -> PolyMap:
        if self._polymap is None:
            comps = tuple(
                MultiPoly(self.n + 1, {tuple(e): c for e, c in zip(self.exps, row)}, self.d)
                for row in self.coefs)
            self._polymap = PolyMap(comps)
        return self._polymap

    def scaled(self, c: float) -> "KostlanSample":
        return KostlanSample(self.n, self.d, self.k, self.exps, self.coefs * c, self.seed)


def sample_kostlan_rng(n: int, d: int, k: int, rng: np.random.Generator) -> KostlanSample:
    if n < 1 or d < 1 or not 1 <= k <= n:
        raise ValueError(f"invalid Kostlan parameters n={n}, d={d}, k={k}")
    E = homogeneous_exponents(n + 1, d)
    w = kostlan_weights(n + 1, d)
    a = rng.standard_normal((k, len(w))) * math.sqrt(0.5)
    return KostlanSample(n, d, k, E, a * w)


def sample_kostlan(n: int, d: int, k: int, seed: int) -> KostlanSample:
    s = sample_kostlan_rng(n, d, k, rng_for(seed))
    s.seed = seed
    return s


def sup_norm_ball_grid(n: int, radius: float, per_axis: int = 32) -> np.ndarray:
    """Grid points of the cube [-radius, radius]^n that lie in the ball, plus the centre."""
    ax = np.linspace(-radius, radius, per_axis)
    mesh = np.stack(np.meshgrid(*([ax] * n), indexing="ij"), axis=-1).reshape(-1, n)
    mesh = mesh[np.sum(mesh ** 2, axis=1) <= radius ** 2 * (1 + 1e-12)]
    return np.vstack([np.zeros((1, n)), mesh])


def chart_monomials(exps: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Monomials of the chart x_0 = 1 evaluated at affine points, shape (n_pts, n_terms)."""
    out = np.ones((pts.shape[0], exps.shape[0]))
    for j in range(1, exps.shape[1]):
        out *= pts[:, j - 1:j] ** exps[None, :, j]
    return out


def mc_sup_norm_check(n: int, k: int, d: int, R: float, n_samples: int, seed: int,
                      per_axis: int = 32) -> MomentEstimate:
    """Estimate E(sup_{B(x, R/sqrt d)} |sigma|^2) / d^n at x = [1:0:...:0].

    The section is trivialised by the frame x_0^d, which is unit length at x,
    and rescaled by sqrt(2 N_d) so that it is the unit-variance Gaussian in an
    orthonormal basis for the normalised L2 product (N_d = dim of degree-d
    forms). The ball radius R/sqrt d is measured in coordinates where the
    metric potential is pi |y|^2 at x, i.e. affine radius sqrt(pi) R / sqrt d.
    """
    if d < 4 * R * R:
        raise ValueError(f"need d >= 4 R^2, got d={d}, R={R}")
    radius = math.sqrt(math.pi) * R / math.sqrt(d)
    pts = sup_norm_ball_grid(n, radius, per_axis)
    E = homogeneous_exponents(n + 1, d)
    M = chart_monomials(E, pts)
    N_d = math.comb(d + n, n)
    scale = 2.0 * N_d / d ** n
    vals = np.empty(n_samples)
    for c, size in _chunks(n_samples, 500):
        rng = rng_for(seed, c)
        w = kostlan_weights(n + 1, d)
        a = rng.standard_normal((size, k, len(w))) * math.sqrt(0.5) * w
        f = np.einsum("pt,skt->spk", M, a)
        vals[c * 500:c * 500 + size] = np.max(np.sum(f ** 2, axis=2), axis=1) * scale
    return MomentEstimate.from_samples(f"sup_norm(n={n},k={k},d={d},R={R})", vals, seed)
