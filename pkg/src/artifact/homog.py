"""Dense-array homogeneous polynomials for fast batched evaluation."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .polycore import MultiPoly


@dataclass(frozen=True)
class HomPoly:
    """Polynomial stored as an exponent array and a coefficient vector.

    Coefficients may be real or complex. Homogeneity is not enforced here;
    ``degree`` is the maximal total degree.
    """

    exps: np.ndarray
    coefs: np.ndarray

    @property
    def nvars(self) -> int:
        return self.exps.shape[1]

    @property
    def degree(self) -> int:
        return int(self.exps.sum(axis=1).max()) if len(self.coefs) else 0

    @classmethod
    def from_multipoly(cls, p: MultiPoly) -> "HomPoly":
        E, C = p.exponent_array()
        return cls(E, C)

    def to_multipoly(self, homogeneous_degree: Optional[int] = None) -> MultiPoly:
        return MultiPoly(self.nvars, {tuple(e): float(c) for e, c in zip(self.exps, self.coefs)},
                         homogeneous_degree)

    def __call__(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        if self.nvars == 3 and X.shape[0] > 64:
            dense = _dense_ternary(self)
            if dense is not None:
                return _eval_ternary(dense, X)
        return monomials(self.exps, X) @ self.coefs

    def scale(self, c) -> "HomPoly":
        return HomPoly(self.exps, self.coefs * c)

    def derivative(self, j: int) -> "HomPoly":
        e = self.exps[:, j]
        keep = e > 0
        E = self.exps[keep].copy()
        E[:, j] -= 1
        C = self.coefs[keep] * e[keep]
        if len(C) == 0:
            E = np.zeros((1, self.nvars), dtype=int)
            C = np.zeros(1, dtype=self.coefs.dtype)
        return HomPoly(E, C)

    def gradient(self):
        return [self.derivative(j) for j in range(self.nvars)]

    def abs_coef_sum(self) -> float:
        return float(np.sum(np.abs(self.coefs)))


def monomials(exps: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Matrix of monomial values, shape (n_points, n_terms)."""
    X = np.asarray(X)
    deg = int(exps.max()) if exps.size else 0
    out = None
    for j in range(exps.shape[1]):
        pw = np.ones((X.shape[0], deg + 1), dtype=X.dtype)
        for a in range(1, deg + 1):
            pw[:, a] = pw[:, a - 1] * X[:, j]
        col = pw[:, exps[:, j]]
        out = col if out is None else out * col
    return out


def grad_eval(grads, X) -> np.ndarray:
    """Stack the values of a list of derivative polynomials, shape (n_points, nvars)."""
    return np.stack([g(X) for g in grads], axis=1)


def _dense_ternary(p: HomPoly):
    """Coefficient matrix C[j, k] of x0^(d-j-k) x1^j x2^k, or None if p is not homogeneous."""
    cached = getattr(p, "_dense", False)
    if cached is not False:
        return cached
    tot = p.exps.sum(axis=1)
    if len(tot) == 0 or np.any(tot != tot[0]):
        dense = None
    else:
        d = int(tot[0])
        C = np.zeros((d + 1, d + 1), dtype=p.coefs.dtype)
        np.add.at(C, (p.exps[:, 1], p.exps[:, 2]), p.coefs)
        dense = (d, C)
    object.__setattr__(p, "_dense", dense)
    return dense


def _eval_ternary(dense, X: np.ndarray) -> np.ndarray:
    d, C = dense
    n = X.shape[0]
    dt = np.result_type(X, C)
    P = [np.ones((n, d + 1), dtype=dt) for _ in range(3)]
    for j in range(3):
        for a in range(1, d + 1):
            P[j][:, a] = P[j][:, a - 1] * X[:, j]
    out = np.zeros(n, dtype=dt)
    for j in range(d + 1):
        m = d - j + 1
        inner = (P[2][:, :m] * P[0][:, m - 1::-1]) @ C[j, :m]
        out += P[1][:, j] * inner
    return out
