"""Sparse real multivariate polynomials.

Coefficients are floats keyed by exponent tuples. Iteration follows the
graded lexicographic order so that sums are reproducible.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

Exps = Tuple[int, ...]

_DROP = 1e-300


def _grlex_key(e: Exps):
    return (sum(e), e)


@dataclass(frozen=True)
class MultiPoly:
    """Immutable sparse polynomial in ``nvars`` variables."""

    nvars: int
    terms: Mapping[Exps, float]
    homogeneous_degree: Optional[int] = None

    def __post_init__(self):
        if self.nvars < 0:
            raise ValueError("nvars must be non-negative")
        clean: Dict[Exps, float] = {}
        for e, c in self.terms.items():
            e = tuple(int(v) for v in e)
            if len(e) != self.nvars:
                raise ValueError(f"exponent {e} has length {len(e)}, expected {self.nvars}")
            if any(v < 0 for v in e):
                raise ValueError(f"negative exponent in {e}")
            c = float(c)
            if abs(c) < _DROP:
                continue
            clean[e] = clean.get(e, 0.0) + c
        clean = {e: c for e, c in clean.items() if abs(c) >= _DROP}
        ordered = dict(sorted(clean.items(), key=lambda kv: _grlex_key(kv[0])))
        if self.homogeneous_degree is not None:
            for e in ordered:
                if sum(e) != self.homogeneous_degree:
                    raise ValueError(
                        f"term {e} has degree {sum(e)}, expected {self.homogeneous_degree}")
        object.__setattr__(self, "terms", ordered)

    # construction helpers
    @classmethod
    def constant(cls, nvars: int, c: float) -> "MultiPoly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, nvars: int, j: int, c: float = 1.0) -> "MultiPoly":
        e = [0] * nvars
        e[j] = 1
        return cls(nvars, {tuple(e): c})

    @property
    def degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self.terms}) <= 1

    def with_degree(self, d: Optional[int]) -> "MultiPoly":
        return MultiPoly(self.nvars, self.terms, d)

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        if isinstance(other, (int, float)):
            other = MultiPoly.constant(self.nvars, other)
        _check_nvars(self, other)
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t.get(e, 0.0) + c
        return MultiPoly(self.nvars, t)

    __radd__ = __add__

    def __neg__(self) -> "MultiPoly":
        return self.scale(-1.0)

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        if isinstance(other, (int, float)):
            other = MultiPoly.constant(self.nvars, other)
        return self + (-other)

    def __mul__(self, other) -> "MultiPoly":
        if isinstance(other, (int, float)):
            return self.scale(other)
        _check_nvars(self, other)
        t: Dict[Exps, float] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                t[e] = t.get(e, 0.0) + c1 * c2
        return MultiPoly(self.nvars, t)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "MultiPoly":
        out = MultiPoly.constant(self.nvars, 1.0)
        for _ in range(k):
            out = out * self
        return out

    def scale(self, c: float) -> "MultiPoly":
        return MultiPoly(self.nvars, {e: c * v for e, v in self.terms.items()},
                         self.homogeneous_degree)

    def derivative(self, j: int) -> "MultiPoly":
        t: Dict[Exps, float] = {}
        for e, c in self.terms.items():
            if e[j] == 0:
                continue
            e2 = list(e)
            e2[j] -= 1
            t[tuple(e2)] = c * e[j]
        return MultiPoly(self.nvars, t)

    def exponent_array(self) -> Tuple[np.ndarray, np.ndarray]:
        """Exponents as an (n_terms, nvars) int array and coefficients as a vector."""
        if not self.terms:
            return np.zeros((0, self.nvars), dtype=int), np.zeros(0)
        E = np.array(list(self.terms.keys()), dtype=int).reshape(-1, self.nvars)
        C = np.array(list(self.terms.values()), dtype=float)
        return E, C

    def to_json(self) -> List[dict]:
        return [{"exps": list(e), "coef": c} for e, c in self.terms.items()]

    @classmethod
    def from_json(cls, data: Sequence[Mapping], nvars: Optional[int] = None) -> "MultiPoly":
        if isinstance(data, str):
            data = json.loads(data)
        if nvars is None:
            if not data:
                raise ValueError("cannot infer nvars from an empty literal")
            nvars = len(data[0]["exps"])
        t: Dict[Exps, float] = {}
        for item in data:
            e = tuple(item["exps"])
            t[e] = t.get(e, 0.0) + float(item["coef"])
        return cls(nvars, t)


def _check_nvars(p: MultiPoly, q: MultiPoly) -> None:
    if p.nvars != q.nvars:
        raise ValueError(f"nvars mismatch: {p.nvars} vs {q.nvars}")


@dataclass(frozen=True)
class PolyMap:
    """Ordered tuple of polynomials sharing the same variables."""

    components: Tuple[MultiPoly, ...]
    k: int = field(default=0)

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValueError("a PolyMap needs at least one component")
        nv = comps[0].nvars
        for c in comps:
            if c.nvars != nv:
                raise ValueError("components must share nvars")
        degs = {c.homogeneous_degree for c in comps if c.homogeneous_degree is not None}
        if len(degs) > 1:
            raise ValueError("components disagree on homogeneous_degree")
        object.__setattr__(self, "components", comps)
        if self.k not in (0, len(comps)):
            raise ValueError("k must equal the number of components")
        object.__setattr__(self, "k", len(comps))
        limit = nv - 1 if degs else nv
        if self.k > limit:
            raise ValueError(f"k={self.k} too large for {nv} variables")

    @property
    def nvars(self) -> int:
        return self.components[0].nvars

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def __len__(self):
        return self.k

    def to_json(self) -> List[List[dict]]:
        return [c.to_json() for c in self.components]

    @classmethod
    def from_json(cls, data) -> "PolyMap":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(tuple(MultiPoly.from_json(c) for c in data))


@dataclass(frozen=True)
class JacobianValue:
    matrix: np.ndarray
    point: np.ndarray


def _as_point(p_nvars: int, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != p_nvars:
        raise ValueError(f"point has shape {x.shape}, expected ({p_nvars},)")
    return x


def evaluate(p: MultiPoly, x) -> float:
    """Evaluate ``p`` at ``x`` as a plain sum of term values."""
    x = _as_point(p.nvars, x)
    total = 0.0
    for e, c in p.terms.items():
        v = c
        for xi, k in zip(x, e):
            if k:
                v *= xi ** k
        total += v
    return float(total)


def evaluate_many(p: MultiPoly, X) -> np.ndarray:
    """Vectorised evaluation on the rows of ``X`` (shape (m, nvars))."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != p.nvars:
        raise ValueError(f"points have shape {X.shape}, expected (m, {p.nvars})")
    E, C = p.exponent_array()
    if len(C) == 0:
        return np.zeros(X.shape[0])
    out = np.zeros(X.shape[0])
    for e, c in zip(E, C):
        v = np.full(X.shape[0], c)
        for j in np.nonzero(e)[0]:
            v = v * X[:, j] ** e[j]
        out += v
    return out


def jacobian(P: PolyMap, x) -> JacobianValue:
    """Exact partial derivatives, one row per component."""
    x = _as_point(P.nvars, x)
    J = np.zeros((P.k, P.nvars))
    for i, comp in enumerate(P.components):
        for e, c in comp.terms.items():
            for j in range(P.nvars):
                if e[j] == 0:
                    continue
                v = c * e[j]
                for l, (xl, kl) in enumerate(zip(x, e)):
                    kk = kl - 1 if l == j else kl
                    if kk:
                        v *= xl ** kk
                J[i, j] += v
    return JacobianValue(J, x.copy())


def bargmann_fock_norm_sq(P) -> float:
    """Squared L2 norm for the Gaussian weight exp(-pi |x|^2).

    Each monomial x^I has squared norm prod(I!) / pi^|I| and distinct monomials
    are orthogonal. A PolyMap contributes the sum over its components.
    """
    comps = P.components if isinstance(P, PolyMap) else (P,)
    logpi = math.log(math.pi)
    total = 0.0
    for comp in comps:
        for e, c in comp.terms.items():
            lw = sum(math.lgamma(k + 1) for k in e) - sum(e) * logpi
            total += c * c * math.exp(lw)
    return total


def dehomogenize(p: MultiPoly, chart: int) -> MultiPoly:
    """Set the variable ``chart`` to 1 and drop it."""
    if not 0 <= chart < p.nvars:
        raise ValueError(f"chart {chart} out of range for {p.nvars} variables")
    if p.homogeneous_degree is None and not p.is_homogeneous():
        raise ValueError("dehomogenize needs a homogeneous polynomial")
    t: Dict[Exps, float] = {}
    for e, c in p.terms.items():
        e2 = e[:chart] + e[chart + 1:]
        t[e2] = t.get(e2, 0.0) + c
    return MultiPoly(p.nvars - 1, t)


def dehomogenize_map(P: PolyMap, chart: int) -> PolyMap:
    return PolyMap(tuple(dehomogenize(c, chart) for c in P.components))


def poly_from_dict(nvars: int, terms: Iterable[Tuple[Sequence[int], float]]) -> MultiPoly:
    t: Dict[Exps, float] = {}
    for e, c in terms:
        t[tuple(e)] = t.get(tuple(e), 0.0) + c
    return MultiPoly(nvars, t)


def sum_of_squares(nvars: int, idx: Iterable[int]) -> MultiPoly:
    """The polynomial sum_{j in idx} x_j^2."""
    t = {}
    for j in idx:
        e = [0] * nvars
        e[j] = 2
        t[tuple(e)] = 1.0
    return MultiPoly(nvars, t)
