"""Euler characteristics of complete intersections in CP^n by truncated power series.

Series are lists of Python ints (or Fractions) indexed by the power of the
hyperplane class t; everything is exact.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import List, Sequence


class FormalSeries:
    """Power series in one variable, truncated after ``order``."""

    def __init__(self, coeffs: Sequence, order: int):
        c = list(coeffs)[: order + 1]
        c += [0] * (order + 1 - len(c))
        self.coeffs = c
        self.order = order

    def __add__(self, other: "FormalSeries") -> "FormalSeries":
        N = min(self.order, other.order)
        return FormalSeries([a + b for a, b in zip(self.coeffs, other.coeffs)], N)

    def __mul__(self, other: "FormalSeries") -> "FormalSeries":
        N = min(self.order, other.order)
        out = [0] * (N + 1)
        for i, a in enumerate(self.coeffs[: N + 1]):
            if a == 0:
                continue
            for j in range(N + 1 - i):
                out[i + j] += a * other.coeffs[j]
        return FormalSeries(out, N)

    def inverse(self) -> "FormalSeries":
        c0 = self.coeffs[0]
        if c0 == 0:
            raise ZeroDivisionError("series with zero constant term has no inverse")
        # keep integer series integral when the constant term is a unit
        inv = [c0] if c0 in (1, -1) else [Fraction(1) / c0]
        for m in range(1, self.order + 1):
            s = sum(self.coeffs[j] * inv[m - j] for j in range(1, m + 1))
            inv.append(-s * inv[0])
        return FormalSeries(inv, self.order)

    def __getitem__(self, i: int):
        return self.coeffs[i]

    @classmethod
    def binomial_power(cls, a: int, c: int, order: int) -> "FormalSeries":
        """(1 + a t)^c for integer c of either sign."""
        if c >= 0:
            return cls([math.comb(c, j) * a ** j for j in range(order + 1)], order)
        k = -c
        # (1 + a t)^(-k) = sum_j (-1)^j C(k-1+j, j) a^j t^j
        return cls([(-1) ** j * math.comb(k - 1 + j, j) * a ** j for j in range(order + 1)],
                   order)


def euler_char(n: int, k: int, d: int) -> int:
    """Euler characteristic of a smooth intersection of k degree-d hypersurfaces in CP^n."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got n={n}, k={k}")
    N = n - k
    total_X = FormalSeries.binomial_power(1, n + 1, N)
    normal_inv = FormalSeries.binomial_power(d, -k, N)
    return d ** k * (total_X * normal_inv)[N]


def _lagrange_leading(xs: Sequence[int], ys: Sequence[int]) -> Fraction:
    """Leading (degree len(xs)-1) coefficient of the interpolating polynomial."""
    lead = Fraction(0)
    for i, xi in enumerate(xs):
        den = 1
        for j, xj in enumerate(xs):
            if j != i:
                den *= xi - xj
        lead += Fraction(ys[i], den)
    return lead


def euler_char_poly(n: int, k: int) -> List[Fraction]:
    """Coefficients (constant term first) of euler_char(n, k, d) as a polynomial in d."""
    xs = list(range(1, n + 2))
    ys = [euler_char(n, k, d) for d in xs]
    # Newton divided differences, then expand
    coef = [Fraction(y) for y in ys]
    m = len(xs)
    for j in range(1, m):
        for i in range(m - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    poly = [Fraction(0)] * m
    for i in range(m - 1, -1, -1):
        # poly = poly * (d - xs[i]) + coef[i]
        new = [Fraction(0)] * m
        for p, c in enumerate(poly):
            if c:
                if p + 1 < m:
                    new[p + 1] += c
                new[p] -= c * xs[i]
        new[0] += coef[i]
        poly = new
    return poly


def leading_coefficient(n: int, k: int) -> int:
    """Coefficient of d^n in euler_char(n, k, d).

    Interpolates over d = 1..n+2 (one more node than the degree needs) and
    checks that the extra node agrees.
    """
    xs = list(range(1, n + 3))
    ys = [euler_char(n, k, d) for d in xs]
    poly = euler_char_poly(n, k)
    extra = sum(c * xs[-1] ** p for p, c in enumerate(poly))
    if extra != ys[-1]:
        raise ArithmeticError("euler_char is not a polynomial of degree n in d")
    lead = poly[n]
    if lead.denominator != 1:
        raise ArithmeticError(f"non-integer leading coefficient {lead}")
    return int(lead)


def expected_leading(n: int, k: int) -> int:
    return (-1) ** (n - k) * math.comb(n - 1, k - 1)
