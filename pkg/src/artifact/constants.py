"""Closed-form Gamma-function constants for real and complex critical-point densities.

All products are accumulated as sums of ``math.lgamma`` values and
exponentiated at the end.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

_LOG_SQRT_PI = 0.5 * math.log(math.pi)


@dataclass(frozen=True)
class DensityConstant:
    n: int
    k: int
    i: int
    value: float
    formula_id: str


def log_vol_fs_rp(n: int) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    return _LOG_SQRT_PI - math.lgamma((n + 1) / 2)


def vol_fs_rp(n: int) -> float:
    """Fubini-Study volume of real projective n-space, sqrt(pi)/Gamma((n+1)/2)."""
    return math.exp(log_vol_fs_rp(n))


def _check_kn(k: int, n: int) -> None:
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")


def log_v_rescaled(km1: int, nm1: int) -> float:
    k, n = km1 + 1, nm1 + 1
    _check_kn(k, n)
    s = math.log(math.comb(n - 1, k - 1))
    s += sum(math.lgamma(1 + j / 2) for j in range(1, k))
    s -= sum(math.lgamma(1 + j / 2) for j in range(n - k + 1, n))
    return s


def v_rescaled(km1: int, nm1: int) -> float:
    """Grassmannian volume of (k-1)-planes in R^(n-1) divided by sqrt(pi)^((k-1)(n-k))."""
    return math.exp(log_v_rescaled(km1, nm1))


def vol_grassmann(km1: int, nm1: int) -> float:
    k, n = km1 + 1, nm1 + 1
    return math.exp(log_v_rescaled(km1, nm1) + (k - 1) * (n - k) * _LOG_SQRT_PI)


def log_mehta_closed(m: int, p: float) -> float:
    if m < 0 or p < 0:
        raise ValueError("need m >= 0 and p >= 0")
    return sum(math.lgamma((p + j) / 2) - math.lgamma(j / 2) for j in range(1, m + 1))


def mehta_closed(m: int, p: float) -> float:
    """E|det A|^p for an m x m matrix with iid N(0, 1/2) entries."""
    return math.exp(log_mehta_closed(m, p))


def crit_prefactor(n: int, k: int) -> float:
    """The part of the critical density that does not depend on the signature."""
    _check_kn(k, n)
    return math.exp(-math.lgamma(k / 2) + log_v_rescaled(k - 1, n - 1)
                    + log_mehta_closed(k - 1, n - k + 2))


def crit_density(n: int, k: int, i: int, e_R_value: float) -> DensityConstant:
    """Density of index-i critical points per unit volume, normalised by sqrt(d)^n."""
    _check_kn(k, n)
    if k == n:
        raise ValueError("k == n has no critical points; use zero_density_kn")
    if not 0 <= i <= n - k:
        raise ValueError(f"index i={i} outside [0, {n - k}]")
    if e_R_value < 0:
        raise ValueError("e_R_value must be non-negative")
    return DensityConstant(n, k, i, crit_prefactor(n, k) * e_R_value, "crit_density")


def zero_density_kn(n: int) -> float:
    """Expected number of zeros per unit volume (normalised by sqrt(d)^n) when k = n."""
    return math.exp(math.lgamma((n + 1) / 2) - _LOG_SQRT_PI)


def betti_upper_bound(n: int, k: int, i: int, e_R_value: float) -> float:
    """Asymptotic upper bound for E(b_i)/sqrt(d)^n on a complete intersection in RP^n."""
    _check_kn(k, n)
    if k == n:
        raise ValueError("need k < n")
    return math.comb(n - 1, k - 1) * e_R_value * vol_fs_rp(n) / vol_fs_rp(k)


def lefschetz_constant(n: int, k: int) -> int:
    """Limit of the normalised complex critical-point measure, in units of the volume form."""
    _check_kn(k, n)
    return math.comb(n - 1, k - 1)


def lefschetz_factor_chain(n: int, k: int) -> float:
    """Recompute C(n-1, k-1) from its Gamma-product factorisation.

    Multiplies half the volume of S^(2k-1), the complex Grassmannian volume,
    the complex determinant moment and e_C(n-k) = (n-k+1)!, divides by the
    power of pi, and finally converts from omega^n/n! to omega^n.
    """
    _check_kn(k, n)
    log_sphere = math.log(2) + k * math.log(math.pi) - math.lgamma(k)
    log_ec = math.lgamma(n - k + 2)
    log_EC = (sum(math.lgamma(j) for j in range(n - k + 3, n + 2))
              - sum(math.lgamma(j) for j in range(1, k)))
    log_gr = (sum(math.lgamma(j) for j in range(1, k))
              - sum(math.lgamma(j) for j in range(n - k + 1, n))
              + (k - 1) * (n - k) * math.log(math.pi))
    log_pi = ((n - k) * (k - 1) + k) * math.log(math.pi)
    total = (math.log(0.5) + log_sphere + log_gr + log_EC + log_ec - log_pi
             - math.lgamma(n + 1))
    return math.exp(total)


def grassmann_identity_residual(n: int, k: int) -> float:
    """V * E|det|^(n-k+2) minus (n-1)!/((n-k)! 2^(k-1))."""
    lhs = v_rescaled(k - 1, n - 1) * mehta_closed(k - 1, n - k + 2)
    rhs = math.factorial(n - 1) / (math.factorial(n - k) * 2 ** (k - 1))
    return lhs - rhs


def constants_table(n: int, k: int, e_R_values=None):
    """Rows of (name, value) for the ``constants`` CLI subcommand.

    ``e_R_values`` maps i to an e_R(i, n-k-i) estimate; indices without a
    value are skipped in the density rows.
    """
    _check_kn(k, n)
    rows = [
        ("vol_fs_rp_n", vol_fs_rp(n)),
        ("vol_fs_rp_k", vol_fs_rp(k)),
        ("v_rescaled", v_rescaled(k - 1, n - 1)),
        ("vol_grassmann", vol_grassmann(k - 1, n - 1)),
        ("mehta_closed", mehta_closed(k - 1, n - k + 2)),
        ("identity_residual", grassmann_identity_residual(n, k)),
        ("lefschetz_constant", float(lefschetz_constant(n, k))),
        ("lefschetz_factor_chain", lefschetz_factor_chain(n, k)),
    ]
    if k == n:
        rows.append(("zero_density", zero_density_kn(n)))
    else:
        for i, e in sorted((e_R_values or {}).items()):
            rows.append((f"crit_density_i{i}", crit_density(n, k, i, e).value))
            rows.append((f"betti_upper_bound_i{i}", betti_upper_bound(n, k, i, e)))
    return rows
