import json
import math
import pathlib

import numpy as np
import pytest
import scipy.ndimage

from artifact import regpairs as RP
from artifact.polycore import MultiPoly, PolyMap, bargmann_fock_norm_sq, evaluate_many

ORACLE = json.loads((pathlib.Path(__file__).parent / "oracles" / "values.json").read_text())


def test_sphere_pair_certifies_target_values():
    for n, k in ((1, 1), (2, 1), (2, 2), (3, 2)):
        c = RP.certify(RP.builtin_sphere_pair(n, k), 0.75, 1.0)
        assert c.certified, c.failure
        assert c.boundary_margin > 0 and c.interior_margin >= 0


def test_product_pair_certifies_target_values():
    for n, k, i in ((1, 1, 0), (2, 1, 0), (2, 1, 1), (2, 2, 0)):
        c = RP.certify(RP.builtin_product_pair(n, k, i), 0.45, 1.0)
        assert c.certified, c.failure


def test_degenerate_zero_fails_interior_condition():
    pair = RP.RegularPair(2.0, PolyMap((MultiPoly.variable(1, 0) ** 2,)), name="x^2")
    c = RP.certify(pair, 1.0, 1.0)
    assert not c.certified
    assert "interior" in c.failure
    assert c.where is not None and abs(c.where[0]) < 1.0


def test_boundary_condition_failure_reported():
    # |x| < 1.9 everywhere near the boundary of B(2), so delta = 2 fails condition 1
    pair = RP.RegularPair(2.0, PolyMap((MultiPoly.variable(1, 0),)), name="x")
    c = RP.certify(pair, 2.5, 0.5)
    assert not c.certified
    assert "boundary" in c.failure


def test_sphere_tight_level_needs_aligned_grid():
    # |x| = 1/2 is where |P| = 3/4 exactly: the certificate is exact only on aligned grids
    pair = RP.builtin_sphere_pair(2, 1)
    assert RP.certify(pair, 0.75, 1.0, h=2.0 / 256).certified
    assert not RP.certify(pair, 0.75, 1.0, h=2.0 / 250).certified
    assert RP.certify(pair, 0.7, 1.0, h=2.0 / 250).certified


def test_smaller_pair_certifies_when_larger_does():
    pair = RP.builtin_sphere_pair(2, 1)
    assert RP.certify(pair, 0.5, 0.5).certified


def test_certify_rejects_coarse_grid():
    with pytest.raises(ValueError):
        RP.certify(RP.builtin_sphere_pair(2, 1), 0.75, 1.0, h=0.5)


def test_sup_bound_dominates_grid_values():
    rng = np.random.default_rng(0)
    p = RP.random_perturbation(2, 1, rng).components[0]
    pts = rng.uniform(-1, 1, (2000, 2))
    pts = pts[np.sum(pts ** 2, 1) <= 1]
    assert np.max(np.abs(evaluate_many(p, pts))) <= RP.sup_bound(p, 1.0)


def test_interval_eval_encloses_samples():
    rng = np.random.default_rng(1)
    p = RP.random_perturbation(3, 1, rng).components[0]
    lo = np.array([[-0.3, 0.1, 0.5]])
    hi = np.array([[0.2, 0.4, 0.9]])
    L, H = RP.interval_eval(p, lo, hi)
    pts = rng.uniform(lo[0], hi[0], (5000, 3))
    v = evaluate_many(p, pts)
    assert L[0] <= v.min() and v.max() <= H[0]


def test_builtin_zero_sets():
    P = RP.builtin_sphere_pair(2, 1).P
    assert evaluate_many(P[0], np.array([[1.0, 0.0], [0.6, 0.8]])) == pytest.approx([0, 0])
    P = RP.builtin_sphere_pair(3, 2).P
    assert len(P) == 2
    assert evaluate_many(P[0], np.array([[0.0, 1.0, 0.0]]))[0] == 0
    assert evaluate_many(P[1], np.array([[5.0, 0.6, 0.8]]))[0] == pytest.approx(0)


def test_product_pair_norm_and_validity():
    with pytest.raises(ValueError):
        RP.builtin_product_pair(2, 1, 2)
    assert list(RP.valid_product_indices(2)) == [(1, 1, 0), (2, 1, 0), (2, 1, 1), (2, 2, 0)]
    pair = RP.builtin_product_pair(3, 1, 1)
    assert pair.R_UP == pytest.approx(math.sqrt(6))
    assert bargmann_fock_norm_sq(pair.P) > 1


def test_torus_pair_has_one_component():
    # n = 3, k = 1, i = 1: S^1 x S^1 in R^3; mixed grid cells with full connectivity
    pair = RP.builtin_product_pair(3, 1, 1)
    N = 97
    ax = np.linspace(-pair.radius, pair.radius, N)
    G = np.stack(np.meshgrid(ax, ax, ax, indexing="ij"), -1).reshape(-1, 3)
    F = evaluate_many(pair.P[0], G).reshape(N, N, N) > 0
    corners = [F[a:N - 1 + a, b:N - 1 + b, c:N - 1 + c] for a in (0, 1) for b in (0, 1) for c in (0, 1)]
    mixed = np.any(corners, axis=0) & ~np.all(corners, axis=0)
    _, nc = scipy.ndimage.label(mixed, structure=np.ones((3, 3, 3)))
    assert nc == 1


def test_planar_component_counts():
    assert RP.count_pair_components(RP.builtin_sphere_pair(2, 1)) == 1
    # S^0 x S^1: two circles
    assert RP.count_pair_components(RP.builtin_product_pair(2, 1, 0)) == 2
    with pytest.raises(ValueError):
        RP.count_pair_components(RP.builtin_sphere_pair(3, 1))


def test_grid_components_concentric_circles():
    ax = np.linspace(-3, 3, 241)
    U, V = np.meshgrid(ax, ax, indexing="ij")
    r = np.hypot(U, V)
    nc, _, _ = RP.grid_components((r - 1) * (r - 2))
    assert nc == 2
    assert RP.grid_components(np.ones((5, 5)))[0] == 0


@pytest.mark.parametrize("key", sorted(ORACLE["log_rho_R"]))
def test_rho_R_against_oracle(key):
    R, n = key.split(",")
    # keys store R to six digits
    R = min((1.0, 2.0, math.sqrt(6)), key=lambda r: abs(r - float(R)))
    n = int(n)
    v = RP.rho_R(R, n)
    assert v == pytest.approx(ORACLE["log_rho_R"][key], abs=1e-8)
    assert math.pi * R * R <= v <= n * math.log(4) + 4 * math.pi * R * R


def test_rho_R_dense_scan():
    s = np.arange(1e-4, 5, 1e-4)
    g = np.array([RP.log_g_R(x, 1.0, 1) for x in s])
    j = int(np.argmin(g))
    assert 0 < j < len(s) - 1
    assert RP.rho_R(1.0, 1) <= g[j] + 1e-12
    assert RP.rho_R(1.0, 1) == pytest.approx(g[j], abs=1e-6)


def test_rho_R_errors():
    with pytest.raises(ValueError):
        RP.rho_R(0.0, 1)


def test_tau_monotone_in_certs_and_bounded():
    pair = RP.builtin_sphere_pair(2, 1)
    good = RP.certify(pair, 0.75, 1.0)
    worse = RP.certify(pair, 0.5, 0.5)
    assert RP.tau(pair, [good, worse]) == RP.tau(pair, [good])
    assert RP.tau(pair, [worse]) >= RP.tau(pair, [good])
    assert RP.tau(pair, [good]) <= 53 + 5 * 2
    with pytest.raises(ValueError):
        RP.tau(pair, [])


def test_log_m_tau_at_zero():
    assert RP.log_m_tau(-math.inf) == pytest.approx(math.log(0.5))
    # f_tau loses O(tau^(1/3)) near the optimum a ~ tau^(1/3)
    assert RP.log_m_tau(math.log(1e-12)) == pytest.approx(math.log(0.5), abs=1e-3)
    assert RP.log_m_tau(math.log(1e-12)) < math.log(0.5)


@pytest.mark.parametrize("t", ["1", "10", "29"])
def test_log_m_tau_exact_regime_against_oracle(t):
    assert RP.log_m_tau(math.log(float(t))) == pytest.approx(ORACLE["log_m_tau"][t], abs=1e-9)


@pytest.mark.parametrize("t", ["31", "100"])
def test_log_m_tau_asymptotic_regime_against_oracle(t):
    # the tail approximation exp(-a^2)/(2a) overestimates the integral by a factor 1 + O(1/a^2)
    v = RP.log_m_tau(math.log(float(t)))
    ref = ORACLE["log_m_tau"][t]
    assert ref <= v <= ref + 1.0 / float(t)


def test_log_m_tau_decreasing_and_lower_bound():
    ts = np.linspace(0.1, 30, 60)
    vals = [RP.log_m_tau(math.log(t)) for t in ts]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    for t in (10, 30, 31, 1e3, 1e6, math.exp(60)):
        assert RP.log_m_tau(math.log(t)) >= -2 * t
    with pytest.raises(ValueError):
        RP.log_m_tau(math.nan)


def test_log_c_sigma_composition():
    pair = RP.builtin_sphere_pair(2, 1)
    certs = [RP.certify(pair, 0.75, 1.0)]
    pc = RP.pair_constants(pair, certs)
    assert pc.log_c_sigma_lower == pytest.approx(
        pc.log_m_tau - 2 * math.log(2) - RP.log_ball_volume(2, 2.0))
    assert pc.log_c_sigma_lower == pytest.approx(RP.log_c_sigma_lower(pair, certs))
    assert pc.log_c_sigma_lower >= -math.exp(54 + 5 * 2)
    assert RP.log_ball_volume(2, 1.0) == pytest.approx(math.log(math.pi))


def test_stability_zero_perturbation():
    pair = RP.builtin_sphere_pair(2, 1)
    assert RP.stability_trial(pair, RP.certify(pair, 0.75, 1.0), None)


def test_stability_small_run():
    rows = RP.stability_experiment(20, 3)
    assert all(r["preserved"] for r in rows)
    assert all(0 < r["scale"] for r in rows)


def test_scaled_perturbation_respects_caps():
    rng = np.random.default_rng(5)
    g = RP.random_perturbation(2, 1, rng)
    pts = rng.uniform(-1, 1, (500, 2))
    gs, c = RP.scale_perturbation(g, pts, 0.75, 1.0)
    assert np.max(np.abs(evaluate_many(gs[0], pts))) <= 0.9 * 0.75 + 1e-12


def test_barrier_monotone_in_radius():
    hits = RP.barrier_hits(64, [1.0, 2.0, 4.0], 100, 2)
    assert np.all(hits[:, 0] <= hits[:, 1]) and np.all(hits[:, 1] <= hits[:, 2])
    assert hits[:, 2].sum() > 0


def test_barrier_precondition_and_positivity():
    with pytest.raises(ValueError):
        RP.barrier_hits(10, [2.0], 1, 0)
    est = RP.barrier_probability_mc(50, 2.0, 200, 1)
    assert 0 < est.value < 1
