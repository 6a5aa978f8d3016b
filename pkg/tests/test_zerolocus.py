import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artifact import ensembles as E
from artifact import zerolocus as Z
from artifact.homog import HomPoly
from artifact.polycore import MultiPoly, PolyMap, poly_from_dict


def X(j, n=3):
    return MultiPoly.variable(n, j)


def circle(cx, cy, r):
    x0, x1, x2 = X(0), X(1), X(2)
    return ((x1 - x0 * cx) ** 2 + (x2 - x0 * cy) ** 2 - (x0 * r) ** 2).with_degree(2)


def test_univariate_examples():
    assert Z.count_real_roots_univariate(poly_from_dict(1, [((2,), 1.0), ((0,), 1.0)])).count == 0
    assert Z.count_real_roots_univariate(poly_from_dict(1, [((3,), 1.0), ((1,), -1.0)])).count == 3


def test_univariate_projective_root_at_infinity():
    # x_0 x_1^2 - x_0^3 in the chart x_0 = 1 is x^2 - 1; degree 3 adds the point at infinity
    rep = Z.count_real_roots_univariate(poly_from_dict(1, [((2,), 1.0), ((0,), -1.0)]),
                                        projective_degree=3)
    assert rep.count == 3


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=5, unique=True))
@settings(max_examples=40, deadline=None)
def test_sturm_counts_distinct_integer_roots(roots):
    p = MultiPoly.constant(1, 1.0)
    for r in roots:
        p = p * (MultiPoly.variable(1, 0) - float(r))
    assert Z.count_real_roots_univariate(p).count == len(roots)


def test_linear_system_has_one_zero():
    P = PolyMap((X(0).with_degree(1), X(1).with_degree(1)))
    rep = Z.count_projective_zeros(P)
    assert rep.count == 1
    pt = rep.points[0] / np.linalg.norm(rep.points[0])
    assert np.allclose(np.abs(pt), [0, 0, 1], atol=1e-9)


def test_random_lines_meet_once():
    for seed in range(20):
        assert Z.count_projective_zeros(E.sample_kostlan(2, 1, 2, seed)).count == 1


def test_conic_pair_count():
    # the circles x^2 + y^2 = 1 and (x - 1)^2 + y^2 = 1 meet in two real points
    P = PolyMap((circle(0, 0, 1), circle(1, 0, 1)))
    assert Z.count_projective_zeros(P).count == 2


def test_positive_dimensional_system_rejected():
    c = circle(0, 0, 1)
    with pytest.raises(Z.DegenerateSystem):
        Z.count_projective_zeros(PolyMap((c, c)))


def test_kostlan_binary_forms_match_sturm():
    # independent route: exact Sturm count on the chart polynomial
    for seed in range(30):
        s = E.sample_kostlan(1, 7, 1, seed)
        p = s.polymap[0]
        chart = MultiPoly(1, {(e[1],): c for e, c in p.terms.items()})
        assert Z.count_projective_zeros(s).count == Z.count_real_roots_univariate(chart, 7).count


def test_kostlan_univariate_mean():
    est, rows = Z.kostlan_root_counts(1, 100, 1000, 7)
    assert abs(est.value - 10.0) <= 3 * est.std_error
    assert len(rows) == 1000 and all(r["parity_ok"] for r in rows)


def test_kostlan_plane_rows_report_parity_and_certification():
    est, rows = Z.kostlan_root_counts(2, 4, 60, 3)
    assert {"trial", "seed", "count", "certified", "parity_ok"} <= set(rows[0])
    cert = [r for r in rows if r["certified"]]
    assert len(cert) >= 57
    assert all(r["parity_ok"] for r in cert)


def test_plane_solver_routes_agree():
    # charts and rotated chart are two independent eliminations
    for seed in range(15):
        s = E.sample_kostlan(2, 4, 2, seed)
        a = Z.count_projective_zeros(s, method="charts").count
        b = Z.count_projective_zeros(s, method="rotated", rng=np.random.default_rng(seed)).count
        assert a == b


def test_components_single_oval():
    rep = Z.count_components_rp2(circle(0, 0, 1))
    assert rep.b0 == 1 and rep.certified


def test_components_nested_ovals():
    p = (circle(0, 0, 1) * circle(0, 0, 2)).with_degree(4)
    rep = Z.count_components_rp2(p)
    assert rep.b0 == 2 and rep.certified


def test_components_disjoint_ovals():
    p = (circle(0.5, 0, 0.2) * circle(-0.5, 0, 0.2) * circle(0, 0.6, 0.1)).with_degree(6)
    assert Z.count_components_rp2(p).b0 == 3


def test_components_three_lines_flagged_singular():
    # the lines meet pairwise; a crossing merges branches, so the count is not certified
    p = (X(0) * X(1) * X(2)).with_degree(3)
    rep = Z.count_components_rp2(p)
    assert not rep.certified
    assert len(rep.singular_points) == 3


def test_component_density_scale_invariant():
    _, a = Z.estimate_component_density(6, 10, 5)
    _, b = Z.estimate_component_density(6, 10, 5, scale=5.0)
    assert [r["count"] for r in a] == [r["count"] for r in b]


def test_component_density_is_positive_and_below_harnack():
    est, rows = Z.estimate_component_density(6, 40, 2)
    assert est.value > 0
    # Harnack: at most (d-1)(d-2)/2 + 1 components
    assert all(r["count"] <= 11 for r in rows)


def test_component_mesh_matches_exact_ovals():
    # sign-based count on the mesh against a random union of small disjoint circles
    rng = np.random.default_rng(4)
    for _ in range(5):
        cs = [(rng.uniform(-2, 2), rng.uniform(-2, 2)) for _ in range(3)]
        ok = all(math.dist(a, b) > 0.7 for i, a in enumerate(cs) for b in cs[i + 1:])
        if not ok:
            continue
        p = circle(*cs[0], 0.3) * circle(*cs[1], 0.3) * circle(*cs[2], 0.3)
        assert Z.count_components_rp2(p.with_degree(6)).b0 == 3


def test_components_reject_bad_input():
    with pytest.raises(ValueError):
        Z.count_components_rp2(HomPoly(np.array([[1, 0]]), np.array([1.0])))
