import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artifact.polycore import (MultiPoly, PolyMap, bargmann_fock_norm_sq, dehomogenize, evaluate,
                               evaluate_many, jacobian, poly_from_dict, sum_of_squares)


def x(n, j):
    return MultiPoly.variable(n, j)


def test_monomial_evaluation():
    assert evaluate(x(1, 0) ** 2, [3.0]) == 9.0


def test_unit_sphere_point():
    p = sum_of_squares(3, range(3)) - 1.0
    assert evaluate(p, [1.0, 0.0, 0.0]) == 0.0


def test_product_pair_component_vanishes():
    # (|x|^2 - 2)^2 + y^2 - 1 at |x|^2 = 2, y = 1
    n = 3
    sx = sum_of_squares(n, [0, 1]) - 2.0
    p = sx * sx + x(n, 2) ** 2 - 1.0
    assert abs(evaluate(p, [1.0, 1.0, 1.0])) < 1e-15


def test_jacobian_identity():
    P = PolyMap((x(2, 0), x(2, 1)))
    J = jacobian(P, [0.3, -2.0]).matrix
    assert np.array_equal(J, np.eye(2))


def test_jacobian_sphere_row():
    n, k = 4, 2
    P = PolyMap((sum_of_squares(n, range(k - 1, n)) - 1.0,))
    pt = np.array([0.5, -1.0, 2.0, 0.25])
    row = jacobian(P, pt).matrix[0]
    expected = np.zeros(n)
    expected[k - 1:] = 2 * pt[k - 1:]
    assert np.allclose(row, expected)
    assert math.isclose(row @ row, 4 * np.sum(pt[k - 1:] ** 2))


def test_jacobian_product_rule():
    P = PolyMap((x(2, 0) * x(2, 1),))
    assert np.allclose(jacobian(P, [1.0, 1.0]).matrix, [[1.0, 1.0]])


def test_bargmann_fock_constant_and_linear():
    assert bargmann_fock_norm_sq(PolyMap((MultiPoly.constant(2, 1.0),))) == pytest.approx(1.0)
    assert bargmann_fock_norm_sq(PolyMap((x(3, 1),))) == pytest.approx(1 / math.pi)


@pytest.mark.parametrize("n,k", [(3, 1), (3, 2), (4, 2), (2, 1)])
def test_bargmann_fock_sphere_component(n, k):
    P = PolyMap((sum_of_squares(n, range(k - 1, n)) - 1.0,))
    assert bargmann_fock_norm_sq(P) == pytest.approx(1 + 2 * (n - k + 1) / math.pi ** 2)


def test_bargmann_fock_by_quadrature():
    # oracle: Gauss-Hermite quadrature over C^2 = R^4 for the weight exp(-pi |z|^2)
    P = PolyMap((x(2, 0) ** 3 - 2.0 * x(2, 0) * x(2, 1) + 0.5,))
    t, w = np.polynomial.hermite.hermgauss(8)
    t = t / math.sqrt(math.pi)
    w = w / math.sqrt(math.pi)
    g = np.meshgrid(t, t, t, t, indexing="ij")
    W = np.einsum("a,b,c,d->abcd", w, w, w, w)
    z0, z1 = g[0] + 1j * g[1], g[2] + 1j * g[3]
    vals = sum(c * z0 ** e[0] * z1 ** e[1] for e, c in P[0].terms.items())
    quad = float(np.sum(W * np.abs(vals) ** 2))
    assert bargmann_fock_norm_sq(P) == pytest.approx(quad, rel=1e-12)


def test_dehomogenize_examples():
    n = 2
    q = x(n, 0) ** 2 + x(n, 1) ** 2
    d = dehomogenize(q.with_degree(2), 0)
    assert d.terms == {(0,): 1.0, (2,): 1.0}
    d = dehomogenize((x(n, 0) * x(n, 1)).with_degree(2), 1)
    assert d.terms == {(1,): 1.0}


def test_homogeneous_degree_enforced():
    with pytest.raises(ValueError):
        MultiPoly(2, {(1, 0): 1.0, (0, 0): 1.0}, homogeneous_degree=1)


def test_shape_errors():
    with pytest.raises(ValueError):
        evaluate(x(2, 0), [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        PolyMap((x(2, 0), x(3, 0)))


def test_json_round_trip():
    p = poly_from_dict(3, [((1, 0, 2), 1.5), ((0, 0, 0), -2.0)])
    assert MultiPoly.from_json(p.to_json()) == p
    P = PolyMap((p, x(3, 1)))
    assert PolyMap.from_json(P.to_json()) == P


def test_terms_are_grlex_ordered():
    p = poly_from_dict(2, [((2, 0), 1.0), ((0, 0), 1.0), ((0, 1), 1.0)])
    assert list(p.terms) == [(0, 0), (0, 1), (2, 0)]


coefs = st.floats(-3, 3, allow_nan=False)
exps = st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3))
polys = st.dictionaries(exps, coefs, min_size=1, max_size=6).map(lambda t: MultiPoly(3, t))
points = st.tuples(*[st.floats(-2, 2, allow_nan=False)] * 3)


@given(polys, polys, points)
@settings(max_examples=60, deadline=None)
def test_ring_operations_agree_with_evaluation(p, q, pt):
    a, b = evaluate(p, pt), evaluate(q, pt)
    assert evaluate(p + q, pt) == pytest.approx(a + b, abs=1e-9)
    assert evaluate(p * q, pt) == pytest.approx(a * b, rel=1e-9, abs=1e-9)


@given(polys, points)
@settings(max_examples=60, deadline=None)
def test_evaluate_many_matches_evaluate(p, pt):
    assert evaluate_many(p, np.array([pt]))[0] == pytest.approx(evaluate(p, pt), rel=1e-12,
                                                                abs=1e-12)


@given(polys, points, st.integers(0, 2))
@settings(max_examples=40, deadline=None)
def test_derivative_matches_finite_difference(p, pt, j):
    h = 1e-6
    e = np.zeros(3)
    e[j] = h
    fd = (evaluate(p, np.add(pt, e)) - evaluate(p, np.subtract(pt, e))) / (2 * h)
    assert evaluate(p.derivative(j), pt) == pytest.approx(fd, rel=1e-5, abs=1e-5)


@given(st.dictionaries(st.tuples(st.integers(0, 4), st.integers(0, 4)), coefs, min_size=1))
@settings(max_examples=40, deadline=None)
def test_dehomogenize_cannot_raise_degree(t):
    # homogenise to degree 8 with x_0, then dehomogenise
    d = 8
    p = MultiPoly(3, {(d - a - b, a, b): c for (a, b), c in t.items()}, homogeneous_degree=d)
    for chart in range(3):
        assert dehomogenize(p, chart).degree <= d
