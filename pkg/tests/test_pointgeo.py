import math

import numpy as np
import pytest
from hypothesis import given
from numpy.testing import assert_allclose

from dewitt.exceptions import DimensionMismatchError, NotPositiveDefiniteError
from dewitt.geoexp import geodesic_point
from dewitt.oracles import basis_trace
from dewitt.pointgeo import (
    PointMetric,
    christoffel,
    christoffel_mixed,
    covariant_derivative_along,
    curvature,
    curvature_mixed,
    dgamma,
    inner_g,
    ricci_endomorphism,
    ricci_like,
    ricci_like_traceless,
    scalar_like,
    trace_bracket,
    vis_metric,
)

from strategies import metric_and_tangents, rand_spd, rand_sym

I2 = np.eye(2)
DIAG = np.diag([1.0, -1.0])
OFF = np.array([[0.0, 1.0], [1.0, 0.0]])


@pytest.mark.parametrize(
    "g, h, k, expected",
    [
        (I2, I2, I2, 2.0),
        (I2, DIAG, I2, 0.0),
        (np.diag([4.0, 1.0]), np.diag([4.0, 0.0]), np.diag([4.0, 0.0]), 1.0),
    ],
)
def test_inner_g_examples(g, h, k, expected):
    assert inner_g(g, h, k) == pytest.approx(expected, abs=1e-15)


def test_inner_g_positive_and_invariant(rng):
    g, h = rand_spd(rng, 3), rand_sym(rng, 3)
    assert inner_g(g, h, h) > 0
    # congruence invariance: <a^T h a, a^T k a>_{a^T g a} = <h, k>_g
    a = rng.standard_normal((3, 3))
    k = rand_sym(rng, 3)
    lhs = inner_g(a.T @ g @ a, a.T @ h @ a, a.T @ k @ a)
    assert lhs == pytest.approx(inner_g(g, h, k), rel=1e-10)


def test_point_metric_parts(rng):
    g = rand_spd(rng, 4)
    pm = PointMetric.from_array(g)
    assert_allclose(pm.inv @ g, np.eye(4), atol=1e-12)
    assert_allclose(pm.root @ pm.root, g, rtol=1e-12, atol=1e-12)
    assert pm.sqrt_det == pytest.approx(math.sqrt(np.linalg.det(g)), rel=1e-12)
    h = rand_sym(rng, 4)
    assert_allclose(pm.unwhiten(pm.whiten(h)), h, atol=1e-12)


def test_christoffel_examples(rng):
    assert_allclose(christoffel(I2, I2, I2), 0.5 * I2, atol=1e-15)
    assert_allclose(christoffel(I2, np.zeros((2, 2)), DIAG), 0, atol=0)
    g, h, k = rand_spd(rng, 3), rand_sym(rng, 3), rand_sym(rng, 3)
    assert np.array_equal(christoffel(g, h, k), christoffel(g, k, h))


def test_christoffel_mixed_examples():
    assert_allclose(christoffel_mixed(I2, I2), 0.5 * I2, atol=1e-15)
    assert_allclose(christoffel_mixed(DIAG, DIAG), 1.5 * I2, atol=1e-15)
    assert_allclose(christoffel_mixed(np.zeros((2, 2)), DIAG), 0, atol=0)


def test_christoffel_mixed_matches_covariant(rng):
    g, h, k = rand_spd(rng, 3), rand_sym(rng, 3), rand_sym(rng, 3)
    gi = np.linalg.inv(g)
    assert_allclose(gi @ christoffel(g, h, k), christoffel_mixed(gi @ h, gi @ k), rtol=1e-10, atol=1e-12)


def test_christoffel_is_levi_civita(rng):
    # Koszul: 2<Gamma(h,k), m> = D_h<k,m> + D_k<h,m> - D_m<h,k> with the sign of g_tt = Gamma
    g = rand_spd(rng, 3)
    h, k, m = (rand_sym(rng, 3) for _ in range(3))
    eps = 1e-5

    def full(g_, a, b):
        # fiber metric with its volume density
        return inner_g(g_, a, b) * math.sqrt(np.linalg.det(g_))

    def dmetric(direction, a, b):
        return (full(g + eps * direction, a, b) - full(g - eps * direction, a, b)) / (2 * eps)

    lhs = -2 * full(g, christoffel(g, h, k), m)
    rhs = dmetric(h, k, m) + dmetric(k, h, m) - dmetric(m, h, k)
    assert lhs == pytest.approx(rhs, rel=1e-7, abs=1e-9)


def test_dgamma_examples(rng):
    g = rand_spd(rng, 3)
    k, l = rand_sym(rng, 3), rand_sym(rng, 3)
    assert_allclose(dgamma(g, np.zeros((3, 3)), k, l), 0, atol=1e-15)
    h = rand_sym(rng, 3)
    eps = 1e-5
    fd = (christoffel(g + eps * h, k, l) - christoffel(g - eps * h, k, l)) / (2 * eps)
    assert_allclose(dgamma(g, h, k, l), fd, rtol=1e-8, atol=1e-8)


def test_curvature_examples():
    r = curvature(I2, DIAG, OFF, DIAG)
    assert_allclose(r, -1.25 * OFF, atol=1e-15)
    assert_allclose(curvature(I2, DIAG, OFF, DIAG, route="definition"), -1.25 * OFF, atol=1e-14)
    assert_allclose(curvature(I2, DIAG, DIAG, OFF), 0, atol=1e-15)
    # h = Id, k and l traceless with tr(kl) = 0
    assert_allclose(curvature(I2, I2, DIAG, OFF), 0, atol=1e-15)
    with pytest.raises(ValueError):
        curvature(I2, DIAG, OFF, DIAG, route="other")


def test_curvature_mixed_matches(rng):
    g = rand_spd(rng, 3)
    h, k, l = (rand_sym(rng, 3) for _ in range(3))
    gi = np.linalg.inv(g)
    assert_allclose(gi @ curvature(g, h, k, l), curvature_mixed(gi @ h, gi @ k, gi @ l), rtol=1e-9, atol=1e-10)


@given(metric_and_tangents(count=4))
def test_curvature_symmetries(args):
    g, h, k, l, m = args
    pm = PointMetric.from_array(g)
    r = curvature(pm, h, k, l)
    scale = 1.0 + max(np.abs(x).max() for x in (h, k, l, m)) ** 3 * np.abs(pm.inv).max() ** 3 * np.abs(g).max() ** 2
    assert_allclose(r, curvature(pm, h, k, l, route="definition"), atol=1e-9 * scale)
    assert_allclose(r, -curvature(pm, k, h, l), atol=1e-9 * scale)
    bianchi = r + curvature(pm, k, l, h) + curvature(pm, l, h, k)
    assert_allclose(bianchi, 0, atol=1e-9 * scale)
    lhs = inner_g(pm, r, m)
    rhs = -inner_g(pm, curvature(pm, h, k, m), l)
    assert lhs == pytest.approx(rhs, abs=1e-9 * scale * (1 + np.abs(m).max() * np.abs(pm.inv).max() ** 2))


@pytest.mark.parametrize(
    "hm, lm, expected", [(np.eye(3), np.eye(3), 0.0), (DIAG, DIAG, -4.0)]
)
def test_trace_bracket_examples(hm, lm, expected):
    assert trace_bracket(hm, lm) == pytest.approx(expected, abs=1e-15)


def test_ricci_examples(rng):
    assert ricci_like(I2, DIAG, DIAG) == pytest.approx(-1.25, abs=1e-15)
    g, l = rand_spd(rng, 3), rand_sym(rng, 3)
    assert ricci_like(g, g, l) == pytest.approx(0.0, abs=1e-12)


def test_ricci_against_basis_trace(rng):
    for n in (1, 2, 3, 4):
        pm = PointMetric.from_array(rand_spd(rng, n))
        h, l = rand_sym(rng, n), rand_sym(rng, n)
        brute = basis_trace(lambda k: curvature(pm, h, k, l), n, rng)
        assert brute == pytest.approx(float(ricci_like(pm, h, l)), rel=1e-9, abs=1e-9)
        assert ricci_like_traceless(pm, h, l) == pytest.approx(float(ricci_like(pm, h, l)), rel=1e-10, abs=1e-12)


def test_ricci_is_symmetric(rng):
    g, h, l = rand_spd(rng, 4), rand_sym(rng, 4), rand_sym(rng, 4)
    assert ricci_like(g, h, l) == pytest.approx(ricci_like(g, l, h), rel=1e-12)


@pytest.mark.parametrize("n, expected", [(2, -1.25), (3, -7.5)])
def test_scalar_like_examples(n, expected):
    assert scalar_like(n) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("n", range(1, 7))
def test_scalar_like_basis_trace(n, rng):
    pm = PointMetric.from_array(rand_spd(rng, n))
    brute = basis_trace(lambda xi: ricci_endomorphism(pm, xi), n, rng)
    assert brute == pytest.approx(scalar_like(n), rel=1e-12, abs=1e-12)


def test_scalar_like_rejects_bad_n():
    with pytest.raises(ValueError):
        scalar_like(0)


def test_covariant_derivative_examples(rng):
    k = rand_sym(rng, 2)
    t = np.linspace(0, 1, 11)
    curve = np.broadcast_to(I2, (11, 2, 2))
    const = np.broadcast_to(k, (11, 2, 2))
    assert_allclose(covariant_derivative_along(curve, const, 0.1, 5), 0, atol=0)
    lin = t[:, None, None] * k
    for idx in (0, 5, 10):
        assert_allclose(covariant_derivative_along(curve, lin, 0.1, idx), k, atol=1e-13)


def test_covariant_derivative_of_geodesic_velocity(rng):
    g0, h = rand_spd(rng, 3), rand_sym(rng, 3)
    errs = []
    for dt in (1e-2, 1e-3):
        t = dt * np.arange(7)
        curve = geodesic_point(g0[None], h[None], t)
        vel = np.gradient(curve, dt, axis=0, edge_order=2)
        ref = np.abs(christoffel(curve[3], vel[3], vel[3])).max()
        errs.append(np.abs(covariant_derivative_along(curve, vel, dt, 3)).max() / ref)
    assert errs[1] < 1e-5
    assert errs[0] / errs[1] > 50  # second order


def test_vis_metric_examples(rng):
    g, h, k = rand_spd(rng, 3), rand_sym(rng, 3), rand_sym(rng, 3)
    assert vis_metric(g, g, h, k) == pytest.approx(float(inner_g(g, h, k)), rel=1e-12)
    assert vis_metric(I2, 4 * I2, I2, I2) == pytest.approx(0.5, rel=1e-15)
    lam = 2.7
    gt = rand_spd(rng, 3)
    assert vis_metric(lam * gt, g, h, k) == pytest.approx(lam**-1.5 * vis_metric(gt, g, h, k), rel=1e-12)


def test_input_validation():
    with pytest.raises(DimensionMismatchError):
        inner_g(I2, np.eye(3), np.eye(3))
    with pytest.raises(NotPositiveDefiniteError):
        inner_g(DIAG, I2, I2)


def test_batched_broadcasting(rng):
    g = rand_spd(rng, 3, (5,))
    h, k, l = (rand_sym(rng, 3, (5,)) for _ in range(3))
    r = curvature(g, h, k, l)
    for i in range(5):
        assert_allclose(r[i], curvature(g[i], h[i], k[i], l[i]), rtol=1e-13, atol=1e-13)
