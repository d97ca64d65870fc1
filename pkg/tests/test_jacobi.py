import numpy as np
import pytest
from numpy.testing import assert_allclose

from dewitt.exceptions import DomainError
from dewitt.geoexp import GeodesicCoeffs, geodesic_point, geodesic_velocity_mixed
from dewitt.jacobi import (
    VariationData,
    jacobi_field,
    jacobi_rhs,
    p_perp,
    q_s_derivative,
    quad_S,
    quad_T,
    variation_alpha,
)
from dewitt.oracles import integrate_jacobi
from dewitt.pointgeo import christoffel, covariant_derivative_along
from dewitt.symcore import trace, trace_inner

from strategies import rand_spd, rand_sym

I2 = np.eye(2)
DIAG = np.diag([1.0, -1.0])


def test_quad_examples(rng):
    assert quad_T(I2, DIAG, I2, DIAG) == pytest.approx(4.0)
    h, l, m = (rand_sym(rng, 3) for _ in range(3))
    assert quad_T(h, h, l, m) == pytest.approx(0.0, abs=1e-12)
    assert quad_S(h, l) == quad_T(h, l, h, l)
    assert quad_S(h, l) >= 0  # Cauchy-Schwarz


def test_p_perp_conditions(rng):
    g0, h = rand_spd(rng, 3), rand_sym(rng, 3)
    co = GeodesicCoeffs.from_direction(g0, h)
    for t in (0.0, 0.4, 1.3):
        x = p_perp(co, t)
        p = geodesic_velocity_mixed(co, t)
        assert trace_inner(x, p) == pytest.approx(0.0, abs=1e-12)
        hx = x - np.eye(3) * trace(x) / 3
        # x lies in span{Id, H0}
        h0 = co.H0
        coef = trace_inner(hx, h0) / trace_inner(h0, h0)
        assert_allclose(hx, coef * h0, atol=1e-12)


def test_p_perp_at_zero_traceless_direction():
    # H traceless with tr(H^2) = n: P(0) = H is already orthogonal to Id, so X = Id/n
    h = DIAG
    co = GeodesicCoeffs.from_direction(I2, h)
    assert_allclose(p_perp(co, 0.0), I2 / 2, atol=1e-15)


def test_p_perp_rejects_degenerate():
    with pytest.raises(DomainError):
        p_perp(GeodesicCoeffs.from_direction(I2, I2), 0.5)


def test_q_s_derivative_examples(rng):
    g0, h = rand_spd(rng, 3), rand_sym(rng, 3)
    co = GeodesicCoeffs.from_direction(g0, h)
    t = 0.8
    var = VariationData.from_tangents(g0, h, np.zeros((3, 3)), h)
    assert_allclose(q_s_derivative(var, t), t * geodesic_velocity_mixed(co, t), rtol=1e-12, atol=1e-12)
    # Lhat = 0: k = 0 and l = 0
    zero = np.zeros((3, 3))
    var = VariationData.from_tangents(g0, h, zero, zero)
    assert_allclose(q_s_derivative(var, t), 0, atol=0)


def test_q_s_derivative_against_finite_difference(rng):
    g0, h, k, l = rand_spd(rng, 3), *(0.7 * rand_sym(rng, 3) for _ in range(3))
    var = VariationData.from_tangents(g0, h, k, l)
    t, ds = 0.7, 1e-5

    def q(s):
        # Q(t, s) = log(lambda(s)^{-1} alpha(t, s)), read back in mixed form
        lam = var.metric(s)
        w, v = np.linalg.eig(np.linalg.solve(lam, variation_alpha(var, t, s)))
        return np.real(v @ np.diag(np.log(w)) @ np.linalg.inv(v))

    fd = (q(ds) - q(-ds)) / (2 * ds)
    assert_allclose(q_s_derivative(var, t), fd, rtol=1e-8, atol=1e-8)


def test_variation_alpha_examples(rng):
    g0, h, k, l = rand_spd(rng, 3), *(0.6 * rand_sym(rng, 3) for _ in range(3))
    var = VariationData.from_tangents(g0, h, k, l)
    t = np.linspace(0, 1, 5)
    assert_allclose(variation_alpha(var, t, 0.0), geodesic_point(g0, h, t), rtol=1e-12)
    s = np.array([-0.1, 0.0, 0.2])
    assert_allclose(variation_alpha(var, 0.0, s), g0 + s[:, None, None] * k, rtol=1e-12, atol=1e-14)


def test_variation_alpha_curves_are_geodesics(rng):
    g0, h, k, l = rand_spd(rng, 2), *(0.6 * rand_sym(rng, 2) for _ in range(3))
    var = VariationData.from_tangents(g0, h, k, l)
    s = 0.05
    dt = 1e-4
    t = 0.5 + dt * np.arange(-1, 2)
    c = variation_alpha(var, t, s)
    acc = (c[2] - 2 * c[1] + c[0]) / dt**2
    vel = (c[2] - c[0]) / (2 * dt)
    assert_allclose(acc, christoffel(c[1], vel, vel), rtol=1e-5, atol=1e-5)


def test_jacobi_examples(rng):
    g0, k, l = rand_spd(rng, 3), rand_sym(rng, 3), rand_sym(rng, 3)
    t = np.linspace(0, 2, 7)
    zero = np.zeros((3, 3))
    assert_allclose(jacobi_field(g0, zero, k, l, t), k + t[:, None, None] * l, atol=1e-15)
    h = rand_sym(rng, 3)
    assert np.array_equal(jacobi_field(g0, h, k, l, 0.0), k)
    # k = 0, l = h gives t g'(t)
    dt = 1e-5
    for tt in (0.3, 1.1):
        gp = (geodesic_point(g0, h, tt + dt) - geodesic_point(g0, h, tt - dt)) / (2 * dt)
        assert_allclose(jacobi_field(g0, h, zero, h, tt), tt * gp, rtol=1e-8, atol=1e-9)


def test_jacobi_against_rk4(rng):
    g0 = rand_spd(rng, 3, (6,))
    h, k, l = (0.7 * rand_sym(rng, 3, (6,)) for _ in range(3))
    sol = integrate_jacobi(g0, h, k, l, 1.0, 1e-3)
    closed = jacobi_field(g0[None], h[None], k[None], l[None], sol.times[::50, None])
    assert np.abs(closed - sol.xi[::50]).max() / max(1.0, np.abs(closed).max()) < 1e-5


def test_jacobi_conformal_fallback(rng):
    g0, k, l = rand_spd(rng, 2), rand_sym(rng, 2), rand_sym(rng, 2)
    h = 0.3 * g0
    sol = integrate_jacobi(g0, h, k, l, 1.0, 1e-3)
    assert_allclose(jacobi_field(g0, h, k, l, 1.0), sol.xi[-1], rtol=1e-7, atol=1e-8)


def test_jacobi_initial_derivative(rng):
    g0, h, k, l = rand_spd(rng, 3), *(rand_sym(rng, 3) for _ in range(3))
    errs = []
    for dt in (1e-3, 1e-4):
        t = dt * np.arange(3)
        nab = covariant_derivative_along(
            geodesic_point(g0, h, t), jacobi_field(g0, h, k, l, t), dt, 0
        )
        errs.append(np.abs(nab - l).max())
    assert errs[1] < 1e-6
    assert 50 < errs[0] / errs[1] < 200  # second order


def test_jacobi_rhs_examples(rng):
    g, xi, xi_t = rand_spd(rng, 3), rand_sym(rng, 3), rand_sym(rng, 3)
    assert_allclose(jacobi_rhs(g, np.zeros((3, 3)), xi, xi_t), 0, atol=0)


def test_jacobi_rhs_on_geodesic_velocity(rng):
    # g'(t) is itself a Jacobi field: its second derivative matches the rhs
    g0, h = rand_spd(rng, 3), rand_sym(rng, 3)
    dt = 1e-3
    t = 0.5 + dt * np.arange(-2, 3)
    c = geodesic_point(g0, h, t)
    v = np.gradient(c, dt, axis=0)
    a = np.gradient(v, dt, axis=0)
    third = (c[4] - 2 * c[3] + 2 * c[1] - c[0]) / (2 * dt**3)
    assert_allclose(jacobi_rhs(c[2], v[2], v[2], a[2]), third, rtol=1e-4, atol=1e-4)


def test_jacobi_domain():
    with pytest.raises(DomainError):
        jacobi_field(I2, -I2, I2, I2, 2.5)
    with pytest.raises(DomainError):
        jacobi_field(I2, DIAG, I2, I2, -1.0)
