"""Geodesic variations and closed-form Jacobi fields.

A Jacobi field with ``J(0) = k`` and ``nabla_t J(0) = l`` along the geodesic
from ``g0`` in direction ``h`` is the ``s``-derivative at ``s = 0`` of

    alpha(t, s) = Exp_{g0 + s k}(t (h + s l~)),    l~ = l + Gamma_{g0}(k, h).

All products of tensors are formed in mixed form (``X = g0^{-1} x``).  Note
that ``L^ = -KH + L~`` is in general *not* ``g0``-symmetric, and must not be
symmetrized: the non-symmetric part is what makes ``g0 dQ/ds + k Q`` symmetric.
"""

from dataclasses import dataclass
import math

import numpy as np

from .exceptions import DomainError
from .geoexp import (
    GeodesicCoeffs,
    _abscissa,
    geodesic_from_coeffs,
    geodesic_scalars,
    geodesic_velocity_mixed,
    tl_threshold,
)
from .pointgeo import PointMetric, christoffel, point_metric
from .symcore import (
    SERIES_RTOL,
    ad,
    as_sym,
    frob,
    sym,
    sym_exp,
    trace,
    trace_inner,
    traceless_part,
)

_MAX_SERIES_TERMS = 400


def quad_T(h, k, l, n_):
    """Algebraic curvature tensor ``tr(HL) tr(KN) - tr(HN) tr(KL)``."""
    return trace_inner(h, l) * trace_inner(k, n_) - trace_inner(h, n_) * trace_inner(k, l)


def quad_S(h, k):
    """``S(H, K) = T(H, K, H, K) = tr(H^2) tr(K^2) - tr(HK)^2``."""
    return quad_T(h, k, h, k)


@dataclass(frozen=True, eq=False)
class VariationData:
    """Data of the variation ``alpha(t, s)`` through a geodesic.

    ``H, K, Ltilde, Lhat`` are mixed tensors (``g0^{-1}`` applied on the left).
    """

    g0: PointMetric
    h: np.ndarray
    k: np.ndarray
    ltilde: np.ndarray
    H: np.ndarray
    K: np.ndarray
    Ltilde: np.ndarray
    Lhat: np.ndarray

    @classmethod
    def from_tangents(cls, g0, h, k, l):
        pm = point_metric(g0)
        h, k, l = (as_sym(x) for x in (h, k, l))
        ltilde = l + christoffel(pm, k, h)
        H, K, Lt = pm.inv @ h, pm.inv @ k, pm.inv @ ltilde
        return cls(pm, h, k, ltilde, H, K, Lt, -K @ H + Lt)

    @property
    def n(self):
        return self.g0.n

    def metric(self, s):
        return self.g0.g + np.asarray(s, dtype=float)[..., None, None] * self.k

    def mixed_direction(self, s):
        """``(Id + sK)^{-1} (H + s L~)``."""
        s = np.asarray(s, dtype=float)[..., None, None]
        return np.linalg.solve(np.eye(self.n) + s * self.K, self.H + s * self.Ltilde)

    def c(self, s):
        return trace(self.mixed_direction(s))

    def f(self, s):
        m = self.mixed_direction(s)
        return trace_inner(m, m)

    def d(self, s):
        m0 = traceless_part(self.mixed_direction(s))
        return trace_inner(m0, m0)


def variation_alpha(var, t, s):
    """``alpha(t, s) = lambda(s) exp(Q(t, s))`` with ``lambda(s) = g0 + s k``.

    ``b(t, s)`` follows the same continuous-argument branch rule as the
    geodesic itself, with ``c(s), d(s)`` in place of ``tr H, tr H0^2``.
    """
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(t < 0):
        raise DomainError("variation_alpha expects t >= 0", predicate="existence")
    try:
        lam = PointMetric.from_array(var.metric(s))
    except ValueError as exc:
        raise DomainError(f"g0 + s k is not a metric: {exc}", predicate="metric") from exc
    n = var.n
    m = var.mixed_direction(s)
    c = trace(m)
    m0 = traceless_part(m)
    d = np.maximum(trace_inner(m0, m0), 0.0)
    f = trace_inner(m, m)
    degenerate = d < tl_threshold(f)
    bad = np.broadcast_to(degenerate & (t * c <= -4.0), np.broadcast_shapes(t.shape, c.shape))
    if np.any(bad):
        raise DomainError(
            "(t, s) leaves the domain of the exponential map",
            index=int(np.flatnonzero(bad)[0]),
            predicate="existence",
        )
    a, b = _abscissa(c, f, d, degenerate, n, t)
    q = a[..., None, None] * np.eye(n) + b[..., None, None] * m0
    qw = sym(lam.root @ q @ lam.inv_root)
    return sym(lam.root @ sym_exp(qw) @ lam.root)


def p_perp(coeffs, t):
    """Mixed tensor in span{Id, H0} with trace ``e^{-n a/2}`` orthogonal to ``P(t)``."""
    if np.any(coeffs.degenerate):
        raise DomainError("P(t)^perp needs a non-zero traceless part", predicate="degenerate")
    t = np.asarray(t, dtype=float)
    n = coeffs.n
    a, _ = geodesic_scalars(coeffs, t)
    e = np.exp(-0.5 * n * a)
    p = (4.0 * coeffs.trH + n * t * coeffs.trH2) / (4.0 * n)
    alpha = e / n
    beta = -e * p / coeffs.d0
    xw = alpha[..., None, None] * np.eye(n) + beta[..., None, None] * coeffs.H0w
    return coeffs.g0.inv_root @ xw @ coeffs.g0.root


def q_s_derivative(var, t):
    """``dQ/ds`` at ``s = 0`` in closed form (mixed tensor)."""
    coeffs = GeodesicCoeffs.from_direction(var.g0, var.h)
    n = var.n
    eye = np.eye(n)
    f = coeffs.trH2
    s_hi = quad_S(var.H, np.broadcast_to(eye, var.H.shape))
    if np.any(f <= 0) or np.any(s_hi <= n * tl_threshold(f)):
        raise DomainError(
            "degenerate denominators; integrate the Jacobi equation instead",
            predicate="degenerate",
        )
    return _q_s_derivative(var.H, var.Lhat, coeffs, np.asarray(t, dtype=float))


def _q_s_derivative(H, Lhat, coeffs, t):
    n = coeffs.n
    eye = np.broadcast_to(np.eye(n), H.shape)
    _, b = geodesic_scalars(coeffs, t)
    P = geodesic_velocity_mixed(coeffs, t)
    Pp = p_perp(coeffs, t)
    f = coeffs.trH2
    c1 = trace_inner(H, Lhat) / f
    c2 = quad_T(Lhat, H, eye, H) / f
    c3 = quad_T(H, eye, Lhat, eye) / quad_S(H, eye)
    H0 = coeffs.H0
    return (
        (c1 * t)[..., None, None] * P
        + (c2 * t)[..., None, None] * Pp
        + b[..., None, None] * (-c3[..., None, None] * H0 + traceless_part(Lhat))
    )


def _ad_tail(bh, bl):
    """``sum_{m>=1} (-ad(bH))^m / (m+1)! (bL)``."""
    term = bl
    total = np.zeros_like(bl)
    for m in range(1, _MAX_SERIES_TERMS):
        term = -ad(bh, term) / (m + 1)
        total = total + term
        if np.all(frob(term) <= SERIES_RTOL * frob(total)):
            break
    return total


def _jacobi_closed_form(pm, h, k, l, t):
    coeffs = GeodesicCoeffs.from_direction(pm, h)
    H, K, L = pm.inv @ h, pm.inv @ k, pm.inv @ l
    Lhat = -K @ H + L + pm.inv @ christoffel(pm, k, h)
    _, b = geodesic_scalars(coeffs, t)
    g_t = geodesic_from_coeffs(coeffs, t)
    dq = _q_s_derivative(H, Lhat, coeffs, t)
    bb = b[..., None, None]
    tail = _ad_tail(bb * H, bb * Lhat)
    return sym(g_t @ (dq + tail) + k @ pm.inv @ g_t)


def _jacobi_ode(g0, h, k, l, t):
    from .oracles import integrate_jacobi

    steps = max(1000, math.ceil(t / 1e-4))
    sol = integrate_jacobi(g0, h, k, l, t, t / steps, record=False)
    sol.raise_if_lost()
    return sol.xi[-1]


def jacobi_field(g0, h, k, l, t):
    """Jacobi field ``J(t)`` with ``J(0) = k``, ``nabla_t J(0) = l``.

    Closed form where ``tr(H^2)`` and ``tr(H0^2)`` are non-degenerate; along
    conformal directions the Jacobi equation is integrated with RK4 instead,
    and ``h = 0`` gives ``k + t l``.  Broadcasts over batch axes and ``t``.
    """
    pm = point_metric(g0)
    h, k, l = (as_sym(x) for x in (h, k, l))
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("jacobi_field expects t >= 0", predicate="existence")
    shape = np.broadcast_shapes(pm.batch_shape, h.shape[:-2], k.shape[:-2], l.shape[:-2], t.shape)
    n = pm.n
    mshape = shape + (n, n)
    g0b = np.broadcast_to(pm.g, mshape)
    pm = PointMetric(
        g0b,
        np.broadcast_to(pm.inv, mshape),
        np.broadcast_to(pm.sqrt_det, shape),
        np.broadcast_to(pm.root, mshape),
        np.broadcast_to(pm.inv_root, mshape),
    )
    h, k, l = (np.broadcast_to(x, mshape) for x in (h, k, l))
    t = np.broadcast_to(t, shape)

    coeffs = GeodesicCoeffs.from_direction(pm, h)
    # validates t against the existence interval
    geodesic_scalars(coeffs, t)
    zero = coeffs.trH2 == 0
    fallback = ~zero & coeffs.degenerate
    regular = ~zero & ~fallback

    out = np.empty(mshape)
    if np.any(zero):
        out[zero] = k[zero] + t[zero][..., None, None] * l[zero]
    if np.any(regular):
        sub = PointMetric(*(getattr(pm, f)[regular] for f in ("g", "inv", "sqrt_det", "root", "inv_root")))
        out[regular] = _jacobi_closed_form(sub, h[regular], k[regular], l[regular], t[regular])
    for idx in zip(*np.nonzero(fallback)) if fallback.ndim else ([()] if fallback else []):
        ti = float(t[idx])
        out[idx] = k[idx] if ti == 0 else _jacobi_ode(g0b[idx], h[idx], k[idx], l[idx], ti)
    at_zero = t == 0
    if np.any(at_zero):
        out[at_zero] = k[at_zero]
    return out


def _jacobi_rhs(g, ginv, g_t, xi, xi_t):
    a = ginv @ g_t
    x = ginv @ xi
    xt = ginv @ xi_t

    def tr(m):
        return trace(m)[..., None, None]

    return (
        -g_t @ x @ a
        + g_t @ xt
        + xi_t @ a
        + 0.5 * tr(a @ xt) * g
        - 0.5 * tr(a @ a @ x) * g
        + 0.5 * tr(a @ x) * g_t
        - 0.5 * tr(xt) * g_t
        + 0.25 * tr(a @ a) * xi
        - 0.5 * tr(a) * xi_t
    )


def jacobi_rhs(g, g_t, xi, xi_t):
    """Right-hand side ``xi_tt`` of the Jacobi equation along a geodesic."""
    pm = point_metric(g)
    return _jacobi_rhs(pm.g, pm.inv, g_t, xi, xi_t)


__all__ = [
    "VariationData",
    "quad_T",
    "quad_S",
    "variation_alpha",
    "p_perp",
    "q_s_derivative",
    "jacobi_field",
    "jacobi_rhs",
]
