"""Pointwise geometry of the canonical metric on SPD matrices.

At a base point ``x`` the metric value ``g`` is an SPD matrix and tangent
vectors ``h, k, l`` are symmetric matrices.  Everything here is fiberwise; the
global metric only adds the volume factor ``sqrt(det g)`` and a quadrature
(see :mod:`dewitt.fieldmanifold`).

Functions take a :class:`PointMetric` (or a raw SPD array, which is wrapped)
and broadcast over leading batch axes.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatchError
from .symcore import (
    ad,
    as_spd,
    check_same_dim,
    dim,
    sym,
    trace,
    trace_inner,
    transpose,
)


@dataclass(frozen=True, eq=False)
class PointMetric:
    """An SPD metric value with its inverse, square roots and volume factor."""

    g: np.ndarray
    inv: np.ndarray
    sqrt_det: np.ndarray
    root: np.ndarray
    inv_root: np.ndarray

    @classmethod
    def from_array(cls, g):
        g = as_spd(g)
        w, v = np.linalg.eigh(g)
        vt = transpose(v)
        sw = np.sqrt(w)
        return cls(
            g=g,
            inv=sym((v / w[..., None, :]) @ vt),
            sqrt_det=np.prod(sw, axis=-1),
            root=sym((v * sw[..., None, :]) @ vt),
            inv_root=sym((v / sw[..., None, :]) @ vt),
        )

    @property
    def n(self):
        return self.g.shape[-1]

    @property
    def batch_shape(self):
        return self.g.shape[:-2]

    def mixed(self, h):
        """Raise an index: ``g^{-1} h``."""
        return self.inv @ h

    def whiten(self, h):
        """Congruence ``g^{-1/2} h g^{-1/2}``: symmetric, similar to ``g^{-1} h``."""
        return sym(self.inv_root @ h @ self.inv_root)

    def unwhiten(self, a):
        return sym(self.root @ a @ self.root)

    def __getitem__(self, idx):
        return PointMetric(
            self.g[idx], self.inv[idx], self.sqrt_det[idx], self.root[idx], self.inv_root[idx]
        )


def point_metric(g):
    return g if isinstance(g, PointMetric) else PointMetric.from_array(g)


def _tr(a):
    return trace(a)[..., None, None]


def _check(pm, *mats):
    n = check_same_dim(*mats)
    if n != pm.n:
        raise DimensionMismatchError(f"metric has n={pm.n}, tangent has n={n}")


def inner_g(g, h, k):
    """Fiber inner product ``tr(g^{-1} h g^{-1} k)``."""
    pm = point_metric(g)
    _check(pm, h, k)
    return trace_inner(pm.inv @ h, pm.inv @ k)


def _christoffel(g, ginv, h, k):
    hg = h @ ginv
    kg = k @ ginv
    return (
        0.5 * (hg @ k + kg @ h)
        + 0.25 * _tr(hg @ kg) * g
        - 0.25 * _tr(ginv @ h) * k
        - 0.25 * _tr(ginv @ k) * h
    )


def christoffel(g, h, k):
    """Christoffel symbol ``Gamma_g(h, k)`` of the flat chart of symmetric tensors."""
    pm = point_metric(g)
    _check(pm, h, k)
    # averaging both orders makes the result bitwise symmetric in (h, k) and in its indices
    return sym(0.5 * (_christoffel(pm.g, pm.inv, h, k) + _christoffel(pm.g, pm.inv, k, h)))


def christoffel_mixed(hm, km):
    """Christoffel symbol in the mixed framing ``H = g^{-1} h``."""
    n = check_same_dim(hm, km)
    eye = np.eye(n)
    return (
        0.5 * (hm @ km + km @ hm)
        + 0.25 * _tr(hm @ km) * eye
        - 0.25 * _tr(hm) * km
        - 0.25 * _tr(km) * hm
    )


def _dgamma(g, ginv, h, k, l):
    gh = ginv @ h
    gk = ginv @ k
    gl = ginv @ l
    return (
        -0.5 * k @ gh @ gl
        - 0.5 * l @ gh @ gk
        - 0.25 * _tr(gh @ gk @ gl) * g
        - 0.25 * _tr(gk @ gh @ gl) * g
        + 0.25 * _tr(gk @ gl) * h
        + 0.25 * _tr(gh @ gk) * l
        + 0.25 * _tr(gh @ gl) * k
    )


def dgamma(g, h, k, l):
    """Derivative of ``g -> Gamma_g(k, l)`` in direction ``h``."""
    pm = point_metric(g)
    _check(pm, h, k, l)
    return _dgamma(pm.g, pm.inv, h, k, l)


def _curvature_definition(pm, h, k, l):
    g, gi = pm.g, pm.inv
    return (
        _dgamma(g, gi, h, k, l)
        - _dgamma(g, gi, k, h, l)
        - _christoffel(g, gi, h, _christoffel(g, gi, k, l))
        + _christoffel(g, gi, k, _christoffel(g, gi, h, l))
    )


def curvature_mixed(hm, km, lm):
    """``g^{-1} R_g(h,k) l`` expressed through mixed tensors only."""
    n = check_same_dim(hm, km, lm)
    trh, trk, trl = _tr(hm), _tr(km), _tr(lm)
    tkl, thl = _tr(km @ lm), _tr(hm @ lm)
    return (
        0.25 * ad(ad(hm, km), lm)
        + (n / 16.0) * (tkl * hm - thl * km)
        + (1 / 16.0) * (trh * trl * km - trk * trl * hm)
        + (1 / 16.0) * (trk * thl - trh * tkl) * np.eye(n)
    )


def curvature(g, h, k, l, route="closed_form"):
    """Riemann curvature ``R_g(h, k) l`` in covariant form.

    ``route="definition"`` assembles it from ``dGamma`` and ``Gamma``;
    ``route="closed_form"`` evaluates the mixed closed form and lowers the
    index with ``g``.
    """
    pm = point_metric(g)
    _check(pm, h, k, l)
    if route == "definition":
        return _curvature_definition(pm, h, k, l)
    if route == "closed_form":
        return sym(pm.g @ curvature_mixed(pm.inv @ h, pm.inv @ k, pm.inv @ l))
    raise ValueError(f"unknown curvature route {route!r}")


def ricci_factor(n):
    """``(4 + n(n+1)) / 32``."""
    return (4 + n * (n + 1)) / 32.0


def trace_bracket(hm, lm):
    """Trace of ``K -> [[H, K], L]`` on symmetric matrices: ``tr H tr L - n tr(HL)``."""
    n = check_same_dim(hm, lm)
    return trace(hm) * trace(lm) - n * trace_inner(hm, lm)


def ricci_like(g, h, l):
    """Pointwise trace of ``k -> R_g(h, k) l``."""
    pm = point_metric(g)
    _check(pm, h, l)
    return ricci_factor(pm.n) * trace_bracket(pm.inv @ h, pm.inv @ l)


def ricci_like_traceless(g, h, l):
    """Same quantity written as ``-(n/32)(4+n(n+1)) <h_0, l>_g``."""
    pm = point_metric(g)
    _check(pm, h, l)
    n = pm.n
    h0 = h - (trace(pm.inv @ h) / n)[..., None, None] * pm.g
    return -n * ricci_factor(n) * inner_g(pm, h0, l)


def scalar_like(n):
    """The constant scalar-like curvature ``c(n)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return -n * ricci_factor(n) * (n * (n + 1) / 2.0 - 1)


def ricci_endomorphism(g, xi):
    """The (1,1) Ricci-like endomorphism ``xi -> -(n/32)(4+n(n+1)) xi_0``."""
    pm = point_metric(g)
    n = pm.n
    xi0 = xi - (trace(pm.inv @ xi) / n)[..., None, None] * pm.g
    return -n * ricci_factor(n) * xi0


def covariant_derivative_along(curve, field, dt, index):
    """``V_t - Gamma_g(g_t, V)`` at sample ``index`` of a uniformly sampled curve.

    ``curve`` and ``field`` have shape ``(T, ..., n, n)``.  Interior samples
    use central differences; the two end samples fall back to second-order
    one-sided stencils.
    """
    from .oracles import derivative_at

    curve = np.asarray(curve, dtype=float)
    field = np.asarray(field, dtype=float)
    g_t = derivative_at(curve, dt, index)
    v_t = derivative_at(field, dt, index)
    return v_t - christoffel(curve[index], g_t, field[index])


def vis_metric(g_tilde, g, h, k):
    """Metric ``<h,k>_g sqrt(det(g_tilde^{-1} g))`` on one fiber."""
    g_tilde = as_spd(g_tilde)
    pm = point_metric(g)
    if dim(g_tilde) != pm.n:
        raise DimensionMismatchError("reference metric dimension differs")
    ratio = pm.sqrt_det / np.sqrt(np.linalg.det(g_tilde))
    return inner_g(pm, h, k) * ratio


__all__ = [
    "PointMetric",
    "point_metric",
    "inner_g",
    "christoffel",
    "christoffel_mixed",
    "dgamma",
    "curvature",
    "curvature_mixed",
    "ricci_like",
    "ricci_like_traceless",
    "ricci_factor",
    "trace_bracket",
    "scalar_like",
    "ricci_endomorphism",
    "covariant_derivative_along",
    "vis_metric",
]
