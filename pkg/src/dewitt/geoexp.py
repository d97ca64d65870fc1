"""Closed-form geodesics, exponential map and its inverse.

A geodesic starting at ``g0`` with velocity ``h`` is

    g(t) = g0 exp(a(t) Id + b(t) H0),     H = g0^{-1} h,  H0 = H - tr(H)/n Id

with ``a(t) = (2/n) log((1 + t trH/4)^2 + (n/16) tr(H0^2) t^2)`` and ``b(t)``
an angle divided by ``sqrt(n tr(H0^2))/4``.  The angle is the continuous
argument of ``(4 + t trH) + i t sqrt(n tr(H0^2))``; for ``t >= 0`` the imaginary
part never changes sign, so ``atan2`` yields the continuous branch directly,
including past ``t = -4/trH`` where the angle crosses ``pi/2``.

Internally every mixed tensor ``g0^{-1} x`` is handled through its whitened
twin ``g0^{-1/2} x g0^{-1/2}``; both are similar, so traces and spectra agree,
and the whitened one is symmetric.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .pointgeo import PointMetric, point_metric
from .symcore import as_sym, check_same_dim, frob, sym, sym_exp, sym_func, trace, traceless_part

#: relative threshold below which ``tr(H0^2)`` counts as zero
EPS_TL = 1e-12
#: slack on the excluded ray ``tr H <= -4`` so that ``-(4/n) g0`` is rejected
#: even when its trace rounds to slightly above -4
RAY_SLACK = 4e-12


def tl_threshold(tr_h2):
    return EPS_TL * np.maximum(1.0, tr_h2)


@dataclass(frozen=True, eq=False)
class GeodesicCoeffs:
    """Per-point scalars and tensors that drive ``a(t)`` and ``b(t)``."""

    g0: PointMetric
    Hw: np.ndarray  # whitened H, symmetric
    H0w: np.ndarray  # whitened traceless part
    trH: np.ndarray
    trH2: np.ndarray
    d0: np.ndarray  # tr(H0^2)

    @classmethod
    def from_direction(cls, g0, h):
        pm = point_metric(g0)
        h = as_sym(h)
        check_same_dim(pm.g, h)
        hw = pm.whiten(h)
        h0w = traceless_part(hw)
        return cls(
            g0=pm,
            Hw=hw,
            H0w=h0w,
            trH=trace(hw),
            trH2=frob(hw) ** 2,
            d0=frob(h0w) ** 2,
        )

    @property
    def n(self):
        return self.g0.n

    @property
    def degenerate(self):
        """Points where the traceless part vanishes (the set ``N^h``)."""
        return self.d0 < tl_threshold(self.trH2)

    @property
    def H(self):
        """Mixed tensor ``g0^{-1} h``."""
        return self.g0.inv_root @ self.Hw @ self.g0.root

    @property
    def H0(self):
        return self.g0.inv_root @ self.H0w @ self.g0.root

    def sup_t(self):
        """Supremum of the existence interval ``[0, sup_t)`` at each point."""
        with np.errstate(divide="ignore"):
            blow = self.degenerate & (self.trH < 0)
            return np.where(blow, -4.0 / np.where(blow, self.trH, -1.0), np.inf)


@dataclass(frozen=True)
class ExistenceInterval:
    """Maximal interval ``[0, sup_t)`` of a geodesic of fields.

    ``point`` is the batch index realising the bound (``None`` if unbounded).
    """

    sup_t: float
    point: object = None

    def contains(self, t):
        return 0 <= t < self.sup_t


def _abscissa(tr_h, tr_h2, d0, degenerate, n, t):
    """``a(t)``, ``b(t)`` for ``t >= 0`` from the four scalars."""
    a = (2.0 / n) * np.log1p(0.5 * t * tr_h + (n / 16.0) * t * t * tr_h2)
    root = np.sqrt(n * np.where(degenerate, 1.0, d0))
    theta = np.arctan2(t * root, 4.0 + t * tr_h)
    with np.errstate(divide="ignore", invalid="ignore"):
        b_conformal = t / (1.0 + 0.25 * t * tr_h)
    b = np.where(degenerate, b_conformal, 4.0 * theta / root)
    return a, b


def _check_time(coeffs, t, sign):
    t = np.asarray(t, dtype=float)
    tr_eff = sign * coeffs.trH
    blow = coeffs.degenerate & (tr_eff < 0)
    with np.errstate(divide="ignore"):
        sup_t = np.where(blow, -4.0 / np.where(blow, tr_eff, -1.0), np.inf)
    bad = np.broadcast_to(np.abs(t) >= sup_t, np.broadcast_shapes(t.shape, sup_t.shape))
    if np.any(bad):
        idx = int(np.flatnonzero(bad)[0])
        bound = float(np.broadcast_to(sup_t, bad.shape).flat[idx])
        raise DomainError(
            f"t={float(np.broadcast_to(np.abs(t), bad.shape).flat[idx])!r} is outside the "
            f"existence interval [0, {bound!r})",
            index=idx,
            predicate="existence",
        )


def geodesic_scalars(coeffs, t):
    """``(a(t), b(t))``; ``t`` must lie in the existence interval."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("geodesic_scalars expects t >= 0", predicate="existence")
    _check_time(coeffs, t, 1.0)
    return _abscissa(coeffs.trH, coeffs.trH2, coeffs.d0, coeffs.degenerate, coeffs.n, t)


def _scalars_signed(coeffs, t):
    # negative t runs the geodesic of -h forward
    t = np.asarray(t, dtype=float)
    sign = np.where(t < 0, -1.0, 1.0)
    _check_time(coeffs, t, sign)
    a, b = _abscissa(
        sign * coeffs.trH, coeffs.trH2, coeffs.d0, coeffs.degenerate, coeffs.n, np.abs(t)
    )
    return a, sign * b


def geodesic_from_coeffs(coeffs, t):
    a, b = _scalars_signed(coeffs, t)
    n = coeffs.n
    exponent = a[..., None, None] * np.eye(n) + b[..., None, None] * coeffs.H0w
    pm = coeffs.g0
    g = sym(pm.root @ sym_exp(sym(exponent)) @ pm.root)
    # a vanishing exponent gives g0 itself, without the roundoff of root @ root
    still = np.all(exponent == 0, axis=(-2, -1))[..., None, None]
    return np.where(still, pm.g, g)


def geodesic_point(g0, h, t):
    """``g(t) = g0 exp(a(t) Id + b(t) H0)``.

    ``t`` broadcasts against the batch shape of ``(g0, h)``.  Negative ``t`` is
    evaluated as the geodesic of ``-h`` at ``-t``.
    """
    return geodesic_from_coeffs(GeodesicCoeffs.from_direction(g0, h), t)


def geodesic_velocity_mixed(coeffs, t):
    """``P(t) = g(t)^{-1} g'(t)``, returned as a mixed tensor."""
    t = np.asarray(t, dtype=float)
    a, _ = geodesic_scalars(coeffs, t)
    n = coeffs.n
    scale = np.exp(-0.5 * n * a)
    coef = (4.0 * coeffs.trH + n * t * coeffs.trH2) / (4.0 * n)
    pw = scale[..., None, None] * (coef[..., None, None] * np.eye(n) + coeffs.H0w)
    return coeffs.g0.inv_root @ pw @ coeffs.g0.root


def existence_interval(g0, h):
    """Existence interval of the geodesic of a stack of points (a sampled field).

    The bound is the minimum over points, i.e. ``-4 / t^h`` with ``t^h`` the
    smallest ``tr H`` among points where ``H0 = 0``, when that is negative.
    """
    coeffs = GeodesicCoeffs.from_direction(g0, h)
    sup = np.atleast_1d(coeffs.sup_t())
    if not np.any(np.isfinite(sup)):
        return ExistenceInterval(np.inf)
    idx = int(np.argmin(sup))
    return ExistenceInterval(float(sup.flat[idx]), idx)


def in_exp_domain(g0, h):
    """Whether ``h`` avoids the excluded ray ``(-inf, -4/n] g0``."""
    coeffs = GeodesicCoeffs.from_direction(g0, h)
    return ~(coeffs.degenerate & (coeffs.trH <= -4.0 + RAY_SLACK))


def _whitened_log(pm, g):
    return sym_func(pm.whiten(g), np.log)


def in_log_domain(g0, g):
    """Whether ``tr(A0^2) < 16 pi^2 / n`` with ``A = log(g0^{-1} g)``."""
    pm = point_metric(g0)
    g = point_metric(g).g
    aw = _whitened_log(pm, g)
    q = frob(traceless_part(aw)) ** 2
    return q < (4 * np.pi) ** 2 / pm.n


def _first_false(mask):
    mask = np.asarray(mask)
    return int(np.flatnonzero(~mask)[0]) if mask.ndim else None


def exp_point(g0, h):
    """Riemannian exponential ``Exp_{g0}(h)`` (the geodesic at ``t = 1``)."""
    coeffs = GeodesicCoeffs.from_direction(g0, h)
    ok = ~(coeffs.degenerate & (coeffs.trH <= -4.0 + RAY_SLACK))
    if not np.all(ok):
        raise DomainError(
            "direction lies on the excluded ray (-inf, -4/n] g0",
            index=_first_false(ok),
            predicate="U-ray",
        )
    return geodesic_from_coeffs(coeffs, 1.0)


def log_point(g0, g):
    """Inverse of :func:`exp_point` on its image.

    With ``A = log(g0^{-1} g)`` and ``x = sqrt(n tr(A0^2)) / 4`` the direction is
    ``(4/n)(e^{trA/4} cos x - 1) Id + e^{trA/4} (sin x / x) A0``, lowered by
    ``g0``.  ``e^s cos x - 1`` is evaluated as ``expm1(s) - 2 e^s sin^2(x/2)``.
    """
    pm = point_metric(g0)
    g = point_metric(g).g
    n = pm.n
    same = np.all(g == pm.g, axis=(-2, -1))[..., None, None]
    aw = np.where(same, 0.0, _whitened_log(pm, g))
    a0 = traceless_part(aw)
    q = frob(a0) ** 2
    ok = q < (4 * np.pi) ** 2 / n
    if not np.all(ok):
        raise DomainError(
            "target violates tr(A0^2) < 16 pi^2 / n",
            index=_first_false(ok),
            predicate="V-inequality",
        )
    s = 0.25 * trace(aw)
    x = 0.25 * np.sqrt(n * q)
    es = np.exp(s)
    id_coef = (4.0 / n) * (np.expm1(s) - 2.0 * es * np.sin(0.5 * x) ** 2)
    a0_coef = es * np.sinc(x / np.pi)
    hw = id_coef[..., None, None] * np.eye(n) + a0_coef[..., None, None] * a0
    return pm.unwhiten(hw)


def figure1_map(x, y, n):
    """Exponential map at 0 restricted to the plane spanned by ``Id`` and a
    traceless ``A`` with ``tr(A^2) = n``; ``y`` is the ``Id`` coordinate.

    Returns ``(u, v)`` with ``u`` in ``(-4 pi/n, 4 pi/n)``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    bad = (x == 0) & (y <= -4.0 / n)
    if np.any(bad):
        raise DomainError(
            "point lies on the excluded ray {0} x (-inf, -4/n]",
            index=int(np.flatnonzero(bad)[0]) if bad.ndim else None,
            predicate="U-ray",
        )
    re = 4.0 + n * y
    im = n * x
    u = (4.0 / n) * np.arctan2(im, re)
    v = (2.0 / n) * np.log((re * re + im * im) / 16.0)
    return u, v
