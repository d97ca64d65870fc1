"""Sampled metric fields and the global quantities built from them.

The base manifold enters only through quadrature data: a list of point ids
with positive weights standing for ``dx``.  Since the metric involves no
spatial derivatives, fields are just stacks of matrices, one per point, and
every geometric operation acts point by point.  Reductions over points use
``math.fsum`` in point order, so results do not depend on how the per-point
work was scheduled.
"""

from dataclasses import dataclass, field
from functools import cached_property
import math
from typing import NamedTuple

import numpy as np

from .exceptions import DewittError, DomainError, FieldPointError
from .geoexp import ExistenceInterval, GeodesicCoeffs, exp_point, geodesic_point, log_point
from .jacobi import jacobi_field
from .oracles import central_diff
from .pointgeo import PointMetric, christoffel, inner_g, ricci_factor, ricci_like
from .symcore import as_spd, as_sym, trace


@dataclass(frozen=True)
class SampledBase:
    n: int
    ids: tuple
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        ids = tuple(str(i) for i in self.ids)
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if not ids:
            raise ValueError("a sampled base needs at least one point")
        if len(set(ids)) != len(ids):
            raise ValueError("point ids must be unique")
        if len(weights) != len(ids):
            raise ValueError("one weight per point is required")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            raise ValueError("quadrature weights must be positive")
        if int(self.n) < 1:
            raise ValueError("n must be >= 1")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def single(cls, n, weight=1.0, point_id="p0"):
        return cls(n, (point_id,), np.array([weight]))

    def __len__(self):
        return len(self.ids)

    def same_as(self, other):
        return (
            self is other
            or (self.n == other.n and self.ids == other.ids and np.array_equal(self.weights, other.weights))
        )


def _require_same_base(*fields):
    base = fields[0].base
    for f in fields[1:]:
        if not base.same_as(f.base):
            raise ValueError("fields live on different sampled bases")
    return base


def _stack(base, values):
    values = np.asarray(values, dtype=float)
    if values.shape != (len(base), base.n, base.n):
        raise ValueError(f"expected values of shape {(len(base), base.n, base.n)}, got {values.shape}")
    return values


def _pointwise(base, check, values):
    for pid, v in zip(base.ids, values):
        try:
            check(v)
        except DewittError as exc:
            raise FieldPointError(pid, exc) from exc


@dataclass(frozen=True, eq=False)
class MetricField:
    base: SampledBase
    values: np.ndarray

    def __post_init__(self):
        values = _stack(self.base, self.values)
        _pointwise(self.base, as_spd, values)
        object.__setattr__(self, "values", as_spd(values))

    @cached_property
    def metric(self):
        return PointMetric.from_array(self.values)


@dataclass(frozen=True, eq=False)
class TangentField:
    base: SampledBase
    values: np.ndarray

    def __post_init__(self):
        values = _stack(self.base, self.values)
        _pointwise(self.base, as_sym, values)
        object.__setattr__(self, "values", as_sym(values))

    @classmethod
    def zeros(cls, base):
        return cls(base, np.zeros((len(base), base.n, base.n)))


@dataclass(frozen=True, eq=False)
class FieldPath:
    """Fields sampled at increasing times; ``frames`` has shape ``(T, points, n, n)``."""

    base: SampledBase
    times: np.ndarray
    frames: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).reshape(-1)
        frames = np.asarray(self.frames, dtype=float)
        if len(times) < 1 or np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        if frames.shape != (len(times), len(self.base), self.base.n, self.base.n):
            raise ValueError("frames do not match times and base")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "frames", frames)

    def uniform_dt(self):
        steps = np.diff(self.times)
        if len(steps) == 0:
            raise ValueError("need at least two samples")
        dt = (self.times[-1] - self.times[0]) / len(steps)
        if np.max(np.abs(steps - dt)) > 1e-9 * max(1.0, abs(dt)):
            raise ValueError("time grid is not uniform")
        return dt


class MetricPath(FieldPath):
    """A curve ``t -> g(t)`` of metric fields."""

    def __post_init__(self):
        super().__post_init__()
        _pointwise(self.base, as_spd, self.frames.transpose(1, 0, 2, 3))

    def frame(self, i):
        return MetricField(self.base, self.frames[i])


class TangentPath(FieldPath):
    """A vector field along a curve of metrics (e.g. a Jacobi field)."""


def global_inner(g, h, k):
    """``G_g(h, k) = sum_x tr(g^{-1} h g^{-1} k) sqrt(det g) w_x``."""
    base = _require_same_base(g, h, k)
    pm = g.metric
    local = inner_g(pm, h.values, k.values) * pm.sqrt_det * base.weights
    return math.fsum(local.tolist())


def _time_window(path, a, b):
    t = path.times
    a = t[0] if a is None else float(a)
    b = t[-1] if b is None else float(b)
    tol = 1e-9 * max(1.0, abs(t[-1] - t[0]))
    if a < t[0] - tol or b > t[-1] + tol or b < a:
        raise ValueError(f"[{a}, {b}] is not inside the path's time range [{t[0]}, {t[-1]}]")
    i0 = int(np.argmin(np.abs(t - a)))
    i1 = int(np.argmin(np.abs(t - b)))
    if abs(t[i0] - a) > tol or abs(t[i1] - b) > tol:
        raise ValueError("integration limits must be sample times")
    return i0, i1


def _trapezoid(values, dt):
    values = list(values)
    if len(values) < 2:
        return 0.0
    return dt * math.fsum([0.5 * values[0], *values[1:-1], 0.5 * values[-1]])


def _speed_density(base, frames, velocity):
    """``sum_x G(g_t, g_t)`` per time, as a list (fsum over points)."""
    pm = PointMetric.from_array(frames)
    local = inner_g(pm, velocity, velocity) * pm.sqrt_det * base.weights
    return [math.fsum(row) for row in local.tolist()]


def path_speed(path):
    """``G_g(g_t, g_t)`` at every sample, with second-order differences."""
    dt = path.uniform_dt()
    vel = central_diff(path.frames, dt, order=1, axis=0)
    return np.array(_speed_density(path.base, path.frames, vel))


def energy(path, a=None, b=None):
    """``E = 1/2 int_a^b G_g(g_t, g_t) dt`` by the composite trapezoid rule."""
    i0, i1 = _time_window(path, a, b)
    dt = path.uniform_dt()
    speed = path_speed(path)
    return 0.5 * _trapezoid(speed[i0 : i1 + 1], dt)


class FirstVariation(NamedTuple):
    value: float
    boundary: float
    integral: float
    #: boundary terms plus the acceleration and Christoffel parts of the
    #: integrand, each in absolute value; the scale of ``value`` even when the
    #: parts cancel
    magnitude: float


def first_variation_terms(base, times, s_values, frames, a=None, b=None):
    """Right-hand side of the first variation formula at ``s = 0``.

    ``frames[i, j]`` is the metric field ``g(times[i], s_values[j])`` (shape
    ``(T, S, points, n, n)``); the ``s`` grid must be uniform and contain 0 at
    an interior index.  The integrand is ``G(-g_tt + Gamma_g(g_t, g_t), g_s)``.
    """
    times = np.asarray(times, dtype=float)
    s_values = np.asarray(s_values, dtype=float)
    frames = np.asarray(frames, dtype=float)
    if frames.shape[:2] != (len(times), len(s_values)):
        raise ValueError("frames do not match the (t, s) grid")
    j = np.flatnonzero(np.abs(s_values) <= 1e-15 * max(1.0, np.max(np.abs(s_values))))
    if len(j) != 1 or j[0] in (0, len(s_values) - 1):
        raise ValueError("the s grid must contain 0 at an interior index")
    j = int(j[0])
    ds = s_values[j + 1] - s_values[j]
    if not np.isclose(s_values[j] - s_values[j - 1], ds, rtol=1e-9, atol=0):
        raise ValueError("the s grid is not uniform around 0")
    path = MetricPath(base, times, frames[:, j])
    i0, i1 = _time_window(path, a, b)
    dt = path.uniform_dt()

    g = frames[:, j]
    g_s = (frames[:, j + 1] - frames[:, j - 1]) / (2 * ds)
    g_t = central_diff(g, dt, order=1, axis=0)
    g_tt = central_diff(g, dt, order=2, axis=0)
    pm = PointMetric.from_array(g)

    vol = pm.sqrt_det * base.weights
    edge = inner_g(pm, g_t, g_s) * vol
    accel = (inner_g(pm, g_tt, g_s) * vol)[i0 : i1 + 1]
    gamma = (inner_g(pm, christoffel(pm, g_t, g_t), g_s) * vol)[i0 : i1 + 1]
    upper, lower = math.fsum(edge[i1].tolist()), math.fsum(edge[i0].tolist())
    integral = _trapezoid([math.fsum(row) for row in (gamma - accel).tolist()], dt)
    # acceleration and Christoffel parts kept apart: along a geodesic they cancel
    spread = np.abs(accel) + np.abs(gamma)
    magnitude = (
        math.fsum(np.abs(edge[i1]).tolist())
        + math.fsum(np.abs(edge[i0]).tolist())
        + _trapezoid([math.fsum(row) for row in spread.tolist()], dt)
    )
    boundary = upper - lower
    return FirstVariation(boundary + integral, boundary, integral, magnitude)


def first_variation(base, times, s_values, frames, a=None, b=None):
    """``dE/ds`` at ``s = 0`` from the first variation formula (see
    :func:`first_variation_terms`)."""
    return first_variation_terms(base, times, s_values, frames, a, b).value


def global_ricci(g, xi, eta):
    """``Ric(xi, eta) = sum_x Ric_g(xi, eta) sqrt(det g) w_x``."""
    base = _require_same_base(g, xi, eta)
    pm = g.metric
    local = ricci_like(pm, xi.values, eta.values) * pm.sqrt_det * base.weights
    return math.fsum(local.tolist())


def traceless_field(g, xi):
    """``xi_0 = xi - (1/n) tr(g^{-1} xi) g`` pointwise."""
    pm = g.metric
    n = g.base.n
    vals = xi.values - (trace(pm.inv @ xi.values) / n)[:, None, None] * g.values
    return TangentField(xi.base, vals)


def global_ricci_traceless(g, xi, eta):
    """The same tensor as ``-(n/32)(4+n(n+1)) G(xi_0, eta)``."""
    n = g.base.n
    return -n * ricci_factor(n) * global_inner(g, traceless_field(g, xi), eta)


def field_map(op, *fields):
    """Apply ``op`` point by point to fields on a shared base.

    ``op`` receives one matrix per field; any package error is re-raised as
    :class:`FieldPointError` naming the offending point.
    """
    base = _require_same_base(*fields)
    out = []
    for i, pid in enumerate(base.ids):
        try:
            out.append(op(*(f.values[i] for f in fields)))
        except DewittError as exc:
            raise FieldPointError(pid, exc) from exc
    return out


def field_exp(g0, h):
    return MetricField(g0.base, np.array(field_map(exp_point, g0, h)))


def field_log(g0, g):
    return TangentField(g0.base, np.array(field_map(log_point, g0, g)))


def field_existence_interval(g0, h):
    """Existence interval of the geodesic of fields; ``point`` is a point id."""
    base = _require_same_base(g0, h)
    sup = GeodesicCoeffs.from_direction(g0.metric, h.values).sup_t()
    if not np.any(np.isfinite(sup)):
        return ExistenceInterval(np.inf)
    i = int(np.argmin(sup))
    return ExistenceInterval(float(sup[i]), base.ids[i])


def _check_times(g0, h, times):
    interval = field_existence_interval(g0, h)
    t_max = float(np.max(np.abs(times)))
    if t_max >= interval.sup_t:
        raise FieldPointError(
            interval.point,
            DomainError(
                f"t={t_max!r} is outside the existence interval [0, {interval.sup_t!r})",
                predicate="existence",
            ),
        )
    return interval


def field_geodesic(g0, h, times):
    """Closed-form geodesic of fields sampled at ``times``."""
    times = np.asarray(times, dtype=float)
    _check_times(g0, h, times)
    cols = field_map(lambda g, v: geodesic_point(g, v, times), g0, h)
    return MetricPath(g0.base, times, np.stack(cols, axis=1))


def field_jacobi(g0, h, k, l, times):
    """Jacobi field of fields sampled at ``times`` (a :class:`TangentPath`)."""
    times = np.asarray(times, dtype=float)
    _check_times(g0, h, times)
    cols = field_map(lambda g, a, b, c: jacobi_field(g, a, b, c, times), g0, h, k, l)
    return TangentPath(g0.base, times, np.stack(cols, axis=1))
