"""Independent numerical oracles.

These routines never call the closed forms of :mod:`dewitt.geoexp` or
:mod:`dewitt.jacobi`; they integrate the second-order equations directly with
classical RK4, differentiate samples with finite differences, or trace linear
maps over an explicit basis.
"""

from dataclasses import dataclass
import math

import numpy as np

from .exceptions import IntegrationError, NonlinearMapError
from .pointgeo import _christoffel
from .symcore import SPD_RTOL, as_spd, as_sym, frob, sym, transpose

DEFAULT_SEED = 42
#: a step shrinking the metric below this factor in some direction is treated
#: as reaching the boundary of the SPD cone
COLLAPSE_RATIO = 0.5


@dataclass
class ODESolution:
    """Uniformly sampled RK4 solution.

    Arrays have shape ``(len(times), *batch, n, n)``.  Entries after a loss of
    positive definiteness are NaN; ``last_valid_time`` holds, per batch entry,
    the last grid time at which the state was still SPD (``t_end`` when the
    integration completed).
    """

    times: np.ndarray
    g: np.ndarray
    g_t: np.ndarray
    xi: np.ndarray = None
    xi_t: np.ndarray = None
    last_valid_time: np.ndarray = None
    lost_positivity: np.ndarray = None
    step: float = None

    @property
    def dt(self):
        return self.step if self.step is not None else self.times[1] - self.times[0]

    def raise_if_lost(self):
        if np.any(self.lost_positivity):
            idx = int(np.flatnonzero(self.lost_positivity)[0])
            t = float(np.ravel(self.last_valid_time)[idx])
            raise IntegrationError(
                f"positive definiteness lost after t={t!r} (batch index {idx})"
            )


def _spectral_inverse(g):
    """Inverse of a symmetric stack and a per-matrix SPD mask.

    Cholesky succeeds for the whole stack in the common case; otherwise the
    eigendecomposition sorts out which matrices left the cone.
    """
    finite = np.all(np.isfinite(g), axis=(-2, -1))
    if np.all(finite):
        try:
            np.linalg.cholesky(g)
        except np.linalg.LinAlgError:
            pass
        else:
            return sym(np.linalg.inv(g)), np.ones(g.shape[:-2], dtype=bool)
    safe = np.where(finite[..., None, None], sym(g), np.eye(g.shape[-1]))
    w, v = np.linalg.eigh(safe)
    ok = finite & (w[..., 0] > SPD_RTOL * w[..., -1]) & (w[..., -1] > 0)
    w = np.where(ok[..., None], w, 1.0)
    return (v / w[..., None, :]) @ transpose(v), ok


def _step_ratio_ok(g_old, g_new):
    """Whether ``g_old^{-1} g_new > COLLAPSE_RATIO`` (per matrix)."""
    gap = sym(g_new - COLLAPSE_RATIO * g_old)
    try:
        np.linalg.cholesky(gap)
        return np.ones(gap.shape[:-2], dtype=bool)
    except np.linalg.LinAlgError:
        pass
    w, v = np.linalg.eigh(sym(g_old))
    w = np.where(w > 0, w, 1.0)
    iroot = (v / np.sqrt(w)[..., None, :]) @ transpose(v)
    return np.linalg.eigvalsh(sym(iroot @ g_new @ iroot))[..., 0] > COLLAPSE_RATIO


def _geodesic_rhs(state):
    g, v = state
    ginv, ok = _spectral_inverse(g)
    return (v, _christoffel(g, ginv, v, v)), ok


def _jacobi_system_rhs(state):
    from .jacobi import _jacobi_rhs

    g, v, xi, xi_t = state
    ginv, ok = _spectral_inverse(g)
    return (v, _christoffel(g, ginv, v, v), xi_t, _jacobi_rhs(g, ginv, v, xi, xi_t)), ok


def _rk4(rhs, state, t_end, dt, record):
    if dt <= 0 or t_end < 0:
        raise ValueError("need dt > 0 and t_end >= 0")
    steps = max(1, math.ceil(t_end / dt - 1e-9))
    h = t_end / steps
    times = h * np.arange(steps + 1)
    batch = state[0].shape[:-2]
    alive = np.ones(batch, dtype=bool)
    last_valid = np.full(batch, t_end, dtype=float)
    k1, ok1 = rhs(state)
    if not np.all(ok1):
        raise IntegrationError("initial metric is not positive definite")
    history = [tuple(np.array(s) for s in state)] if record else None

    def add(y, k, c):
        return tuple(a + c * b for a, b in zip(y, k))

    y = state
    for step in range(steps):
        k2, ok2 = rhs(add(y, k1, 0.5 * h))
        k3, ok3 = rhs(add(y, k2, 0.5 * h))
        k4, ok4 = rhs(add(y, k3, h))
        y_new = tuple(
            a + (h / 6.0) * (b1 + 2 * b2 + 2 * b3 + b4)
            for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)
        )
        k_next, ok5 = rhs(y_new)
        good = ok1 & ok2 & ok3 & ok4 & ok5
        good &= _step_ratio_ok(y[0], np.where(good[..., None, None], y_new[0], y[0]))
        died = alive & ~good
        if np.any(died):
            last_valid = np.where(died, times[step], last_valid)
            alive = alive & good
        mask = alive[..., None, None]
        # dead entries keep their last valid state so the eigensolver never sees NaN
        y = tuple(np.where(mask, a, b) for a, b in zip(y_new, y))
        if np.all(alive):
            k1, ok1 = k_next, ok5
        else:
            k1, ok1 = rhs(y)
        if record:
            history.append(tuple(np.where(mask, a, np.nan) for a in y))
        if not np.any(alive):
            if record:
                pad = tuple(np.full_like(a, np.nan) for a in y)
                history.extend([pad] * (steps - step - 1))
            break
    if record:
        stacked = tuple(np.stack([hst[i] for hst in history]) for i in range(len(state)))
    else:
        mask = alive[..., None, None]
        stacked = tuple(np.where(mask, a, np.nan)[None] for a in y)
        times = times[-1:]
    return times, stacked, last_valid, ~alive, h


def integrate_geodesic(g0, h, t_end, dt, record=True):
    """RK4 for ``g_tt = Gamma_g(g_t, g_t)`` with ``g(0) = g0``, ``g_t(0) = h``.

    Batched over leading axes of ``g0``/``h``.  An instance is flagged and
    frozen at NaN once any RK4 stage leaves the SPD cone, or once a single
    step shrinks the metric by more than ``COLLAPSE_RATIO`` in some direction.
    The second test catches conformal collapse ``g -> 0`` that a fixed step
    would otherwise step across.
    """
    g0 = as_spd(g0)
    h = as_sym(h)
    g0, h = np.broadcast_arrays(g0, h)
    times, (g, v), last, lost, step = _rk4(_geodesic_rhs, (g0.copy(), h.copy()), t_end, dt, record)
    return ODESolution(times, g, v, last_valid_time=last, lost_positivity=lost, step=step)


def integrate_jacobi(g0, h, k, l, t_end, dt, record=True):
    """RK4 of the geodesic coupled to the Jacobi equation.

    The initial covariant derivative ``l`` is converted to the coordinate
    derivative ``xi_t(0) = l + Gamma_{g0}(h, k)``.
    """
    g0 = as_spd(g0)
    h, k, l = (as_sym(x) for x in (h, k, l))
    g0, h, k, l = np.broadcast_arrays(g0, h, k, l)
    ginv, _ = _spectral_inverse(g0)
    xi_t0 = l + _christoffel(g0, ginv, h, k)
    state = (g0.copy(), h.copy(), k.copy(), xi_t0)
    times, (g, v, xi, xi_t), last, lost, step = _rk4(_jacobi_system_rhs, state, t_end, dt, record)
    return ODESolution(times, g, v, xi, xi_t, last, lost, step)


def sym_basis(n):
    """Orthonormal basis of symmetric matrices for ``(H, K) -> tr(HK)``."""
    basis = []
    for i in range(n):
        e = np.zeros((n, n))
        e[i, i] = 1.0
        basis.append(e)
    for i in range(n):
        for j in range(i + 1, n):
            e = np.zeros((n, n))
            e[i, j] = e[j, i] = 1.0 / math.sqrt(2.0)
            basis.append(e)
    return np.array(basis)


def _random_sym(rng, n):
    a = rng.standard_normal((n, n))
    return sym(a)


def basis_trace(linear_map, n, rng=None, check=True):
    """Trace of a linear endomorphism of symmetric ``n x n`` matrices.

    Summed as ``sum_i tr(map(B_i) B_i)`` over :func:`sym_basis`.  With
    ``check`` the map is probed for linearity and the trace is recomputed in a
    randomly rotated orthonormal basis.
    """
    basis = sym_basis(n)
    images = [np.asarray(linear_map(b), dtype=float) for b in basis]
    total = math.fsum(float(np.sum(img * b)) for img, b in zip(images, basis))
    if not check:
        return total
    rng = np.random.default_rng(DEFAULT_SEED) if rng is None else rng
    scale = max(float(np.max(frob(np.array(images)))), 1e-300)

    x, y = _random_sym(rng, n), _random_sym(rng, n)
    a, b = rng.standard_normal(2)
    lhs = np.asarray(linear_map(a * x + b * y), dtype=float)
    rhs = a * np.asarray(linear_map(x)) + b * np.asarray(linear_map(y))
    dev = float(frob(lhs - rhs))
    ref = max(float(frob(lhs)), float(frob(rhs)), scale)
    # a map that vanishes up to roundoff has no meaningful relative deviation
    floor = 1e-13 * (abs(a) * float(frob(x)) + abs(b) * float(frob(y)))
    if dev > 1e-8 * ref + floor:
        raise NonlinearMapError(f"map failed the linearity probe (relative deviation {dev / ref:.3g})")

    m = len(basis)
    q, _ = np.linalg.qr(rng.standard_normal((m, m)))
    rotated = np.einsum("ij,ikl->jkl", q, basis)
    alt = math.fsum(
        float(np.sum(np.asarray(linear_map(bb), dtype=float) * bb)) for bb in rotated
    )
    if abs(alt - total) > 1e-10 * max(1.0, abs(total), scale):
        raise NonlinearMapError(
            f"trace depends on the basis ({total!r} vs {alt!r}); the map is not linear"
        )
    return total


def central_diff(samples, spacing, order=1, axis=0):
    """Second-order accurate first or second derivative of uniform samples.

    Interior points use central stencils and the two ends use second-order
    one-sided stencils.
    """
    f = np.moveaxis(np.asarray(samples, dtype=float), axis, 0)
    if f.shape[0] < 5:
        raise ValueError("central_diff needs at least 5 samples")
    out = np.empty_like(f)
    if order == 1:
        out[1:-1] = (f[2:] - f[:-2]) / (2 * spacing)
        out[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * spacing)
        out[-1] = (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * spacing)
    elif order == 2:
        out[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / spacing**2
        out[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / spacing**2
        out[-1] = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / spacing**2
    else:
        raise ValueError("order must be 1 or 2")
    return np.moveaxis(out, 0, axis)


def derivative_at(samples, spacing, index):
    """First derivative at one sample index (three-point stencil)."""
    f = np.asarray(samples, dtype=float)
    last = f.shape[0] - 1
    if last < 2:
        raise ValueError("need at least 3 samples")
    if index < 0:
        index += last + 1
    if 0 < index < last:
        return (f[index + 1] - f[index - 1]) / (2 * spacing)
    if index == 0:
        return (-3 * f[0] + 4 * f[1] - f[2]) / (2 * spacing)
    return (3 * f[last] - 4 * f[last - 1] + f[last - 2]) / (2 * spacing)
