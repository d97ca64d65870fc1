"""Verification suites: every closed form checked against an independent oracle.

Each suite returns a :class:`SuiteResult` holding one :class:`CheckResult` per
property, with the largest error seen and the tolerance it was held to.
Checks of exact algebraic identities honour the ``tol`` override; checks
whose error is a discretization error keep their own tolerances, since no
single number fits both kinds.
"""

from dataclasses import dataclass, field
import math
import time

import numpy as np

from .fieldmanifold import SampledBase, MetricPath, energy, first_variation_terms
from .geoexp import exp_point, geodesic_point, log_point
from .jacobi import VariationData, jacobi_field, variation_alpha
from .oracles import DEFAULT_SEED, basis_trace, integrate_geodesic, integrate_jacobi
from .pointgeo import (
    PointMetric,
    covariant_derivative_along,
    curvature,
    inner_g,
    ricci_endomorphism,
    ricci_like,
    scalar_like,
    trace_bracket,
)
from .symcore import ad, frob, sym


@dataclass
class CheckResult:
    name: str
    error: float
    tolerance: float
    count: int
    algebraic: bool = False

    @property
    def passed(self):
        return bool(np.isfinite(self.error)) and self.error <= self.tolerance


@dataclass
class SuiteResult:
    name: str
    checks: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    @property
    def max_error(self):
        return max((c.error for c in self.checks), default=0.0)

    def lines(self):
        status = "PASS" if self.passed else "FAIL"
        out = [f"[{status}] {self.name}: max error {self.max_error:.3e} ({self.seconds:.1f} s)"]
        for c in self.checks:
            mark = "ok " if c.passed else "BAD"
            out.append(f"    {mark} {c.name:<34} {c.error:.3e} <= {c.tolerance:.1e}  (n={c.count})")
        return out


# random instances


def random_sym(rng, n, batch=(), scale=1.0):
    a = rng.standard_normal(tuple(batch) + (n, n))
    return scale * sym(a)


def random_spd(rng, n, batch=(), spread=0.5):
    """``exp`` of a random symmetric matrix; eigenvalues within ``e^{+-3 spread}``-ish."""
    w, v = np.linalg.eigh(random_sym(rng, n, batch, spread))
    return sym((v * np.exp(w)[..., None, :]) @ np.swapaxes(v, -1, -2))


def _rel(diff, ref, floor=1.0):
    return frob(diff) / np.maximum(floor, frob(ref))


# geodesic suite


def check_geodesic_vs_rk4(rng, per_n=200, dims=(2, 3, 4), dt=1e-3, t_end=1.0):
    worst, count = 0.0, 0
    for n in dims:
        g0 = random_spd(rng, n, (per_n,))
        h = random_sym(rng, n, (per_n,))
        sol = integrate_geodesic(g0, h, t_end, dt)
        sol.raise_if_lost()
        closed = geodesic_point(g0[None], h[None], sol.times[:, None])
        worst = max(worst, float(np.max(_rel(closed - sol.g, closed))))
        count += per_n
    return CheckResult("closed form vs RK4 on [0,1]", worst, 1e-6, count)


def blowup_instances(rng, count=50, dims=(2, 3, 4)):
    """Conformal directions ``h = c g0`` with ``c < 0``; ``sup_t = -4/(n c)``."""
    out = []
    for i in range(count):
        n = dims[i % len(dims)]
        g0 = random_spd(rng, n)
        sup_t = rng.uniform(0.5, 2.5)
        out.append((g0, (-4.0 / (n * sup_t)) * g0, sup_t))
    return out


def check_blowup(rng, count=50, dt=1e-3):
    cases = blowup_instances(rng, count)
    worst = 0.0
    for n in sorted({g0.shape[-1] for g0, _, _ in cases}):
        group = [c for c in cases if c[0].shape[-1] == n]
        g0 = np.array([c[0] for c in group])
        h = np.array([c[1] for c in group])
        sup_t = np.array([c[2] for c in group])
        sol = integrate_geodesic(g0, h, float(sup_t.max()) + 20 * dt, dt, record=False)
        step = sol.dt
        last = sol.last_valid_time
        # 0 inside [sup_t - 10 dt, sup_t]; otherwise the distance outside it, in steps
        miss = np.maximum(np.maximum(sup_t - 10 * step - last, last - sup_t), 0.0) / step
        miss = np.where(sol.lost_positivity, miss, np.inf)
        worst = max(worst, float(np.max(miss)))
    return CheckResult("blow-up inside [sup-10dt, sup] (dt)", worst, 0.0, count)


def suite_geodesic(rng, tol=None, scale=1.0):
    return [
        check_geodesic_vs_rk4(rng, per_n=_count(200, scale)),
        check_blowup(rng, count=_count(50, scale)),
    ]


# exp / log


def random_log_target(rng, n, batch):
    """Random ``(g0, g)`` with ``tr(A0^2) < 16 pi^2 / n`` for ``A = log(g0^{-1} g)``."""
    g0 = random_spd(rng, n, batch)
    pm = PointMetric.from_array(g0)
    a = random_sym(rng, n, batch)
    a0 = a - (np.trace(a, axis1=-2, axis2=-1) / n)[..., None, None] * np.eye(n)
    bound = 4 * math.pi / math.sqrt(n)
    target = rng.uniform(0.0, 0.98, batch) * bound
    a0 = a0 * (target / np.maximum(frob(a0), 1e-300))[..., None, None]
    aw = a0 + rng.uniform(-2, 2, batch)[..., None, None] * np.eye(n)
    w, v = np.linalg.eigh(aw)
    ew = (v * np.exp(w)[..., None, :]) @ np.swapaxes(v, -1, -2)
    return g0, pm.unwhiten(ew)


def check_exp_log(rng, per_n=500, dims=(2, 3, 4), tol=1e-9):
    worst_le, worst_el = 0.0, 0.0
    for n in dims:
        g0 = random_spd(rng, n, (per_n,))
        h = random_sym(rng, n, (per_n,), rng.uniform(0.1, 2.0))
        pm = PointMetric.from_array(g0)
        back = log_point(pm, exp_point(pm, h))
        worst_le = max(worst_le, float(np.max(frob(pm.whiten(back - h)) / frob(pm.whiten(h)))))
        g0, g = random_log_target(rng, n, (per_n,))
        pm = PointMetric.from_array(g0)
        again = exp_point(pm, log_point(pm, g))
        worst_el = max(worst_el, float(np.max(frob(pm.whiten(again - g)) / frob(pm.whiten(g)))))
    count = per_n * len(dims)
    return [
        CheckResult("Log(Exp(h)) = h", worst_le, tol, count, True),
        CheckResult("Exp(Log(g)) = g", worst_el, tol, count, True),
    ]


def suite_explog(rng, tol=None, scale=1.0):
    return check_exp_log(rng, per_n=_count(500, scale), tol=tol or 1e-9)


# curvature and traces


def check_curvature(rng, per_n=1000, dims=(2, 3, 4), tol=1e-9):
    worst = dict(route=0.0, anti=0.0, bianchi=0.0, skew=0.0)
    for n in dims:
        g = random_spd(rng, n, (per_n,))
        h, k, l, m = (random_sym(rng, n, (per_n,)) for _ in range(4))
        pm = PointMetric.from_array(g)
        r_def = curvature(pm, h, k, l, route="definition")
        r_cf = curvature(pm, h, k, l)
        ref = frob(pm.whiten(r_cf))
        worst["route"] = max(worst["route"], float(np.max(frob(pm.whiten(r_def - r_cf)) / ref)))
        r_kh = curvature(pm, k, h, l)
        worst["anti"] = max(worst["anti"], float(np.max(frob(pm.whiten(r_cf + r_kh)) / ref)))
        r2, r3 = curvature(pm, k, l, h), curvature(pm, l, h, k)
        big = np.maximum(ref, np.maximum(frob(pm.whiten(r2)), frob(pm.whiten(r3))))
        worst["bianchi"] = max(worst["bianchi"], float(np.max(frob(pm.whiten(r_cf + r2 + r3)) / big)))
        # <R(h,k)l, m> = -<R(h,k)m, l>
        lhs = inner_g(pm, r_cf, m)
        rhs = -inner_g(pm, curvature(pm, h, k, m), l)
        sc = np.maximum(np.abs(lhs), np.abs(rhs))
        worst["skew"] = max(worst["skew"], float(np.max(np.abs(lhs - rhs) / sc)))
    count = per_n * len(dims)
    return [
        CheckResult("dGamma route vs closed form", worst["route"], tol, count, True),
        CheckResult("R(h,k) = -R(k,h)", worst["anti"], tol, count, True),
        CheckResult("first Bianchi identity", worst["bianchi"], tol, count, True),
        CheckResult("R(h,k) skew for G", worst["skew"], tol, count, True),
    ]


def check_trace_bracket(rng, count=500, dims=(1, 2, 3, 4, 5), tol=1e-10):
    worst = 0.0
    for i in range(count):
        n = dims[i % len(dims)]
        hm, lm = random_sym(rng, n), random_sym(rng, n)
        brute = basis_trace(lambda k: ad(ad(hm, k), lm), n, rng)
        exact = float(trace_bracket(hm, lm))
        worst = max(worst, abs(brute - exact) / max(1.0, abs(exact)))
    return CheckResult("trace of K -> [[H,K],L]", worst, tol, count, True)


def check_ricci(rng, count=200, dims=(2, 3, 4), tol=1e-9):
    worst = 0.0
    for i in range(count):
        n = dims[i % len(dims)]
        pm = PointMetric.from_array(random_spd(rng, n))
        h, l = random_sym(rng, n), random_sym(rng, n)
        brute = basis_trace(lambda k: curvature(pm, h, k, l), n, rng)
        exact = float(ricci_like(pm, h, l))
        worst = max(worst, abs(brute - exact) / max(1.0, abs(exact)))
    return CheckResult("Ricci-like = trace of k -> R(h,k)l", worst, tol, count, True)


def check_scalar(dims=range(1, 7), tol=1e-12):
    worst = 0.0
    for n in dims:
        rng = np.random.default_rng(n)
        pm = PointMetric.from_array(random_spd(rng, n))
        # the (1,1) endomorphism xi -> -(n/32)(4+n(n+1)) xi_0 acts on covariant tensors
        brute = basis_trace(lambda xi: ricci_endomorphism(pm, xi), n, rng)
        exact = scalar_like(n)
        worst = max(worst, abs(brute - exact) / max(1.0, abs(exact)))
    return CheckResult("scalar-like trace = c(n), n=1..6", worst, tol, len(dims), True)


def suite_curvature(rng, tol=None, scale=1.0):
    return [
        *check_curvature(rng, per_n=_count(1000, scale), tol=tol or 1e-9),
        check_trace_bracket(rng, count=_count(500, scale), tol=tol or 1e-10),
        check_ricci(rng, count=_count(200, scale), tol=tol or 1e-9),
        check_scalar(tol=tol or 1e-12),
    ]


# Jacobi fields


def check_jacobi(rng, per_n=100, dims=(2, 3), dt=1e-3, ds=1e-4):
    worst = dict(rk4=0.0, fd=0.0, j0=0.0, dj0=0.0, order=0.0)
    for n in dims:
        g0 = random_spd(rng, n, (per_n,))
        h, k, l = (random_sym(rng, n, (per_n,), 0.7) for _ in range(3))
        sol = integrate_jacobi(g0, h, k, l, 1.0, dt)
        sol.raise_if_lost()
        times = sol.times[::10]
        closed = jacobi_field(g0[None], h[None], k[None], l[None], times[:, None])
        scale = np.maximum(1.0, np.max(frob(closed), axis=0))
        worst["rk4"] = max(worst["rk4"], float(np.max(frob(closed - sol.xi[::10]) / scale)))

        var = VariationData.from_tangents(g0, h, k, l)
        tt = times[1:, None]
        fd = (variation_alpha(var, tt, ds) - variation_alpha(var, tt, -ds)) / (2 * ds)
        rel = frob(fd - closed[1:]) / np.maximum(frob(closed[1:]), 1e-3 * scale)
        worst["fd"] = max(worst["fd"], float(np.max(rel)))
        worst["j0"] = max(worst["j0"], float(np.max(np.abs(closed[0] - k))))

        # nabla_t J(0) from closed-form samples, one-sided stencil
        errs = []
        for step in (1e-3, 1e-4, 1e-5):
            fine = step * np.arange(3)[:, None]
            curve = geodesic_point(g0[None], h[None], fine)
            jac = jacobi_field(g0[None], h[None], k[None], l[None], fine)
            nab = covariant_derivative_along(curve, jac, step, 0)
            errs.append(float(np.max(_rel(nab - l, l))))
        worst["dj0"] = max(worst["dj0"], errs[-1])
        worst["order"] = max(worst["order"], abs(math.log10(errs[0] / errs[1]) - 2.0))
    count = per_n * len(dims)
    return [
        CheckResult("closed form vs RK4 on [0,1]", worst["rk4"], 1e-5, count),
        CheckResult("closed form vs d/ds variation", worst["fd"], 1e-6, count),
        CheckResult("J(0) = k", worst["j0"], 0.0, count),
        CheckResult("nabla J(0) = l (dt=1e-5)", worst["dj0"], 1e-6, count),
        CheckResult("|order - 2| of nabla J(0) error", worst["order"], 0.2, count),
    ]


def suite_jacobi(rng, tol=None, scale=1.0):
    return check_jacobi(rng, per_n=_count(100, scale))


# first variation


@dataclass
class VariationFamily:
    """``g(t, s)`` sampled on a uniform ``t`` grid and ``s in {-2ds..2ds}``."""

    base: SampledBase
    times: np.ndarray
    s_values: np.ndarray
    frames: np.ndarray  # (T, S, points, n, n)

    def slice_energy(self, j):
        return energy(MetricPath(self.base, self.times, self.frames[:, j]))

    def centered_energy_derivative(self):
        j = len(self.s_values) // 2
        ds = self.s_values[j + 1] - self.s_values[j]
        return (self.slice_energy(j + 1) - self.slice_energy(j - 1)) / (2 * ds)

    def formula(self):
        return first_variation_terms(self.base, self.times, self.s_values, self.frames)


def random_family(rng, steps, ds=1e-4, geodesic=False):
    """A smooth random two-parameter family of metric fields on ``[0, 1]``.

    With ``geodesic=True`` the ``s = 0`` curve is a geodesic of fields and the
    variation vanishes at both ends.
    """
    n = int(rng.integers(2, 5))
    m = int(rng.integers(1, 4))
    base = SampledBase(n, tuple(f"x{i}" for i in range(m)), rng.uniform(0.5, 1.5, m))
    times = np.linspace(0.0, 1.0, steps + 1)
    s_values = ds * np.arange(-2, 3)
    g0 = random_spd(rng, n, (m,), 0.3)
    h = random_sym(rng, n, (m,), 0.5)
    v, w, u = (random_sym(rng, n, (m,), 0.3) for _ in range(3))
    tcol = times[:, None, None, None]
    if geodesic:
        curve = geodesic_point(g0[None], h[None], tcol[..., 0, 0])
        bump = np.sin(np.pi * tcol)
        shapes = [bump * v, bump * tcol * w, bump**2 * u]
    else:
        wobble = (1 + 0.3 * np.sin(2 * times))[:, None, None, None]
        curve = geodesic_point(g0[None], wobble * h[None], tcol[..., 0, 0])
        shapes = [np.sin(np.pi * tcol) * v, tcol * w, tcol**2 * u]
    frames = np.stack(
        [curve + s * (shapes[0] + shapes[1]) + s * s * shapes[2] for s in s_values], axis=1
    )
    return VariationFamily(base, times, s_values, frames)


def check_first_variation(rng, count=50, steps=5000, geodesic=False):
    worst = 0.0
    for _ in range(count):
        fam = random_family(rng, steps, geodesic=geodesic)
        terms = fam.formula()
        ref = 0.0 if geodesic else fam.centered_energy_derivative()
        worst = max(worst, abs(terms.value - ref) / terms.magnitude)
    name = "geodesic, fixed ends: formula = 0" if geodesic else "formula vs centered dE/ds"
    return CheckResult(name, worst, 1e-6, count)


def suite_variation(rng, tol=None, scale=1.0):
    return [
        check_first_variation(rng, _count(50, scale)),
        check_first_variation(rng, _count(20, scale), geodesic=True),
    ]


def _count(nominal, scale):
    return max(1, int(round(nominal * scale)))


SUITES = {
    "geodesic": suite_geodesic,
    "expLog": suite_explog,
    "curvature": suite_curvature,
    "jacobi": suite_jacobi,
    "variation": suite_variation,
}


def run_suite(name, seed=DEFAULT_SEED, tol=None, scale=1.0):
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    # each suite gets its own stream so suites are reproducible in isolation
    rng = np.random.default_rng([seed, list(SUITES).index(name)])
    start = time.perf_counter()
    checks = SUITES[name](rng, tol=tol, scale=scale)
    return SuiteResult(name, checks, time.perf_counter() - start)


def run_suites(names=None, seed=DEFAULT_SEED, tol=None, scale=1.0):
    names = list(SUITES) if names in (None, "all", ["all"]) else list(names)
    return [run_suite(nm, seed, tol, scale) for nm in names]
