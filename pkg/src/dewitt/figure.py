"""Picture of the exponential map on the plane through 0, Id and a traceless A.

With ``tr(A^2) = n`` the coordinates ``x A + y Id`` are orthonormal for the
normalized inner product at 0, so straight lines through the origin are
geodesics and origin-centred circles are distance spheres.  Their images
under :func:`dewitt.geoexp.figure1_map` are drawn in the ``(u, v)`` plane.

The excluded ray ``{0} x (-inf, -4/n]`` is cut open by the map; its two
banks go to the lines ``u = +-4 pi/n``, which are drawn dashed.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .geoexp import exp_point, figure1_map
from .symcore import sym_log

WIDTH = 800
HEIGHT = 600
MARGIN = 40
LINE_SAMPLES = 256
CIRCLE_SAMPLES = 720


def default_radii(n):
    return [k / n for k in range(1, 7)]


def traceless_unit(n):
    """``sqrt(n/2) diag(1, -1, 0, ...)``, traceless with ``tr(A^2) = n``."""
    if n < 2:
        raise ValueError("the picture needs n >= 2 (no traceless directions for n = 1)")
    a = np.zeros((n, n))
    a[0, 0], a[1, 1] = 1.0, -1.0
    return math.sqrt(n / 2.0) * a


@dataclass
class Viewport:
    u_lo: float
    u_hi: float
    v_lo: float
    v_hi: float

    @classmethod
    def for_figure(cls, n, radii):
        u_max = 1.1 * 4 * math.pi / n
        r = max(radii)
        top = (2.0 / n) * math.log((4 + n * r) ** 2 / 16.0)
        v_hi = 1.15 * max(top, 1.0)
        return cls(-u_max, u_max, -2.0 * max(top, 1.0), v_hi)

    def to_pixels(self, u, v):
        px = MARGIN + (np.asarray(u) - self.u_lo) / (self.u_hi - self.u_lo) * (WIDTH - 2 * MARGIN)
        py = HEIGHT - MARGIN - (np.asarray(v) - self.v_lo) / (self.v_hi - self.v_lo) * (HEIGHT - 2 * MARGIN)
        return px, py

    def from_pixels(self, px, py):
        u = self.u_lo + (np.asarray(px) - MARGIN) / (WIDTH - 2 * MARGIN) * (self.u_hi - self.u_lo)
        v = self.v_lo + (HEIGHT - MARGIN - np.asarray(py)) / (HEIGHT - 2 * MARGIN) * (self.v_hi - self.v_lo)
        return u, v

    def inside(self, u, v):
        return np.isfinite(v) & (v >= self.v_lo) & (v <= self.v_hi) & (u >= self.u_lo) & (u <= self.u_hi)


@dataclass
class Figure1Data:
    n: int
    radii: list
    viewport: Viewport
    geodesics: list = field(default_factory=list)  # list of (u, v) pieces
    spheres: list = field(default_factory=list)  # (radius, closed, [(u, v) pieces])


def _split_visible(u, v, viewport):
    """Cut a sampled curve into pieces that stay inside the viewport."""
    keep = viewport.inside(u, v)
    pieces, start = [], None
    for i, k in enumerate(keep.tolist() + [False]):
        if k and start is None:
            start = i
        elif not k and start is not None:
            if i - start >= 2:
                pieces.append((u[start:i], v[start:i]))
            start = None
    return pieces


def figure1_data(n, grid=24, radii=None):
    """Sample the images of ``grid`` lines through 0 and of circles of ``radii``."""
    n = int(n)
    if n < 2 or grid < 1:
        raise ValueError("need n >= 2 (the plane needs a traceless direction) and grid >= 1")
    radii = default_radii(n) if radii is None else [float(r) for r in radii]
    if not radii or any(r <= 0 for r in radii):
        raise ValueError("radii must be positive")
    vp = Viewport.for_figure(n, radii)
    data = Figure1Data(n, radii, vp)
    cut = 4.0 / n
    r_max = max(radii)

    for j in range(grid):
        theta = -math.pi / 2 + 2 * math.pi * j / grid
        dx, dy = math.cos(theta), math.sin(theta)
        if j == 0:
            dx = 0.0  # exact downward direction; stop short of the ray
            rho = np.arange(LINE_SAMPLES) * (min(r_max, cut) / LINE_SAMPLES)
        else:
            rho = np.linspace(0.0, r_max, LINE_SAMPLES)
        u, v = figure1_map(rho * dx, rho * dy, n)
        data.geodesics.extend(_split_visible(u, v, vp))

    for r in radii:
        # phases offset by half a step never land on the excluded ray
        phi = -math.pi / 2 + 2 * math.pi * (np.arange(CIRCLE_SAMPLES) + 0.5) / CIRCLE_SAMPLES
        u, v = figure1_map(r * np.cos(phi), r * np.sin(phi), n)
        closed = r < cut and bool(np.all(vp.inside(u, v)))
        data.spheres.append((r, closed, _split_visible(u, v, vp)))
    return data


def _fmt(x):
    return f"{x:.6f}"


def _points(vp, u, v):
    px, py = vp.to_pixels(u, v)
    return " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(px.tolist(), py.tolist()))


def render_svg(data):
    vp = data.viewport
    n = data.n
    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f"<desc>exp at 0 on span(Id, A), n={n}; u in (-4pi/n, 4pi/n); "
        f"viewport u=[{_fmt(vp.u_lo)},{_fmt(vp.u_hi)}] v=[{_fmt(vp.v_lo)},{_fmt(vp.v_hi)}]</desc>",
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
    ]
    # axes
    x0, y0 = vp.to_pixels(0.0, 0.0)
    out.append(
        f'<line class="axis" x1="{_fmt(MARGIN)}" y1="{_fmt(float(y0))}" x2="{_fmt(WIDTH - MARGIN)}" '
        f'y2="{_fmt(float(y0))}" stroke="#999999" stroke-width="1"/>'
    )
    out.append(
        f'<line class="axis" x1="{_fmt(float(x0))}" y1="{_fmt(MARGIN)}" x2="{_fmt(float(x0))}" '
        f'y2="{_fmt(HEIGHT - MARGIN)}" stroke="#999999" stroke-width="1"/>'
    )
    out.append(f'<text x="{_fmt(WIDTH - MARGIN + 4)}" y="{_fmt(float(y0) + 4)}" font-size="12">u</text>')
    out.append(f'<text x="{_fmt(float(x0) + 4)}" y="{_fmt(MARGIN - 6)}" font-size="12">v</text>')
    # the two banks of the excluded ray
    for sign in (-1, 1):
        px, _ = vp.to_pixels(sign * 4 * math.pi / n, 0.0)
        out.append(
            f'<line class="excluded-ray" x1="{_fmt(float(px))}" y1="{_fmt(MARGIN)}" x2="{_fmt(float(px))}" '
            f'y2="{_fmt(HEIGHT - MARGIN)}" stroke="#cc0000" stroke-width="1.5" stroke-dasharray="6,4"/>'
        )
    out.append(
        f'<text x="{_fmt(MARGIN + 4)}" y="{_fmt(HEIGHT - 12)}" font-size="12" fill="#cc0000">'
        f"dashed: image of the excluded ray x=0, y&lt;=-4/n (u = &#177;4&#960;/n)</text>"
    )
    for u, v in data.geodesics:
        out.append(
            f'<polyline class="geodesic" points="{_points(vp, u, v)}" fill="none" stroke="#1f4e9c" '
            f'stroke-width="1"/>'
        )
    for r, closed, pieces in data.spheres:
        for u, v in pieces:
            tag = "polygon" if closed else "polyline"
            out.append(
                f'<{tag} class="sphere" data-radius="{_fmt(r)}" points="{_points(vp, u, v)}" '
                f'fill="none" stroke="#2a8a3e" stroke-width="1"/>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def figure1_svg(n, grid=24, radii=None):
    return render_svg(figure1_data(n, grid, radii))


def plane_check(n, size=40, extent=None):
    """Largest deviation between :func:`figure1_map` and ``exp_point`` at Id.

    ``exp_point(Id, y Id + x A)`` is ``exp(v Id + u A)``, so ``(u, v)`` is read
    back from its matrix logarithm.  Grid points on the excluded ray are
    skipped.
    """
    extent = 6.0 / n if extent is None else extent
    a = traceless_unit(n)
    xs = np.linspace(-extent, extent, size)
    x, y = np.meshgrid(xs, xs, indexing="ij")
    x, y = x.ravel(), y.ravel()
    ok = ~((x == 0) & (y <= -4.0 / n))
    x, y = x[ok], y[ok]
    u, v = figure1_map(x, y, n)
    h = y[:, None, None] * np.eye(n) + x[:, None, None] * a
    log_g = sym_log(exp_point(np.eye(n), h))
    v_exp = np.trace(log_g, axis1=-2, axis2=-1) / n
    u_exp = np.einsum("kij,ji->k", log_g, a) / n
    scale = np.maximum(1.0, np.maximum(np.abs(u), np.abs(v)))
    return float(np.max(np.maximum(np.abs(u - u_exp), np.abs(v - v_exp)) / scale))
