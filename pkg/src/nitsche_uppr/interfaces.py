"""Interface curves as signed level sets, plus the built-in catalog.

Sign convention: ``phi < 0`` inside (subdomain 1), ``phi > 0`` outside.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.spatial import cKDTree

from . import kernels


@dataclass(eq=False)
class Interface:
    """Implicit interface description.

    ``lipschitz`` is an upper bound on ``|grad phi|`` when one is known (1 for
    signed distances).  It only serves to skip edges that cannot be crossed.
    """

    name: str
    phi: Callable
    grad_phi: Optional[Callable] = None
    curvature: Optional[Callable] = None
    lipschitz: Optional[float] = None

    def __call__(self, x, y):
        return self.phi(np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    def gradient(self, x, y, step=1e-6):
        """``grad phi`` (analytic when given, else central differences)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.grad_phi is not None:
            gx, gy = self.grad_phi(x, y)
            return np.asarray(gx, dtype=float), np.asarray(gy, dtype=float)
        gx = (self.phi(x + step, y) - self.phi(x - step, y)) / (2 * step)
        gy = (self.phi(x, y + step) - self.phi(x, y - step)) / (2 * step)
        return gx, gy

    def curvature_at(self, x, y, h=1e-2):
        """Curvature of the level set through (x, y); magnitude in 1/length.

        Falls back to second differences of ``phi`` with step ``1e-5 * h``.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.curvature is not None:
            return np.asarray(self.curvature(x, y), dtype=float)
        d = 1e-5 * h
        f = self.phi
        f0 = f(x, y)
        fxp, fxm = f(x + d, y), f(x - d, y)
        fyp, fym = f(x, y + d), f(x, y - d)
        fx = (fxp - fxm) / (2 * d)
        fy = (fyp - fym) / (2 * d)
        fxx = (fxp - 2 * f0 + fxm) / (d * d)
        fyy = (fyp - 2 * f0 + fym) / (d * d)
        fxy = (f(x + d, y + d) - f(x + d, y - d) - f(x - d, y + d) + f(x - d, y - d)) / (4 * d * d)
        g2 = fx * fx + fy * fy
        num = fxx * fy * fy - 2 * fx * fy * fxy + fyy * fx * fx
        return np.abs(num) / np.maximum(g2, 1e-300) ** 1.5


class PolylineInterface(Interface):
    """Closed parametric curve turned into a signed distance function.

    The curve ``curve(t)``, ``t`` in ``[t0, t1)``, is resampled with
    at least ``resolution`` points equally spaced in arc length, refined to
    ``turn_samples`` points per radian where the curve bends sharply.  ``phi`` is the
    distance to that polyline, negative inside (crossing-number rule).
    Curvature comes from the parametric derivatives at the nearest sample.
    """

    def __init__(self, name, curve, t_range=(0.0, 2 * np.pi), resolution=4096, oversample=32, turn_samples=8.0):
        t0, t1 = t_range
        self.curve_fn = curve
        self.t_range = (float(t0), float(t1))
        self.resolution = int(resolution)
        dense_t = np.linspace(t0, t1, self.resolution * oversample + 1)
        cx, cy = curve(dense_t)
        seg = np.hypot(np.diff(cx), np.diff(cy))
        arc = np.concatenate([[0.0], np.cumsum(seg)])
        # at least `resolution` points, and at least `turn_samples` per radian of turning
        kap = self._parametric_curvature(0.5 * (dense_t[1:] + dense_t[:-1]))
        density = np.maximum(self.resolution / arc[-1], turn_samples * kap)
        count = np.concatenate([[0.0], np.cumsum(density * seg)])
        n = int(np.ceil(count[-1]))
        target = np.linspace(0.0, count[-1], n, endpoint=False)
        t = np.interp(target, count, dense_t)
        vx, vy = curve(t)
        self.length = float(arc[-1])
        self.t_samples = t
        self.vertices = np.column_stack([vx, vy])
        self.sample_curvature = self._parametric_curvature(t)
        self._tree = cKDTree(self.vertices)
        super().__init__(name=name, phi=self._phi, curvature=self._curv, lipschitz=1.0)

    def _parametric_curvature(self, t):
        span = self.t_range[1] - self.t_range[0]
        d = 1e-4 * span / (2 * np.pi)
        x0, y0 = self.curve_fn(t)
        xp, yp = self.curve_fn(t + d)
        xm, ym = self.curve_fn(t - d)
        x1 = (xp - xm) / (2 * d)
        y1 = (yp - ym) / (2 * d)
        x2 = (xp - 2 * x0 + xm) / (d * d)
        y2 = (yp - 2 * y0 + ym) / (d * d)
        return np.abs(x1 * y2 - y1 * x2) / (x1 * x1 + y1 * y1) ** 1.5

    def _phi(self, x, y):
        shape = np.shape(x)
        px = np.ravel(np.asarray(x, dtype=float))
        py = np.ravel(np.broadcast_to(np.asarray(y, dtype=float), shape))
        out = kernels.polyline_signed_distance(px, py, self.vertices[:, 0], self.vertices[:, 1])
        return out.reshape(shape)

    def _curv(self, x, y):
        shape = np.shape(x)
        pts = np.column_stack([np.ravel(x), np.ravel(np.broadcast_to(y, shape))])
        _, idx = self._tree.query(pts)
        return self.sample_curvature[idx].reshape(shape)

    def sample(self, n):
        """``n`` points on the exact curve, equally spaced in the parameter."""
        t = np.linspace(*self.t_range, n, endpoint=False)
        return np.column_stack(self.curve_fn(t))


# -- catalog ---------------------------------------------------------------

def circle(radius=0.5, center=(0.0, 0.0)):
    cx, cy = center

    def phi(x, y):
        return np.hypot(x - cx, y - cy) - radius

    def grad(x, y):
        r = np.hypot(x - cx, y - cy)
        r = np.where(r == 0.0, 1.0, r)
        return (x - cx) / r, (y - cy) / r

    def curv(x, y):
        return 1.0 / np.maximum(np.hypot(x - cx, y - cy), 1e-300)

    return Interface("circle", phi, grad, curv, lipschitz=1.0)


def flower5():
    """r = 1/2 + sin(5 theta)/7 about the origin."""

    def phi(x, y):
        return np.hypot(x, y) - (0.5 + np.sin(5.0 * np.arctan2(y, x)) / 7.0)

    def grad(x, y):
        r2 = x * x + y * y
        r2 = np.where(r2 == 0.0, 1.0, r2)
        rho = np.sqrt(r2)
        dr = 5.0 * np.cos(5.0 * np.arctan2(y, x)) / 7.0
        return x / rho + dr * y / r2, y / rho - dr * x / r2

    return Interface("flower5", phi, grad)


def _petal6_curve(t):
    r = 0.40178 * (1.0 + np.cos(2 * t) * np.sin(6 * t)) * np.cos(t)
    return r * np.cos(t), r * np.sin(t)


def _spiralish_curve(t):
    theta = t + np.sin(4 * t)
    r = 0.60125 + 0.24012 * np.cos(4 * t + np.pi / 2)
    return r * np.cos(theta), r * np.sin(theta)


_SHARP_CENTER = 0.02 * np.sqrt(5.0)


def _sharp20_curve(t):
    r = 0.4 + 0.2 * np.sin(20 * t)
    return r * np.cos(t) + _SHARP_CENTER, r * np.sin(t) + _SHARP_CENTER


def petal6(resolution=4096):
    return PolylineInterface("petal6", _petal6_curve, (-np.pi / 2, np.pi / 2), resolution)


def spiralish(resolution=4096):
    return PolylineInterface("spiralish", _spiralish_curve, (0.0, 2 * np.pi), resolution)


def sharp20(resolution=4096):
    return PolylineInterface("sharp20", _sharp20_curve, (0.0, 2 * np.pi), resolution)


def line(x0=0.5):
    """Vertical line x = x0; side 1 is x < x0 (not a closed curve, for tests)."""
    return Interface(
        "line",
        lambda x, y: x - x0,
        lambda x, y: (np.ones_like(x), np.zeros_like(y)),
        lambda x, y: np.zeros_like(x),
        lipschitz=1.0,
    )


CATALOG = {
    "circle": circle,
    "flower5": flower5,
    "petal6": petal6,
    "spiralish": spiralish,
    "sharp20": sharp20,
}


def get_interface(name, **kwargs) -> Interface:
    try:
        factory = CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown interface {name!r}; choose from {sorted(CATALOG)}") from None
    return factory(**kwargs)
