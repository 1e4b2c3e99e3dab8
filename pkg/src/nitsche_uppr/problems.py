"""Built-in interface problems with closed-form solutions.

Every problem gives both branches on the whole square (they double as the
extensions used for interpolation and errors), the per-side sources
``f_i = -div(beta_i grad u_i)`` derived by hand, and the interface jumps
computed from the branches: ``q = u1 - u2`` and
``g = beta1 du1/dn - beta2 du2/dn``.
"""
from __future__ import annotations

import numpy as np

from . import interfaces
from .assembly import ProblemSpec


def _jumps(u1, u2, grad1, grad2, beta1, beta2):
    def q(x, y):
        return u1(x, y) - u2(x, y)

    def g(x, y, nx, ny):
        g1x, g1y = grad1(x, y)
        g2x, g2y = grad2(x, y)
        return beta1(x, y) * (g1x * nx + g1y * ny) - beta2(x, y) * (g2x * nx + g2y * ny)

    return q, g


def _const(c):
    def fn(x, y):
        return np.full(np.shape(x), float(c))

    fn.constant = float(c)
    return fn


def _make(name, interface, beta1, beta2, f1, f2, u1, u2, grad1, grad2, **meta):
    q, g = _jumps(u1, u2, grad1, grad2, beta1, beta2)
    return ProblemSpec(name, interface, beta1, beta2, f1, f2, q=q, g=g, u1=u1, u2=u2,
                       grad1=grad1, grad2=grad2, meta=meta)


# -- circle, homogeneous jumps -----------------------------------------------

def circle_cubic(beta1: float, beta2: float, name="circle_cubic", r0=0.5):
    """u1 = r^3/beta1, u2 = r^3/beta2 + (1/beta1 - 1/beta2) r0^3; q = g = 0."""
    shift = (1.0 / beta1 - 1.0 / beta2) * r0 ** 3

    def u1(x, y):
        return np.hypot(x, y) ** 3 / beta1

    def u2(x, y):
        return np.hypot(x, y) ** 3 / beta2 + shift

    def grad1(x, y):
        r = np.hypot(x, y)
        return 3 * r * x / beta1, 3 * r * y / beta1

    def grad2(x, y):
        r = np.hypot(x, y)
        return 3 * r * x / beta2, 3 * r * y / beta2

    def f(x, y):
        return -9.0 * np.hypot(x, y)

    return _make(name, interfaces.circle(r0), _const(beta1), _const(beta2), f, f, u1, u2, grad1, grad2,
                 mesh="uniform")


# -- flower, nonhomogeneous jumps ------------------------------------------------

def flower():
    b1, b2 = 1.0, 10.0

    def u1(x, y):
        return np.exp(x * x + y * y)

    def grad1(x, y):
        e = np.exp(x * x + y * y)
        return 2 * x * e, 2 * y * e

    def f1(x, y):
        r2 = x * x + y * y
        return -b1 * (4.0 + 4.0 * r2) * np.exp(r2)

    def u2(x, y):
        r2 = x * x + y * y
        return 0.1 * r2 * r2 - 0.01 * np.log(2.0 * np.sqrt(r2))

    def grad2(x, y):
        r2 = x * x + y * y
        c = 0.4 * r2 - 0.01 / r2
        return c * x, c * y

    def f2(x, y):
        return -b2 * 1.6 * (x * x + y * y)

    # coarse uniform meshes cut a few petals' tips twice; audited, not fatal
    return _make("ex52", interfaces.flower5(), _const(b1), _const(b2), f1, f2, u1, u2, grad1, grad2,
                 mesh="uniform", check="warn")


# -- variable coefficients ----------------------------------------------------------

def petal():
    def beta1(x, y):
        return (7.0 + y * y - x * x) / 7.0

    def beta2(x, y):
        return (x * y + 2.0) / 5.0

    def u1(x, y):
        return np.sin(x + y) + np.cos(x + y) + 1.0

    def grad1(x, y):
        d = np.cos(x + y) - np.sin(x + y)
        return d, d

    def f1(x, y):
        s, c = np.sin(x + y), np.cos(x + y)
        # -(grad beta1 . grad u1 + beta1 lap u1)
        return -((c - s) * (2.0 * y - 2.0 * x) / 7.0 - 2.0 * beta1(x, y) * (s + c))

    def u2(x, y):
        return x + y + 1.0

    def grad2(x, y):
        one = np.ones(np.shape(x))
        return one, one

    def f2(x, y):
        return -(x + y) / 5.0

    return _make("ex53", interfaces.petal6(), beta1, beta2, f1, f2, u1, u2, grad1, grad2, mesh="adaptive")


def spiral():
    def beta1(x, y):
        return 4.0 + np.sin(x + y)

    def beta2(x, y):
        return 10.0 + x * x + y * y

    def u1(x, y):
        return np.sin(x) * np.cos(y)

    def grad1(x, y):
        return np.cos(x) * np.cos(y), -np.sin(x) * np.sin(y)

    def f1(x, y):
        return -np.cos(x + y) ** 2 + 2.0 * beta1(x, y) * np.sin(x) * np.cos(y)

    def u2(x, y):
        return 1.0 - x * x - y * y

    def grad2(x, y):
        return -2.0 * x, -2.0 * y

    def f2(x, y):
        return 4.0 * (x * x + y * y) + 4.0 * beta2(x, y)

    return _make("ex54", interfaces.spiralish(), beta1, beta2, f1, f2, u1, u2, grad1, grad2, mesh="adaptive")


def sharp():
    b1, b2 = 1.0, 10.0

    def u1(x, y):
        return (x * x + y * y) / b1

    def grad1(x, y):
        return 2 * x / b1, 2 * y / b1

    def u2(x, y):
        r2 = x * x + y * y
        return (r2 * r2 - 0.1 * np.log(2.0 * np.sqrt(r2))) / b2

    def grad2(x, y):
        r2 = x * x + y * y
        c = (4.0 * r2 - 0.1 / r2) / b2
        return c * x, c * y

    return _make("ex55", interfaces.sharp20(), _const(b1), _const(b2), _const(-4.0),
                 lambda x, y: -16.0 * (x * x + y * y), u1, u2, grad1, grad2, mesh="adaptive")


def affine(a=1.0, b=2.0, c=0.5, beta1=3.0, beta2=7.0, interface=None):
    """Same affine function on both sides; the flux jump carries the beta contrast."""

    def u(x, y):
        return a * x + b * y + c

    def grad(x, y):
        return np.full(np.shape(x), a), np.full(np.shape(x), b)

    iface = interface if interface is not None else interfaces.circle()
    return _make("custom", iface, _const(beta1), _const(beta2), _const(0.0), _const(0.0), u, u, grad, grad,
                 mesh="uniform")


def piecewise_linear(beta1=10.0, beta2=1.0, x0=0.5):
    """u1 = x/beta1, u2 = x/beta2 across the line x = x0 (g = 0, q constant)."""

    def u1(x, y):
        return x / beta1

    def u2(x, y):
        return x / beta2

    def grad1(x, y):
        return np.full(np.shape(x), 1.0 / beta1), np.zeros(np.shape(x))

    def grad2(x, y):
        return np.full(np.shape(x), 1.0 / beta2), np.zeros(np.shape(x))

    return _make("piecewise_linear", interfaces.line(x0), _const(beta1), _const(beta2), _const(0.0), _const(0.0),
                 u1, u2, grad1, grad2, mesh="uniform")


CATALOG = {
    "ex51a": lambda: circle_cubic(1.0, 10.0, "ex51a"),
    "ex51b": lambda: circle_cubic(1.0, 1000.0, "ex51b"),
    "ex51c": lambda: circle_cubic(1e5, 1.0, "ex51c"),
    "ex51d": lambda: circle_cubic(1.0, 1e5, "ex51d"),
    "ex52": flower,
    "ex53": petal,
    "ex54": spiral,
    "ex55": sharp,
    "custom": affine,
}


def get_problem(name: str) -> ProblemSpec:
    try:
        return CATALOG[name]()
    except KeyError:
        raise KeyError(f"unknown example {name!r}; choose from {sorted(CATALOG)}") from None
