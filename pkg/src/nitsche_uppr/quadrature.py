"""Quadrature on triangles, small polygons and segments.

Triangle rules are the symmetric Strang-Fix / Dunavant rules in barycentric
form with weights normalized to one.  All batched helpers accept signed
triangles: a negatively oriented triangle contributes with negative weight,
which is what fan integration of a non-convex polygon needs.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np


def _orbit3(a, w):
    b = 1.0 - 2.0 * a
    return [(a, a, b), (a, b, a), (b, a, a)], [w] * 3


def _orbit6(a, b, w):
    c = 1.0 - a - b
    pts = [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)]
    return pts, [w] * 6


@lru_cache(maxsize=None)
def triangle_rule(order: int):
    """Barycentric points (q, 3) and weights (q,) summing to one."""
    if order == 2:
        pts, wts = _orbit3(1.0 / 6.0, 1.0 / 3.0)
    elif order == 4:
        p1, w1 = _orbit3(0.445948490915965, 0.223381589678011)
        p2, w2 = _orbit3(0.091576213509771, 0.109951743655322)
        pts, wts = p1 + p2, w1 + w2
    elif order == 6:
        p1, w1 = _orbit3(0.249286745170910, 0.116786275726379)
        p2, w2 = _orbit3(0.063089014491502, 0.050844906370207)
        p3, w3 = _orbit6(0.053145049844817, 0.310352451033784, 0.082851075618374)
        pts, wts = p1 + p2 + p3, w1 + w2 + w3
    else:
        raise ValueError(f"unsupported triangle quadrature order {order}; use 2, 4 or 6")
    bary = np.array(pts, dtype=float)
    w = np.array(wts, dtype=float)
    w /= w.sum()
    bary.setflags(write=False)
    w.setflags(write=False)
    return bary, w


@lru_cache(maxsize=None)
def segment_rule(order: int):
    """Gauss-Legendre nodes on [0, 1] and weights summing to one."""
    if order not in (2, 4, 6):
        raise ValueError(f"unsupported segment quadrature order {order}; use 2, 4 or 6")
    npts = (order + 2) // 2
    x, w = np.polynomial.legendre.leggauss(npts)
    s = 0.5 * (x + 1.0)
    w = 0.5 * w
    s.setflags(write=False)
    w.setflags(write=False)
    return s, w


def map_triangles(p0, p1, p2, order: int):
    """Quadrature points (k, q, 2) and signed weights (k, q) for k triangles."""
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    bary, w = triangle_rule(order)
    pts = (
        bary[None, :, 0, None] * p0[:, None, :]
        + bary[None, :, 1, None] * p1[:, None, :]
        + bary[None, :, 2, None] * p2[:, None, :]
    )
    d1 = p1 - p0
    d2 = p2 - p0
    area = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    return pts, area[:, None] * w[None, :]


def map_segments(a, b, order: int):
    """Gauss points (k, q, 2) and weights (k, q) on k segments."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    s, w = segment_rule(order)
    pts = a[:, None, :] + s[None, :, None] * (b - a)[:, None, :]
    length = np.hypot(*(b - a).T)
    return pts, length[:, None] * w[None, :]


def fan_polygons(polys, apex=None, order: int = 2):
    """Integrate over k polygons given as (k, n, 2) vertex arrays.

    Each polygon is split into the fan ``(apex, v_j, v_{j+1})``; by default
    the apex is the vertex average.  Repeated vertices (a triangle padded to
    four corners) give zero-area fan pieces and drop out.
    Returns points (k, n*q, 2) and signed weights (k, n*q).
    """
    polys = np.asarray(polys, dtype=float)
    k, n, _ = polys.shape
    if apex is None:
        apex = polys.mean(axis=1)
    apex = np.broadcast_to(np.asarray(apex, dtype=float), (k, 2))
    nxt = np.roll(polys, -1, axis=1)
    p0 = np.repeat(apex[:, None, :], n, axis=1).reshape(-1, 2)
    pts, w = map_triangles(p0, polys.reshape(-1, 2), nxt.reshape(-1, 2), order)
    q = w.shape[1]
    return pts.reshape(k, n * q, 2), w.reshape(k, n * q)


def shoelace(polys) -> np.ndarray:
    """Signed areas of k polygons (k, n, 2)."""
    polys = np.asarray(polys, dtype=float)
    x = polys[..., 0]
    y = polys[..., 1]
    return 0.5 * np.sum(x * np.roll(y, -1, axis=-1) - np.roll(x, -1, axis=-1) * y, axis=-1)


# -- single-domain front ends ---------------------------------------------

def quadrature(domain, order: int):
    """Weighted point set for one triangle, convex polygon or segment.

    ``domain`` is an array of 2 (segment), 3 (triangle) or 4 (polygon) points.
    Returns ``(points (q, 2), weights (q,))``.
    """
    domain = np.asarray(domain, dtype=float)
    if domain.ndim != 2 or domain.shape[1] != 2:
        raise ValueError("domain must be an (n, 2) array of points")
    n = len(domain)
    if n == 2:
        pts, w = map_segments(domain[None, 0], domain[None, 1], order)
    elif n == 3:
        pts, w = map_triangles(domain[None, 0], domain[None, 1], domain[None, 2], order)
    elif n >= 4:
        pts, w = fan_polygons(domain[None], order=order)
    else:
        raise ValueError("domain needs at least two points")
    return pts[0], w[0]


def integrate(fn, domain, order: int) -> float:
    pts, w = quadrature(domain, order)
    return float(np.dot(w, fn(pts[:, 0], pts[:, 1])))
