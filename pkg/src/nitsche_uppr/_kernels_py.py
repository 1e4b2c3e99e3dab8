"""Pure numpy versions of the compiled kernels.

These are the reference implementations: the Cython module must agree with
them to rounding.  Both functions take and return plain float64 arrays.
"""
from __future__ import annotations

import numpy as np

_CHUNK_PAIRS = 2_000_000


def polyline_signed_distance(px, py, vx, vy):
    """Signed distance from points to a closed polyline.

    The polyline is ``(vx[i], vy[i]) -> (vx[i+1], vy[i+1])`` with the last
    vertex joined back to the first.  Points enclosed by the polyline (odd
    crossing number of a ray towards +x) get a negative sign.
    """
    px = np.ascontiguousarray(px, dtype=float).ravel()
    py = np.ascontiguousarray(py, dtype=float).ravel()
    ax = np.ascontiguousarray(vx, dtype=float)
    ay = np.ascontiguousarray(vy, dtype=float)
    bx = np.roll(ax, -1)
    by = np.roll(ay, -1)
    dx = bx - ax
    dy = by - ay
    len2 = dx * dx + dy * dy
    # horizontal segments never straddle the ray
    slope = np.where(dy != 0.0, dx / np.where(dy != 0.0, dy, 1.0), 0.0)

    out = np.empty_like(px)
    step = max(1, _CHUNK_PAIRS // max(len(ax), 1))
    for s in range(0, len(px), step):
        x = px[s : s + step, None]
        y = py[s : s + step, None]
        t = ((x - ax) * dx + (y - ay) * dy) / len2
        np.clip(t, 0.0, 1.0, out=t)
        ex = x - ax - t * dx
        ey = y - ay - t * dy
        d2 = (ex * ex + ey * ey).min(axis=1)
        straddle = (ay > y) != (by > y)
        xint = ax + (y - ay) * slope
        crossings = np.count_nonzero(straddle & (x < xint), axis=1)
        sign = np.where(crossings % 2 == 1, -1.0, 1.0)
        out[s : s + step] = sign * np.sqrt(d2)
    return out


def ppr_fit(indptr, indices, x, y):
    """Least-squares quadratic fits over node patches.

    For node ``z`` the samples are ``indices[indptr[z]:indptr[z+1]]``.  The
    coordinates are shifted to ``z`` and scaled by the patch radius ``s``;
    the monomial columns are scaled to unit norm and the 6x6 normal equations
    are solved by Cholesky.

    Returns ``(wx, wy, cond)``: per-sample weights such that the recovered
    gradient at ``z`` is ``sum(wx * u[samples])`` (resp. ``wy``), and the
    2-norm condition number of the scaled sample matrix (``inf`` when the
    patch has fewer than six samples or is rank deficient).
    """
    indptr = np.asarray(indptr, dtype=np.int64)
    indices = np.asarray(indices, dtype=np.int64)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(indptr) - 1
    counts = np.diff(indptr)
    wx = np.zeros(len(indices))
    wy = np.zeros(len(indices))
    cond = np.full(n, np.inf)

    node_of = np.repeat(np.arange(n), counts)
    dxs = x[indices] - x[node_of]
    dys = y[indices] - y[node_of]
    radius = np.zeros(n)
    np.maximum.at(radius, node_of, np.hypot(dxs, dys))

    for m in np.unique(counts):
        if m < 6:
            continue
        nodes = np.flatnonzero(counts == m)
        cols = indptr[nodes][:, None] + np.arange(m)[None, :]
        s = radius[nodes][:, None]
        xi = dxs[cols] / s
        eta = dys[cols] / s
        M = np.stack([np.ones_like(xi), xi, eta, xi * xi, xi * eta, eta * eta], axis=2)
        colnorm = np.sqrt(np.einsum("kij,kij->kj", M, M))
        colnorm[colnorm == 0.0] = 1.0
        Ms = M / colnorm[:, None, :]
        sv = np.linalg.svd(Ms, compute_uv=False)
        ok = sv[:, -1] >= 1e-8 * sv[:, 0]
        cond[nodes[ok]] = sv[ok, 0] / sv[ok, -1]
        if not np.any(ok):
            continue
        Ms = Ms[ok]
        N = np.einsum("kij,kil->kjl", Ms, Ms)
        L = np.linalg.cholesky(N)
        # rows 1 and 2 of N^{-1} Ms^T give the xi / eta slope weights
        E = np.zeros((len(Ms), 6, 2))
        E[:, 1, 0] = 1.0
        E[:, 2, 1] = 1.0
        Z = np.linalg.solve(np.swapaxes(L, 1, 2), np.linalg.solve(L, E))
        W = np.einsum("kij,kjl->kil", Ms, Z)  # (k, m, 2)
        sc = colnorm[ok][:, 1:3] * s[ok]  # undo column and length scaling
        W = W / sc[:, None, :]
        good_cols = cols[ok]
        wx[good_cols] = W[:, :, 0]
        wy[good_cols] = W[:, :, 1]
    return wx, wy, cond
