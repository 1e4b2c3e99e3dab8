# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the kernels in ``_kernels_py``.

Same signatures and same arithmetic per pair/patch; only the loop structure
differs (block culling for the polyline, one patch at a time for PPR).
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, INFINITY
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef enum:
    BLOCK = 32


def polyline_signed_distance(px, py, vx, vy):
    """Signed distance to a closed polyline; negative inside."""
    cdef const double[::1] X = np.ascontiguousarray(px, dtype=np.float64).ravel()
    cdef const double[::1] Y = np.ascontiguousarray(py, dtype=np.float64).ravel()
    cdef const double[::1] ax = np.ascontiguousarray(vx, dtype=np.float64)
    cdef const double[::1] ay = np.ascontiguousarray(vy, dtype=np.float64)
    cdef Py_ssize_t n = ax.shape[0]
    cdef Py_ssize_t npts = X.shape[0]
    cdef Py_ssize_t nb = (n + BLOCK - 1) // BLOCK

    bx_arr = np.roll(np.asarray(ax), -1)
    by_arr = np.roll(np.asarray(ay), -1)
    dx_arr = bx_arr - np.asarray(ax)
    dy_arr = by_arr - np.asarray(ay)
    len2_arr = dx_arr * dx_arr + dy_arr * dy_arr
    slope_arr = np.where(dy_arr != 0.0, dx_arr / np.where(dy_arr != 0.0, dy_arr, 1.0), 0.0)
    cdef double[::1] bx = bx_arr
    cdef double[::1] by = by_arr
    cdef double[::1] dx = dx_arr
    cdef double[::1] dy = dy_arr
    cdef double[::1] len2 = len2_arr
    cdef double[::1] slope = slope_arr

    lo = np.arange(nb) * BLOCK
    hi = np.minimum(lo + BLOCK, n)
    xs = np.minimum(np.asarray(ax), bx_arr)
    xl = np.maximum(np.asarray(ax), bx_arr)
    ys = np.minimum(np.asarray(ay), by_arr)
    yl = np.maximum(np.asarray(ay), by_arr)
    cdef double[::1] bxmin = np.minimum.reduceat(xs, lo)
    cdef double[::1] bxmax = np.maximum.reduceat(xl, lo)
    cdef double[::1] bymin = np.minimum.reduceat(ys, lo)
    cdef double[::1] bymax = np.maximum.reduceat(yl, lo)
    cdef cnp.int64_t[::1] blo = lo.astype(np.int64)
    cdef cnp.int64_t[::1] bhi = hi.astype(np.int64)

    out_arr = np.empty(npts, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t p, b, i, k, seed = 0, best_block
    cdef double x, y, best, t, ex, ey, d2, gx, gy
    cdef int crossings, straddle

    with nogil:
        for p in range(npts):
            x = X[p]
            y = Y[p]
            best = INFINITY
            best_block = seed
            # seed the bound with the block that won for the previous point
            for i in range(blo[seed], bhi[seed]):
                t = ((x - ax[i]) * dx[i] + (y - ay[i]) * dy[i]) / len2[i]
                if t < 0.0:
                    t = 0.0
                elif t > 1.0:
                    t = 1.0
                ex = x - ax[i] - t * dx[i]
                ey = y - ay[i] - t * dy[i]
                d2 = ex * ex + ey * ey
                if d2 < best:
                    best = d2
            crossings = 0
            for k in range(nb):
                if not (bymax[k] <= y or bymin[k] > y or x >= bxmax[k]):
                    for i in range(blo[k], bhi[k]):
                        straddle = (ay[i] > y) != (by[i] > y)
                        if straddle and x < ax[i] + (y - ay[i]) * slope[i]:
                            crossings += 1
                if k == seed:
                    continue
                gx = 0.0
                if x < bxmin[k]:
                    gx = bxmin[k] - x
                elif x > bxmax[k]:
                    gx = x - bxmax[k]
                gy = 0.0
                if y < bymin[k]:
                    gy = bymin[k] - y
                elif y > bymax[k]:
                    gy = y - bymax[k]
                if gx * gx + gy * gy >= best:
                    continue
                for i in range(blo[k], bhi[k]):
                    t = ((x - ax[i]) * dx[i] + (y - ay[i]) * dy[i]) / len2[i]
                    if t < 0.0:
                        t = 0.0
                    elif t > 1.0:
                        t = 1.0
                    ex = x - ax[i] - t * dx[i]
                    ey = y - ay[i] - t * dy[i]
                    d2 = ex * ex + ey * ey
                    if d2 < best:
                        best = d2
                        best_block = k
            seed = best_block
            if crossings % 2 == 1:
                out[p] = -sqrt(best)
            else:
                out[p] = sqrt(best)
    return out_arr


cdef double _jacobi_svd_ratio(double* A, int m, int n, double* sv) noexcept nogil:
    """One-sided Jacobi on a column-major m x n copy; fills sv, returns min/max."""
    cdef int sweep, i, j, r
    cdef double alpha, beta, gamma, zeta, t, c, s, ai, aj, off
    for sweep in range(60):
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                alpha = 0.0
                beta = 0.0
                gamma = 0.0
                for r in range(m):
                    ai = A[i * m + r]
                    aj = A[j * m + r]
                    alpha += ai * ai
                    beta += aj * aj
                    gamma += ai * aj
                if gamma == 0.0 or fabs(gamma) <= 1e-15 * sqrt(alpha * beta):
                    continue
                if fabs(gamma) / sqrt(alpha * beta) > off:
                    off = fabs(gamma) / sqrt(alpha * beta)
                zeta = (beta - alpha) / (2.0 * gamma)
                if zeta >= 0:
                    t = 1.0 / (zeta + sqrt(1.0 + zeta * zeta))
                else:
                    t = -1.0 / (-zeta + sqrt(1.0 + zeta * zeta))
                c = 1.0 / sqrt(1.0 + t * t)
                s = c * t
                for r in range(m):
                    ai = A[i * m + r]
                    aj = A[j * m + r]
                    A[i * m + r] = c * ai - s * aj
                    A[j * m + r] = s * ai + c * aj
        if off <= 1e-15:
            break
    cdef double smax = 0.0, smin = INFINITY, v
    for i in range(n):
        v = 0.0
        for r in range(m):
            v += A[i * m + r] * A[i * m + r]
        v = sqrt(v)
        sv[i] = v
        if v > smax:
            smax = v
        if v < smin:
            smin = v
    if smax == 0.0:
        return 0.0
    return smin / smax


def ppr_fit(indptr, indices, x, y):
    """Per-node quadratic least-squares slope weights; see ``_kernels_py``."""
    cdef const cnp.int64_t[::1] ptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const cnp.int64_t[::1] idx = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const double[::1] X = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] Y = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = ptr.shape[0] - 1
    wx_arr = np.zeros(idx.shape[0])
    wy_arr = np.zeros(idx.shape[0])
    cond_arr = np.full(n, np.inf)
    cdef double[::1] wx = wx_arr
    cdef double[::1] wy = wy_arr
    cdef double[::1] cond = cond_arr
    if n == 0:
        return wx_arr, wy_arr, cond_arr
    cdef Py_ssize_t maxm = int(np.max(np.diff(np.asarray(ptr)))) if idx.shape[0] else 0
    cdef double* M = <double*> malloc(sizeof(double) * 6 * (maxm + 1))
    cdef double* A = <double*> malloc(sizeof(double) * 6 * (maxm + 1))
    cdef double N[36]
    cdef double L[36]
    cdef double colnorm[6]
    cdef double sv[6]
    cdef double z[2][6]
    cdef Py_ssize_t node, j, m, r, a, b, k, col
    cdef double zx, zy, rad, d, xi, eta, ratio, acc, smax, smin
    cdef bint chol_ok
    try:
        with nogil:
            for node in range(n):
                m = ptr[node + 1] - ptr[node]
                if m < 6:
                    continue
                zx = X[node]
                zy = Y[node]
                rad = 0.0
                for j in range(m):
                    d = sqrt((X[idx[ptr[node] + j]] - zx) ** 2 + (Y[idx[ptr[node] + j]] - zy) ** 2)
                    if d > rad:
                        rad = d
                if rad == 0.0:
                    continue
                # column-major M (m x 6)
                for j in range(m):
                    xi = (X[idx[ptr[node] + j]] - zx) / rad
                    eta = (Y[idx[ptr[node] + j]] - zy) / rad
                    M[0 * m + j] = 1.0
                    M[1 * m + j] = xi
                    M[2 * m + j] = eta
                    M[3 * m + j] = xi * xi
                    M[4 * m + j] = xi * eta
                    M[5 * m + j] = eta * eta
                for a in range(6):
                    acc = 0.0
                    for j in range(m):
                        acc += M[a * m + j] * M[a * m + j]
                    acc = sqrt(acc)
                    if acc == 0.0:
                        acc = 1.0
                    colnorm[a] = acc
                    for j in range(m):
                        M[a * m + j] /= acc
                for k in range(6 * m):
                    A[k] = M[k]
                ratio = _jacobi_svd_ratio(A, <int> m, 6, sv)
                if not (ratio >= 1e-8):
                    continue
                smax = 0.0
                smin = INFINITY
                for a in range(6):
                    if sv[a] > smax:
                        smax = sv[a]
                    if sv[a] < smin:
                        smin = sv[a]
                cond[node] = smax / smin
                for a in range(6):
                    for b in range(a, 6):
                        acc = 0.0
                        for j in range(m):
                            acc += M[a * m + j] * M[b * m + j]
                        N[a * 6 + b] = acc
                        N[b * 6 + a] = acc
                # Cholesky N = L L^T (lower, row-major)
                chol_ok = True
                for a in range(6):
                    for b in range(a + 1):
                        acc = N[a * 6 + b]
                        for k in range(b):
                            acc -= L[a * 6 + k] * L[b * 6 + k]
                        if a == b:
                            if acc <= 0.0:
                                chol_ok = False
                                break
                            L[a * 6 + a] = sqrt(acc)
                        else:
                            L[a * 6 + b] = acc / L[b * 6 + b]
                    if not chol_ok:
                        break
                if not chol_ok:
                    cond[node] = INFINITY
                    continue
                # z[c] = N^{-1} e_{c+1}
                for col in range(2):
                    for a in range(6):
                        acc = 1.0 if a == col + 1 else 0.0
                        for k in range(a):
                            acc -= L[a * 6 + k] * z[col][k]
                        z[col][a] = acc / L[a * 6 + a]
                    for a in range(5, -1, -1):
                        acc = z[col][a]
                        for k in range(a + 1, 6):
                            acc -= L[k * 6 + a] * z[col][k]
                        z[col][a] = acc / L[a * 6 + a]
                for j in range(m):
                    acc = 0.0
                    for a in range(6):
                        acc += M[a * m + j] * z[0][a]
                    wx[ptr[node] + j] = acc / (colnorm[1] * rad)
                    acc = 0.0
                    for a in range(6):
                        acc += M[a * m + j] * z[1][a]
                    wy[ptr[node] + j] = acc / (colnorm[2] * rad)
    finally:
        free(M)
        free(A)
    return wx_arr, wy_arr, cond_arr
