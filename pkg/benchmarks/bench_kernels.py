"""Compare the compiled and numpy kernels on realistic inputs.

    python benchmarks/bench_kernels.py [--repeat 3]

Prints one line per kernel with both timings, the speedup and the largest
difference between the two results.
"""
import argparse
import time

import numpy as np

from nitsche_uppr import interfaces, kernels
from nitsche_uppr.mesh import uniform_mesh
from nitsche_uppr.recovery import _node_adjacency


def _best(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _patches(n):
    """Two-ring patches of every vertex of uniform_mesh(n), center first."""
    mesh = uniform_mesh(n)
    nodes = np.arange(mesh.n_vertices)
    A = _node_adjacency(mesh, np.arange(mesh.n_triangles), nodes)
    A2 = (A @ A + A).tocsr()
    A2.setdiag(0)
    A2.eliminate_zeros()
    A2.sort_indices()
    counts = np.diff(A2.indptr) + 1
    indptr = np.concatenate([[0], np.cumsum(counts)])
    indices = np.empty(indptr[-1], dtype=np.int64)
    for v in range(mesh.n_vertices):
        indices[indptr[v]] = v
        indices[indptr[v] + 1:indptr[v + 1]] = A2.indices[A2.indptr[v]:A2.indptr[v + 1]]
    return indptr, indices, mesh.vertices[:, 0].copy(), mesh.vertices[:, 1].copy()


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--points", type=int, default=20000)
    ap.add_argument("--n", type=int, default=128, help="uniform mesh size for the patch fits")
    args = ap.parse_args(argv)

    if kernels.BACKEND != "cython":
        print("compiled kernels not built; only the numpy path is available")
    py = kernels.python_impl
    fast = kernels if kernels.BACKEND == "cython" else py

    rng = np.random.default_rng(0)
    iface = interfaces.sharp20()
    px, py_ = rng.uniform(-1, 1, (2, args.points))
    vx, vy = iface.vertices[:, 0], iface.vertices[:, 1]
    cases = [
        (f"polyline_signed_distance ({args.points} pts, {len(vx)} segs)",
         lambda m: m.polyline_signed_distance(px, py_, vx, vy)),
    ]
    patch = _patches(args.n)
    cases.append((f"ppr_fit ({len(patch[0]) - 1} patches)", lambda m: m.ppr_fit(*patch)))

    print(f"backend: {kernels.BACKEND}")
    print(f"{'kernel':48s} {'numpy [s]':>10s} {'cython [s]':>10s} {'speedup':>8s} {'max diff':>10s}")
    for name, call in cases:
        t_py, r_py = _best(lambda: call(py), args.repeat)
        t_c, r_c = _best(lambda: call(fast), args.repeat)
        a = r_py if isinstance(r_py, tuple) else (r_py,)
        b = r_c if isinstance(r_c, tuple) else (r_c,)
        diff = max(float(np.max(np.abs(np.asarray(u) - np.asarray(v)) / (1 + np.abs(np.asarray(u)))))
                   for u, v in zip(a[:2], b[:2]))
        print(f"{name:48s} {t_py:10.4f} {t_c:10.4f} {t_py / t_c:8.1f} {diff:10.2e}")


if __name__ == "__main__":
    main()
