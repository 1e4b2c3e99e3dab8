"""Jacobi-preconditioned conjugate gradients."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import IndefiniteDetected, NotConverged


@dataclass
class SolveReport:
    iterations: int
    residual: float
    converged: bool
    rho_history: list = field(default_factory=list, repr=False)


def solve(system, tol: float = 1e-10, maxit: int | None = None, x0=None, callback=None):
    """Solve ``system.matrix x = system.rhs``.

    Stops when ``||b - A x|| / ||b|| <= tol`` (true residual, recomputed at
    the end).  ``callback(it, x)`` is called after every update.  Raises
    NotConverged with the best iterate attached, or
    IndefiniteDetected when ``p^T A p <= 0``.
    """
    if not 0.0 < tol < 1.0:
        raise ValueError("tol must lie in (0, 1)")
    A = system.matrix
    b = np.asarray(system.rhs, dtype=float)
    n = len(b)
    if maxit is None:
        maxit = max(1, int(math.ceil(20 * math.sqrt(n))))
    diag = A.diagonal()
    if np.any(diag <= 0):
        raise IndefiniteDetected("non-positive diagonal entry")
    dinv = 1.0 / diag
    bnorm = np.linalg.norm(b)
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    if bnorm == 0.0:
        return np.zeros(n), SolveReport(0, 0.0, True)
    r = b - A @ x
    z = dinv * r
    p = z.copy()
    rho = float(r @ z)
    hist = [rho]
    res = np.linalg.norm(r) / bnorm
    best_x, best_res = x.copy(), res
    it = 0
    while res > tol and it < maxit:
        Ap = A @ p
        pAp = float(p @ Ap)
        if pAp <= 0.0:
            raise IndefiniteDetected(f"p^T A p = {pAp:.3e} at iteration {it}")
        alpha = rho / pAp
        x += alpha * p
        r -= alpha * Ap
        it += 1
        if callback is not None:
            callback(it, x)
        res = np.linalg.norm(r) / bnorm
        if res < best_res:
            best_x, best_res = x.copy(), res
        if res <= tol:
            # guard against drift of the recursive residual
            true = np.linalg.norm(b - A @ x) / bnorm
            if true <= tol:
                res = true
                break
            r = b - A @ x
            res = true
        z = dinv * r
        rho_new = float(r @ z)
        p = z + (rho_new / rho) * p
        rho = rho_new
        hist.append(rho)
    res = np.linalg.norm(b - A @ x) / bnorm
    report = SolveReport(it, float(res), bool(res <= tol), hist)
    if not report.converged:
        raise NotConverged(f"PCG stopped after {it} iterations, residual {res:.3e}", best_x, report)
    return x, report
