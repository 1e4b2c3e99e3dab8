"""Solve pipeline, error norms, convergence orders and mesh diagnostics."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .assembly import ProblemSpec, apply_dirichlet, assemble, dirichlet_values
from .errors import BudgetExceeded
from .geometry import (
    Classification,
    _assumption_violations,
    _element_signs,
    SNAP_TOL,
    chord_quadrature,
    classify_elements,
    curved_error_quadrature,
    cut_infos,
)
from .mesh import Mesh, bisect, refine_red, uniform_mesh
from .quadrature import map_triangles
from .recovery import RecoveredGradient, build_recovery, estimate, side_gradients
from .solver import solve
from .space import PairedField, build_dofmap, interpolate

log = logging.getLogger(__name__)

ERROR_ORDER = 6
CURVED_SUBDIVISIONS = 8
UNDEFINED = float("nan")


# -- pipeline -----------------------------------------------------------------

@dataclass(eq=False)
class State:
    """Everything computed for one mesh."""

    mesh: Mesh
    problem: ProblemSpec
    classification: Classification
    infos: object
    dofmap: object
    uh: PairedField
    report: object
    recovery: object
    recovered: RecoveredGradient


def solve_problem(mesh: Mesh, problem: ProblemSpec, *, check="raise", tol=1e-10, maxit=None,
                  q_hinv=True, penalty_scale=1.0) -> State:
    """classify -> weights -> assemble -> Dirichlet -> PCG -> recovery."""
    cls = classify_elements(mesh, problem.interface, check=check)
    infos = cut_infos(cls, problem.beta1, problem.beta2, penalty_scale)
    dm = build_dofmap(mesh, cls)
    system = assemble(mesh, cls, infos, dm, problem, q_hinv=q_hinv)
    system = apply_dirichlet(system, dm.dirichlet_dofs, dirichlet_values(dm, problem))
    x, report = solve(system, tol=tol, maxit=maxit)
    uh = PairedField(x, dm)
    rec_op = build_recovery(dm)
    return State(mesh, problem, cls, infos, dm, uh, report, rec_op, rec_op(uh))


def interpolate_exact(problem: ProblemSpec, dofmap) -> PairedField:
    """Nodal interpolant of the exact branch extensions on both fictitious domains."""
    if problem.u1 is None or problem.u2 is None:
        raise ValueError("problem has no exact branches")
    return interpolate(dofmap, problem.u1, problem.u2)


# -- error norms ---------------------------------------------------------------

@dataclass
class ErrorTriple:
    De: float
    Die: float
    Dre: float
    ndofs: int
    h: float
    extra: dict = field(default_factory=dict)


def _error_pieces(mesh: Mesh, cls: Classification, interface, side: int, subdivisions: int, order: int):
    strict = cls.strict1 if side == 1 else cls.strict2
    P = mesh.corner_coordinates()[strict]
    pieces = [(strict,) + map_triangles(P[:, 0], P[:, 1], P[:, 2], order)]
    if len(cls.cuts):
        q1, q2 = curved_error_quadrature(cls.cuts, interface, subdivisions, order, mesh=mesh)
        pts, w = q1 if side == 1 else q2
        pieces.append((cls.cuts.element, pts, w))
    return pieces


def error_norms(state: State, subdivisions: int = CURVED_SUBDIVISIONS, order: int = ERROR_ORDER,
                weighted: bool = False) -> ErrorTriple:
    """De, Die, Dre over the two subdomains (curved quadrature on cut elements).

    With ``weighted=True`` the integrands carry the coefficient beta; the
    weighted De is stored in ``extra["beta_De"]`` in any case.
    """
    p = state.problem
    if p.grad1 is None or p.grad2 is None:
        raise ValueError("problem has no exact gradients")
    mesh, cls = state.mesh, state.classification
    Iu = interpolate_exact(p, state.dofmap)
    acc = dict(De=0.0, Die=0.0, Dre=0.0, bDe=0.0)
    for side in (1, 2):
        grad = p.exact_grad(side)
        beta = p.beta(side)
        for els, pts, w in _error_pieces(mesh, cls, p.interface, side, subdivisions, order):
            if len(els) == 0:
                continue
            gx, gy = grad(pts[..., 0], pts[..., 1])
            ex = np.stack(np.broadcast_arrays(gx, gy), axis=-1)
            gh = side_gradients(state.uh, side, els)[:, None, :]
            gi = side_gradients(Iu, side, els)[:, None, :]
            rg = state.recovered.at(side, els, pts)
            e1 = np.sum((ex - gh) ** 2, axis=-1)
            acc["De"] += float(np.sum(w * e1))
            acc["Die"] += float(np.sum(w * np.sum((gi - gh) ** 2, axis=-1)))
            acc["Dre"] += float(np.sum(w * np.sum((ex - rg) ** 2, axis=-1)))
            b = np.broadcast_to(np.asarray(beta(pts[..., 0], pts[..., 1]), dtype=float), w.shape)
            acc["bDe"] += float(np.sum(w * b * e1))
    root = {k: math.sqrt(max(v, 0.0)) for k, v in acc.items()}
    return ErrorTriple(root["De"], root["Die"], root["Dre"], state.dofmap.n_dofs, mesh_h(mesh),
                       {"beta_De": root["bDe"]})


def mesh_h(mesh: Mesh) -> float:
    """Leg length of the largest right isosceles triangle (2/N on uniform meshes)."""
    return float(mesh.diameters().max() / math.sqrt(2.0))


def effectivity(state: State, errors: Optional[ErrorTriple] = None):
    """(eta_h, beta-weighted true error, ratio)."""
    if errors is None:
        errors = error_norms(state)
    _, eta = estimate(state.mesh, state.classification, state.infos, state.dofmap, state.uh, state.recovered,
                      state.problem.beta1, state.problem.beta2)
    true = errors.extra["beta_De"]
    return eta, true, eta / true if true > 0 else UNDEFINED


# -- orders -----------------------------------------------------------------

def eoc(errors, scale, mode: str = "by_h") -> List[float]:
    """Observed orders between consecutive rows; NaN where undefined.

    ``scale`` holds h values (``by_h``) or DOF counts (``by_dof``).
    """
    e = np.asarray(errors, dtype=float)
    s = np.asarray(scale, dtype=float)
    if len(e) < 2:
        raise ValueError("need at least two rows")
    out = []
    for k in range(len(e) - 1):
        if not (e[k] > 0 and e[k + 1] > 0) or s[k] == s[k + 1]:
            out.append(UNDEFINED)
            continue
        if mode == "by_h":
            out.append(math.log(e[k] / e[k + 1]) / math.log(s[k] / s[k + 1]))
        elif mode == "by_dof":
            out.append(math.log(e[k] / e[k + 1]) / math.log(s[k + 1] / s[k]))
        else:
            raise ValueError(f"unknown mode {mode!r}")
    return out


@dataclass
class ConvergenceReport:
    name: str
    rows: List[ErrorTriple]
    mode: str = "by_h"

    def scale(self):
        return [r.h for r in self.rows] if self.mode == "by_h" else [r.ndofs for r in self.rows]

    def orders(self, column: str) -> List[float]:
        return eoc([getattr(r, column) for r in self.rows], self.scale(), self.mode)

    def table(self):
        """Header and rows of level, h or DOF, De, order, Die, order, Dre, order."""
        cols = ["De", "Die", "Dre"]
        orders = {c: [UNDEFINED] + (self.orders(c) if len(self.rows) > 1 else []) for c in cols}
        head = ["level", "h" if self.mode == "by_h" else "dof"]
        for c in cols:
            head += [c, "order"]
        body = []
        for k, r in enumerate(self.rows):
            row = [k, r.h if self.mode == "by_h" else r.ndofs]
            for c in cols:
                row += [getattr(r, c), orders[c][k]]
            body.append(row)
        return head, body

    def to_csv(self, path):
        head, body = self.table()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(head)
            for row in body:
                w.writerow([_fmt_csv(v) for v in row])

    def to_text(self) -> str:
        head, body = self.table()
        cells = [head]
        for row in body:
            out = [str(row[0])]
            out.append(_fmt_h(row[1]) if self.mode == "by_h" else str(row[1]))
            for j in range(2, len(row), 2):
                out += [f"{row[j]:.2e}", "--" if math.isnan(row[j + 1]) else f"{row[j + 1]:.2f}"]
            cells.append(out)
        widths = [max(len(r[j]) for r in cells) for j in range(len(head))]
        lines = ["  ".join(c.rjust(wd) for c, wd in zip(r, widths)) for r in cells]
        return f"{self.name}\n" + "\n".join(lines) + "\n"


def _fmt_csv(v):
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def _fmt_h(h):
    inv = 1.0 / h
    return f"1/{int(round(inv))}" if abs(inv - round(inv)) < 1e-9 * inv else f"{h:.4g}"


# -- assumption checking and adaptive meshes -------------------------------------

@dataclass
class AssumptionReport:
    ok: bool
    violations: np.ndarray

    def __bool__(self):
        return self.ok


def check_assumption2(mesh: Mesh, interface, samples: int = 64) -> AssumptionReport:
    """Sampled audit of the two-crossing rule; never raises."""
    vphi = np.asarray(interface(mesh.vertices[:, 0], mesh.vertices[:, 1]), dtype=float)
    signs = _element_signs(mesh, interface, vphi, SNAP_TOL)
    bad = _assumption_violations(mesh, interface, signs, vphi, samples)
    return AssumptionReport(bad.size == 0, bad)


def curvature_marks(mesh: Mesh, cls: Classification, interface, theta: float, samples: int = 8):
    """Cut elements with ``h_T * max |curvature|`` above ``theta``."""
    cuts = cls.cuts
    if len(cuts) == 0:
        return np.zeros(0, dtype=np.int64)
    s = (np.arange(samples) + 0.5) / samples
    pts = cuts.entry[:, None, :] + s[None, :, None] * (cuts.exit - cuts.entry)[:, None, :]
    h = np.repeat(cuts.h_T, samples)
    kap = interface.curvature_at(pts[..., 0].ravel(), pts[..., 1].ravel(), h).reshape(len(cuts), samples)
    return cuts.element[cuts.h_T * kap.max(axis=1) > theta]


def adaptive_initial_mesh(interface, theta: float = 0.8, n0: int = 16, max_levels: int = 24) -> Mesh:
    """Bisect around the interface until curvature is resolved and the two-crossing rule holds.

    Raises BudgetExceeded when ``max_levels`` passes leave violations.
    """
    if theta <= 0:
        raise ValueError("theta must be positive")
    mesh = uniform_mesh(n0)
    for level in range(max_levels + 1):
        cls = classify_elements(mesh, interface, check="off")
        bad = check_assumption2(mesh, interface).violations
        marked = np.union1d(curvature_marks(mesh, cls, interface, theta), bad)
        log.info("adaptive level %d: %d triangles, %d marked (%d violations)", level, mesh.n_triangles,
                 marked.size, bad.size)
        if marked.size == 0:
            return mesh
        if level == max_levels:
            if bad.size:
                raise BudgetExceeded(f"{bad.size} element(s) still violate the two-crossing rule after "
                                     f"{max_levels} levels", mesh, bad)
            return mesh
        mesh = bisect(mesh, marked)
    return mesh


def refine_level(mesh: Mesh, interface, max_repairs: int = 8):
    """One uniform sweep (red refinement) followed by local repair.

    Red refinement keeps the local mesh pattern, which the recovery needs
    for superconvergence; repeated bisection sweeps do not.  Children that
    break the two-crossing rule are bisected until the rule holds again.
    Returns ``(mesh, repaired)`` with the number of repair bisections.
    """
    mesh = refine_red(mesh)
    repaired = 0
    for _ in range(max_repairs):
        bad = check_assumption2(mesh, interface).violations
        if bad.size == 0:
            return mesh, repaired
        repaired += bad.size
        mesh = bisect(mesh, bad)
    bad = check_assumption2(mesh, interface).violations
    if bad.size:
        raise BudgetExceeded(f"{bad.size} element(s) still violate the two-crossing rule after "
                             f"{max_repairs} repair passes", mesh, bad)
    return mesh, repaired
