"""Assembly of the Nitsche bilinear form and load vector.

Local interface matrices use the 6-vector ordering ``[side-1 hats, side-2
hats]`` of the three element vertices, so that the jump of a basis function
is ``[lam, -lam]`` and its weighted normal flux is
``[kappa1 beta1 dn(lam), kappa2 beta2 dn(lam)]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from .geometry import Classification, CutInfos, chord_quadrature, side_quadrature
from .mesh import Mesh
from .quadrature import map_triangles
from .space import DofMap, barycentric

VOLUME_ORDER = 4
CHORD_ORDER = 4


def as_field(c) -> Callable:
    """Wrap a constant into a callable ``f(x, y)``; callables pass through."""
    if callable(c):
        return c
    value = float(c)

    def const(x, y):
        return np.full(np.shape(x), value)

    const.constant = value
    return const


def _eval(fn, pts):
    return np.broadcast_to(np.asarray(fn(pts[..., 0], pts[..., 1]), dtype=float), pts.shape[:-1])


@dataclass(eq=False)
class ProblemSpec:
    """Data of an interface problem.

    ``q(x, y)`` is the value jump ``u1 - u2`` and ``g(x, y, nx, ny)`` the
    flux jump ``beta1 du1/dn - beta2 du2/dn`` on the interface, ``n``
    pointing from side 1 into side 2.  ``u1``/``u2`` and ``grad1``/``grad2``
    are the exact branches extended to the whole square (optional, used for
    boundary values and errors).
    """

    name: str
    interface: object
    beta1: Callable
    beta2: Callable
    f1: Callable
    f2: Callable
    q: Optional[Callable] = None
    g: Optional[Callable] = None
    u1: Optional[Callable] = None
    u2: Optional[Callable] = None
    grad1: Optional[Callable] = None
    grad2: Optional[Callable] = None
    dirichlet1: Optional[Callable] = None
    dirichlet2: Optional[Callable] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.beta1 = as_field(self.beta1)
        self.beta2 = as_field(self.beta2)
        self.f1 = as_field(self.f1)
        self.f2 = as_field(self.f2)
        if self.dirichlet1 is None:
            self.dirichlet1 = self.u1
        if self.dirichlet2 is None:
            self.dirichlet2 = self.u2

    def beta(self, side):
        return self.beta1 if side == 1 else self.beta2

    def source(self, side):
        return self.f1 if side == 1 else self.f2

    def exact(self, side):
        return self.u1 if side == 1 else self.u2

    def exact_grad(self, side):
        return self.grad1 if side == 1 else self.grad2

    def scaled(self, c):
        """Problem with f, q, g and boundary data multiplied by ``c``."""

        def mul(fn):
            if fn is None:
                return None
            return lambda *a: c * np.asarray(fn(*a))

        return ProblemSpec(
            self.name, self.interface, self.beta1, self.beta2, mul(self.f1), mul(self.f2),
            mul(self.q), mul(self.g), mul(self.u1), mul(self.u2), mul(self.grad1), mul(self.grad2),
            mul(self.dirichlet1), mul(self.dirichlet2), dict(self.meta),
        )


@dataclass(frozen=True, eq=False)
class SparseSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def asymmetry(self) -> float:
        """max |A - A^T| / max |A|."""
        d = (self.matrix - self.matrix.T).tocoo()
        big = np.abs(self.matrix.data).max() if self.matrix.nnz else 1.0
        return float(np.abs(d.data).max() / big) if d.nnz else 0.0


# -- local contributions --------------------------------------------------------

def volume_terms(mesh: Mesh, classification: Classification, dofmap: DofMap, problem: ProblemSpec, side: int):
    """Stiffness (k, 3, 3), load (k, 3) and DOFs (k, 3) for one side."""
    c = classification
    strict = c.strict1 if side == 1 else c.strict2
    cuts = c.cuts
    beta, f = problem.beta(side), problem.source(side)
    P = mesh.corner_coordinates()
    pts_s, w_s = map_triangles(P[strict, 0], P[strict, 1], P[strict, 2], VOLUME_ORDER)
    pts_c, w_c = side_quadrature(cuts, side, VOLUME_ORDER)
    elements = np.concatenate([strict, cuts.element])
    K = []
    F = []
    for els, pts, w in ((strict, pts_s, w_s), (cuts.element, pts_c, w_c)):
        G = mesh.gradients()[els]
        bw = np.sum(w * _eval(beta, pts), axis=1)
        K.append(bw[:, None, None] * np.einsum("kid,kjd->kij", G, G))
        lam = barycentric(mesh, els, pts)
        F.append(np.einsum("kq,kqj->kj", w * _eval(f, pts), lam))
    return np.concatenate(K), np.concatenate(F), dofmap.element_dofs(side, elements)


def interface_terms(mesh: Mesh, infos: CutInfos, dofmap: DofMap, problem: ProblemSpec, q_hinv: bool = True):
    """Nitsche coupling matrices (k, 6, 6), loads (k, 6) and DOFs (k, 6)."""
    g = infos.geometry
    els = g.element
    pts, w = chord_quadrature(g, CHORD_ORDER)
    lam = barycentric(mesh, els, pts)                 # (k, q, 3)
    dn = np.einsum("kjd,kd->kj", mesh.gradients()[els], g.normal)  # (k, 3)
    b1 = _eval(problem.beta1, pts)
    b2 = _eval(problem.beta2, pts)
    J = np.concatenate([lam, -lam], axis=2)           # (k, q, 6)
    Fl = np.concatenate(
        [(infos.kappa1[:, None] * b1)[..., None] * dn[:, None, :], (infos.kappa2[:, None] * b2)[..., None] * dn[:, None, :]],
        axis=2,
    )
    pen = infos.gamma / g.h_T
    JF = np.einsum("kq,kqi,kqj->kij", w, J, Fl)
    A = -(JF + np.swapaxes(JF, 1, 2)) + pen[:, None, None] * np.einsum("kq,kqi,kqj->kij", w, J, J)

    L = np.zeros((len(els), 6))
    if problem.q is not None:
        qv = _eval(problem.q, pts)
        qpen = pen if q_hinv else infos.gamma
        L += -np.einsum("kq,kqi->ki", w * qv, Fl) + qpen[:, None] * np.einsum("kq,kqi->ki", w * qv, J)
    if problem.g is not None:
        nx = np.broadcast_to(g.normal[:, None, 0], w.shape)
        ny = np.broadcast_to(g.normal[:, None, 1], w.shape)
        gv = np.broadcast_to(np.asarray(problem.g(pts[..., 0], pts[..., 1], nx, ny), dtype=float), w.shape)
        star = np.concatenate([infos.kappa2[:, None, None] * lam, infos.kappa1[:, None, None] * lam], axis=2)
        L += np.einsum("kq,kqi->ki", w * gv, star)
    dofs = np.concatenate([dofmap.element_dofs(1, els), dofmap.element_dofs(2, els)], axis=1)
    return A, L, dofs


def _scatter(n, blocks):
    rows, cols, vals = [], [], []
    rhs = np.zeros(n)
    for K, F, D in blocks:
        k = D.shape[1]
        r = np.repeat(D, k, axis=1).ravel()
        c = np.tile(D, (1, k)).ravel()
        v = K.ravel()
        keep = (r >= 0) & (c >= 0)
        # missing DOFs only occur on the empty side of edge cuts, where every
        # contribution vanishes up to rounding
        if not keep.all():
            scale = np.abs(K).max(axis=(1, 2)).repeat(k * k)
            if np.any(np.abs(v[~keep]) > 1e-10 * scale[~keep]):
                raise ValueError("element references a missing DOF")
        rows.append(r[keep])
        cols.append(c[keep])
        vals.append(v[keep])
        ok = D.ravel() >= 0
        np.add.at(rhs, D.ravel()[ok], F.ravel()[ok])
    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()
    A.sum_duplicates()
    return A, rhs


def assemble(mesh: Mesh, classification: Classification, infos: CutInfos, dofmap: DofMap, problem: ProblemSpec,
             q_hinv: bool = True) -> SparseSystem:
    """Assemble ``a_h`` and ``L_h`` before boundary conditions.

    ``q_hinv=False`` drops the ``1/h_T`` factor from the penalty part of the
    value-jump load term (only matters when ``q != 0``).
    """
    blocks = [volume_terms(mesh, classification, dofmap, problem, s) for s in (1, 2)]
    if len(infos):
        blocks.append(interface_terms(mesh, infos, dofmap, problem, q_hinv))
    A, b = _scatter(dofmap.n_dofs, blocks)
    if not (np.all(np.isfinite(A.data)) and np.all(np.isfinite(b))):
        raise FloatingPointError("assembled system contains NaN or inf")
    return SparseSystem(A, b)


def dirichlet_values(dofmap: DofMap, problem: ProblemSpec) -> np.ndarray:
    """Boundary values at ``dofmap.dirichlet_dofs`` from the side data."""
    V = dofmap.dof_coordinates()
    sides = dofmap.dof_sides()
    d = dofmap.dirichlet_dofs
    out = np.zeros(len(d))
    for side, fn in ((1, problem.dirichlet1), (2, problem.dirichlet2)):
        sel = sides[d] == side
        if np.any(sel):
            if fn is None:
                raise ValueError(f"no boundary data for side {side}")
            out[sel] = fn(V[d[sel], 0], V[d[sel], 1])
    return out


def apply_dirichlet(system: SparseSystem, dofs, values) -> SparseSystem:
    """Symmetric elimination: lift into the rhs, unit diagonal, rhs = value."""
    dofs = np.asarray(dofs, dtype=np.int64)
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise ValueError("boundary values must be finite")
    n = system.n
    lift = np.zeros(n)
    lift[dofs] = values
    rhs = system.rhs - system.matrix @ lift
    keep = np.ones(n)
    keep[dofs] = 0.0
    D = sp.diags(keep)
    A = (D @ system.matrix @ D).tocsr()
    A = A + sp.diags(1.0 - keep)
    A = A.tocsr()
    A.eliminate_zeros()
    rhs[dofs] = values
    return SparseSystem(A, rhs)
