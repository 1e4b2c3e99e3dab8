"""Polynomial-preserving gradient recovery on each fictitious domain.

For every node the recovered gradient is the gradient at the node of a
least-squares quadratic fitted to nodal values on a ring patch of elements
of the same side.  The fits only depend on geometry, so the recovery is
stored as two sparse operators ``Gx``, ``Gy`` acting on coefficient vectors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import kernels
from .errors import PatchFailure
from .geometry import Classification, CutInfos, chord_quadrature, side_quadrature
from .mesh import Mesh
from .quadrature import map_triangles
from .space import DofMap, PairedField, barycentric

MAX_RINGS = 4
ESTIMATE_ORDER = 4


@dataclass(frozen=True, eq=False)
class PatchFit:
    center: int
    sample_nodes: np.ndarray
    ring_count: int
    weights_x: np.ndarray
    weights_y: np.ndarray
    condition_estimate: float


@dataclass(frozen=True, eq=False)
class SideRecovery:
    """Recovery operator of one side, in local node numbering."""

    side: int
    nodes: np.ndarray          # mesh vertex ids
    indptr: np.ndarray
    indices: np.ndarray        # local node ids of the samples
    wx: np.ndarray
    wy: np.ndarray
    rings: np.ndarray
    cond: np.ndarray

    def patch(self, local: int) -> PatchFit:
        s = slice(self.indptr[local], self.indptr[local + 1])
        return PatchFit(int(self.nodes[local]), self.nodes[self.indices[s]], int(self.rings[local]),
                        self.wx[s], self.wy[s], float(self.cond[local]))


def _node_adjacency(mesh: Mesh, elements, nodes):
    """Boolean CSR matrix: local nodes sharing an element (incl. self)."""
    local = np.full(len(mesh.vertices), -1, dtype=np.int64)
    local[nodes] = np.arange(len(nodes))
    tri = local[mesh.triangles[elements]]
    k = len(elements)
    E = sp.csr_matrix((np.ones(3 * k), (np.repeat(np.arange(k), 3), tri.ravel())), shape=(k, len(nodes)))
    A = (E.T @ E).tocsr()
    A.data[:] = 1.0
    return A


def side_recovery(mesh: Mesh, elements, nodes, side: int = 1, max_rings: int = MAX_RINGS) -> SideRecovery:
    """Build the PPR weights for the nodes of the elements ``elements``.

    Each node starts with the one-ring patch; nodes whose fit has fewer than
    six samples or is rank deficient are retried with one more ring, up to
    ``max_rings``.  Raises PatchFailure if some node never gets a valid fit.
    """
    nodes = np.asarray(nodes, dtype=np.int64)
    n = len(nodes)
    x = mesh.vertices[nodes, 0]
    y = mesh.vertices[nodes, 1]
    A1 = _node_adjacency(mesh, elements, nodes)
    pattern = A1
    fits = {}
    pending = np.arange(n)
    rings = np.zeros(n, dtype=np.int64)
    cond = np.full(n, np.inf)
    for ring in range(1, max_rings + 1):
        if ring > 1:
            pattern = (pattern @ A1).tocsr()
            pattern.data[:] = 1.0
        sub = pattern[pending]
        sub.sort_indices()
        wx, wy, c = _fit_rows(sub, pending, x, y)
        ok = np.isfinite(c)
        for j in np.flatnonzero(ok):
            node = pending[j]
            s = slice(sub.indptr[j], sub.indptr[j + 1])
            fits[node] = (sub.indices[s].astype(np.int64), wx[s], wy[s])
        rings[pending[ok]] = ring
        cond[pending[ok]] = c[ok]
        pending = pending[~ok]
        if pending.size == 0:
            break
    if pending.size:
        bad = nodes[pending]
        raise PatchFailure(f"side {side}: {bad.size} node(s) without a full-rank patch after {max_rings} rings "
                           f"(first vertices: {bad[:8].tolist()})")
    counts = np.array([len(fits[i][0]) for i in range(n)], dtype=np.int64)
    indptr = np.concatenate([[0], np.cumsum(counts)])
    indices = np.concatenate([fits[i][0] for i in range(n)]) if n else np.zeros(0, np.int64)
    wx = np.concatenate([fits[i][1] for i in range(n)]) if n else np.zeros(0)
    wy = np.concatenate([fits[i][2] for i in range(n)]) if n else np.zeros(0)
    return SideRecovery(side, nodes, indptr, indices, wx, wy, rings, cond)


def _fit_rows(sub, centers, x, y):
    """Run the fit kernel with ``centers[j]`` as the expansion point of row j.

    The kernel expands about the coordinates of the row's own index, so the
    sample coordinates are re-indexed: row j's center sits at position j.
    """
    k = len(centers)
    cx = np.concatenate([x[centers], x])
    cy = np.concatenate([y[centers], y])
    return kernels.ppr_fit(sub.indptr, sub.indices + k, cx, cy)


@dataclass(frozen=True, eq=False)
class RecoveryOperator:
    """Sparse ``Gx``, ``Gy`` mapping coefficient vectors to nodal gradients."""

    dofmap: DofMap
    Gx: sp.csr_matrix
    Gy: sp.csr_matrix
    sides: tuple

    def __call__(self, field: PairedField) -> "RecoveredGradient":
        c = field.coefficients
        return RecoveredGradient(self.Gx @ c, self.Gy @ c, self.dofmap)


def build_recovery(dofmap: DofMap, max_rings: int = MAX_RINGS) -> RecoveryOperator:
    mesh = dofmap.mesh
    n = dofmap.n_dofs
    rows, cols, vx, vy = [], [], [], []
    sides = []
    for side in (1, 2):
        nodes = dofmap.nodes(side)
        if len(nodes) == 0:
            sides.append(None)
            continue
        rec = side_recovery(mesh, dofmap.support(side), nodes, side, max_rings)
        sides.append(rec)
        dof = dofmap.node_dof[side - 1, nodes]
        counts = np.diff(rec.indptr)
        rows.append(np.repeat(dof, counts))
        cols.append(dof[rec.indices])
        vx.append(rec.wx)
        vy.append(rec.wy)
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    Gx = sp.csr_matrix((np.concatenate(vx), (r, c)), shape=(n, n))
    Gy = sp.csr_matrix((np.concatenate(vy), (r, c)), shape=(n, n))
    return RecoveryOperator(dofmap, Gx, Gy, tuple(sides))


def ppr_recover(dofmap: DofMap, field: PairedField, side: int) -> np.ndarray:
    """Recovered nodal gradients (n_side, 2) on one side, in vertex order."""
    nodes = dofmap.nodes(side)
    rec = side_recovery(dofmap.mesh, dofmap.support(side), nodes, side)
    vals = field.coefficients[dofmap.node_dof[side - 1, nodes]]
    counts = np.diff(rec.indptr)
    rows = np.repeat(np.arange(len(nodes)), counts)
    gx = np.bincount(rows, rec.wx * vals[rec.indices], minlength=len(nodes))
    gy = np.bincount(rows, rec.wy * vals[rec.indices], minlength=len(nodes))
    return np.column_stack([gx, gy])


@dataclass(frozen=True, eq=False)
class RecoveredGradient:
    """Nodal recovered gradients per DOF, interpolated linearly per side."""

    gx: np.ndarray
    gy: np.ndarray
    dofmap: DofMap

    def side(self, side: int) -> np.ndarray:
        """(n_side, 2) nodal values, in the side's vertex order."""
        sl = self.dofmap.side_slice(side)
        return np.column_stack([self.gx[sl], self.gy[sl]])

    def at(self, side: int, elements, points) -> np.ndarray:
        """Values (k, q, 2) at points (k, q, 2) inside ``elements``."""
        dofs = self.dofmap.element_dofs(side, elements)
        safe = np.where(dofs >= 0, dofs, 0)
        lam = barycentric(self.dofmap.mesh, elements, points)
        lam = np.where((dofs >= 0)[:, None, :], lam, 0.0)
        return np.stack([np.einsum("kqj,kj->kq", lam, self.gx[safe]),
                         np.einsum("kqj,kj->kq", lam, self.gy[safe])], axis=-1)


def uppr(dofmap: DofMap, field: PairedField, operator: RecoveryOperator | None = None) -> RecoveredGradient:
    """Side-wise PPR of a paired field."""
    if operator is None:
        operator = build_recovery(dofmap)
    return operator(field)


def side_gradients(field: PairedField, side: int, elements) -> np.ndarray:
    """Element gradients (k, 2) of one side; zero where DOFs are missing."""
    dm = field.dofmap
    dofs = dm.element_dofs(side, elements)
    vals = np.where(dofs >= 0, field.coefficients[np.where(dofs >= 0, dofs, 0)], 0.0)
    return np.einsum("kj,kjd->kd", vals, dm.mesh.gradients()[elements])


def _side_pieces(mesh: Mesh, classification: Classification, side: int, order: int):
    """Straight-chord quadrature over the side-``side`` part of every element."""
    strict = classification.strict1 if side == 1 else classification.strict2
    P = mesh.corner_coordinates()[strict]
    pts_s, w_s = map_triangles(P[:, 0], P[:, 1], P[:, 2], order)
    pts_c, w_c = side_quadrature(classification.cuts, side, order)
    return [(strict, pts_s, w_s), (classification.cuts.element, pts_c, w_c)]


def estimate(mesh: Mesh, classification: Classification, infos, dofmap: DofMap, field: PairedField,
             recovered: RecoveredGradient, beta1, beta2):
    """Recovery-based indicators ``eta_T`` (per element) and ``eta_h``."""
    eta2 = np.zeros(mesh.n_triangles)
    for side, beta in ((1, beta1), (2, beta2)):
        for els, pts, w in _side_pieces(mesh, classification, side, ESTIMATE_ORDER):
            if len(els) == 0:
                continue
            diff = recovered.at(side, els, pts) - side_gradients(field, side, els)[:, None, :]
            b = np.broadcast_to(np.asarray(beta(pts[..., 0], pts[..., 1]), dtype=float), w.shape)
            np.add.at(eta2, els, np.sum(w * b * np.sum(diff * diff, axis=-1), axis=1))
    eta_T = np.sqrt(np.maximum(eta2, 0.0))
    return eta_T, float(np.sqrt(eta2.sum()))


def mesh_norm(mesh: Mesh, classification: Classification, infos: CutInfos, dofmap: DofMap, field: PairedField,
              order: int = 4) -> float:
    """Mesh-dependent energy-type norm with kappa-weighted flux averages."""
    total = 0.0
    for side in (1, 2):
        for els, pts, w in _side_pieces(mesh, classification, side, order):
            if len(els) == 0:
                continue
            g = side_gradients(field, side, els)
            total += float(np.sum(w.sum(axis=1) * np.sum(g * g, axis=1)))
    if len(infos):
        geo = infos.geometry
        els = geo.element
        pts, w = chord_quadrature(geo, order)
        g1 = side_gradients(field, 1, els)
        g2 = side_gradients(field, 2, els)
        dn = infos.kappa1 * np.sum(g1 * geo.normal, axis=1) + infos.kappa2 * np.sum(g2 * geo.normal, axis=1)
        total += float(np.sum(geo.h_T * geo.chord_len * dn * dn))
        lam = barycentric(mesh, els, pts)
        v1 = _side_values(field, 1, els, lam)
        v2 = _side_values(field, 2, els, lam)
        total += float(np.sum(np.sum(w * (v1 - v2) ** 2, axis=1) / geo.h_T))
    return float(np.sqrt(total))


def _side_values(field, side, els, lam):
    dofs = field.dofmap.element_dofs(side, els)
    vals = np.where(dofs >= 0, field.coefficients[np.where(dofs >= 0, dofs, 0)], 0.0)
    return np.einsum("kqj,kj->kq", lam, vals)


# -- dumps ----------------------------------------------------------------------

def recovered_rows(recovered: RecoveredGradient):
    """Rows ``(side, x, y, gx, gy)`` for every DOF."""
    dm = recovered.dofmap
    out = []
    for side in (1, 2):
        nodes = dm.nodes(side)
        g = recovered.side(side)
        V = dm.mesh.vertices[nodes]
        for (x, y), (gx, gy) in zip(V, g):
            out.append((side, float(x), float(y), float(gx), float(gy)))
    return out
