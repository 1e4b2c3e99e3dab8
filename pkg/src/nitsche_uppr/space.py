"""Doubled P1 space on the two fictitious domains."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Classification
from .mesh import Mesh


@dataclass(frozen=True, eq=False)
class DofMap:
    """Global numbering of the unknowns of both fictitious spaces.

    ``node_dof[i - 1, v]`` is the DOF of vertex ``v`` on side ``i`` or -1.
    Side-1 DOFs come first, each side in vertex order.
    """

    mesh: Mesh
    classification: Classification
    node_dof: np.ndarray
    nodes1: np.ndarray
    nodes2: np.ndarray
    n_dofs: int
    dirichlet_dofs: np.ndarray

    def support(self, side: int) -> np.ndarray:
        """Elements whose three vertices all carry side-``side`` DOFs."""
        return self.classification.support(side)

    def nodes(self, side: int) -> np.ndarray:
        return self.nodes1 if side == 1 else self.nodes2

    def side_slice(self, side: int) -> slice:
        n1 = len(self.nodes1)
        return slice(0, n1) if side == 1 else slice(n1, self.n_dofs)

    def element_dofs(self, side: int, elements=None) -> np.ndarray:
        """(k, 3) DOF indices of ``elements`` on ``side`` (-1 where absent)."""
        tri = self.mesh.triangles if elements is None else self.mesh.triangles[elements]
        return self.node_dof[side - 1][tri]

    def dof_coordinates(self) -> np.ndarray:
        return self.mesh.vertices[np.concatenate([self.nodes1, self.nodes2])]

    def dof_sides(self) -> np.ndarray:
        return np.concatenate([np.ones(len(self.nodes1), int), np.full(len(self.nodes2), 2)])


def build_dofmap(mesh: Mesh, classification: Classification) -> DofMap:
    nv = len(mesh.vertices)
    node_dof = np.full((2, nv), -1, dtype=np.int64)
    nodes = []
    offset = 0
    for side in (1, 2):
        cov = classification.support(side)
        used = np.unique(mesh.triangles[cov]) if len(cov) else np.zeros(0, dtype=np.int64)
        node_dof[side - 1, used] = offset + np.arange(len(used))
        offset += len(used)
        nodes.append(used)
    bflag = mesh.boundary_vertex_flags
    dir_dofs = np.concatenate([node_dof[0][nodes[0][bflag[nodes[0]]]], node_dof[1][nodes[1][bflag[nodes[1]]]]])
    return DofMap(mesh, classification, node_dof, nodes[0], nodes[1], offset, np.sort(dir_dofs))


def barycentric(mesh: Mesh, elements, points) -> np.ndarray:
    """Barycentric coordinates (k, q, 3) of points (k, q, 2) in ``elements``."""
    elements = np.atleast_1d(elements)
    points = np.asarray(points, dtype=float)
    G = mesh.gradients()[elements]                       # (k, 3, 2)
    c = mesh.corner_coordinates()[elements].mean(axis=1)  # (k, 2)
    d = points - c[:, None, :] if points.ndim == 3 else points - c
    if points.ndim == 3:
        return 1.0 / 3.0 + np.einsum("kqd,kjd->kqj", d, G)
    return 1.0 / 3.0 + np.einsum("kd,kjd->kj", d, G)


@dataclass(frozen=True, eq=False)
class PairedField:
    """Coefficient vector of an element of the doubled space."""

    coefficients: np.ndarray
    dofmap: DofMap

    def __post_init__(self):
        if len(self.coefficients) != self.dofmap.n_dofs:
            raise ValueError("coefficient vector does not match the DOF map")
        if not np.all(np.isfinite(self.coefficients)):
            raise ValueError("PairedField entries must be finite")

    def side_values(self, side: int) -> np.ndarray:
        """Nodal values on all mesh vertices; NaN where the side has no DOF."""
        out = np.full(len(self.dofmap.mesh.vertices), np.nan)
        nodes = self.dofmap.nodes(side)
        out[nodes] = self.coefficients[self.dofmap.node_dof[side - 1, nodes]]
        return out

    def element_gradients(self, side: int, elements) -> np.ndarray:
        dofs = self.dofmap.element_dofs(side, elements)
        if np.any(dofs < 0):
            raise ValueError(f"side {side} has no DOFs on some requested elements")
        G = self.dofmap.mesh.gradients()[elements]
        return np.einsum("kj,kjd->kd", self.coefficients[dofs], G)

    def eval(self, element: int, side: int, point):
        """Value and gradient of the side-``side`` component at ``point``."""
        dofs = self.dofmap.element_dofs(side, [element])[0]
        if np.any(dofs < 0):
            raise ValueError(f"element {element} carries no side-{side} DOFs")
        lam = barycentric(self.dofmap.mesh, [element], np.asarray(point, dtype=float)[None])[0]
        vals = self.coefficients[dofs]
        grad = vals @ self.dofmap.mesh.gradients()[element]
        return float(vals @ lam), grad

    def __add__(self, other):
        return PairedField(self.coefficients + other.coefficients, self.dofmap)

    def __sub__(self, other):
        return PairedField(self.coefficients - other.coefficients, self.dofmap)

    def __rmul__(self, a):
        return PairedField(a * self.coefficients, self.dofmap)


def interpolate(dofmap: DofMap, u1, u2) -> PairedField:
    """Nodal interpolant of the branch extensions ``u1``, ``u2`` (callables)."""
    V = dofmap.mesh.vertices
    c = np.empty(dofmap.n_dofs)
    for side, u in ((1, u1), (2, u2)):
        nodes = dofmap.nodes(side)
        if len(nodes):
            c[dofmap.node_dof[side - 1, nodes]] = u(V[nodes, 0], V[nodes, 1])
    return PairedField(c, dofmap)
