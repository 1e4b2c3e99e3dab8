"""Interface-independent triangulations of the square (-1, 1)^2.

Triangles are stored counterclockwise.  ``refinement_edge[t]`` is the local
index ``k`` of the edge opposite vertex ``k`` (edge ``k`` joins vertices
``k+1`` and ``k+2``).  Meshes built here always put the refinement edge
opposite local vertex 0, so for right isoceles triangles vertex 0 is the
right-angle corner and edge 0 the hypotenuse.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MeshError


@dataclass(frozen=True)
class ElementGeometry:
    h_T: float
    rho_T: float
    area: float
    vertices: np.ndarray


@dataclass(frozen=True, eq=False)
class Mesh:
    """Conforming triangulation with edge adjacency.

    Only ``vertices``, ``triangles`` and ``refinement_edge`` are inputs; the
    edge tables are derived on construction.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    refinement_edge: np.ndarray
    edges: np.ndarray = field(init=False, repr=False)
    edge_triangles: np.ndarray = field(init=False, repr=False)
    triangle_edges: np.ndarray = field(init=False, repr=False)
    boundary_vertex_flags: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        verts = np.ascontiguousarray(self.vertices, dtype=float)
        tris = np.ascontiguousarray(self.triangles, dtype=np.int64)
        ref = np.ascontiguousarray(self.refinement_edge, dtype=np.int64)
        if verts.ndim != 2 or verts.shape[1] != 2:
            raise MeshError("vertices must have shape (n, 2)")
        if tris.ndim != 2 or tris.shape[1] != 3:
            raise MeshError("triangles must have shape (m, 3)")
        if ref.shape != (len(tris),):
            raise MeshError("refinement_edge must have one entry per triangle")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "triangles", tris)
        object.__setattr__(self, "refinement_edge", ref)
        for name in ("vertices", "triangles", "refinement_edge"):
            getattr(self, name).setflags(write=False)

        m = len(tris)
        # local edge k is opposite vertex k
        local = np.stack([tris[:, [1, 2]], tris[:, [2, 0]], tris[:, [0, 1]]], axis=1)
        keys = np.sort(local.reshape(-1, 2), axis=1)
        edges, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
        inverse = inverse.reshape(-1)
        if np.any(counts > 2):
            raise MeshError("non-manifold mesh: an edge has more than two triangles")
        tri_edges = inverse.reshape(m, 3)

        owner = np.repeat(np.arange(m), 3)
        edge_tris = np.full((len(edges), 2), -1, dtype=np.int64)
        order = np.argsort(inverse, kind="stable")
        sorted_edges = inverse[order]
        first = np.ones(len(order), dtype=bool)
        first[1:] = sorted_edges[1:] != sorted_edges[:-1]
        edge_tris[sorted_edges[first], 0] = owner[order][first]
        edge_tris[sorted_edges[~first], 1] = owner[order][~first]

        bflags = np.zeros(len(verts), dtype=bool)
        bflags[edges[counts == 1].ravel()] = True

        for name, arr in (
            ("edges", edges),
            ("edge_triangles", edge_tris),
            ("triangle_edges", tri_edges),
            ("boundary_vertex_flags", bflags),
        ):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    # -- basic sizes -------------------------------------------------------
    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    # -- vectorized element quantities -------------------------------------
    def corner_coordinates(self) -> np.ndarray:
        """Array of shape (m, 3, 2) with the triangle corners."""
        return self.vertices[self.triangles]

    def signed_areas(self) -> np.ndarray:
        p = self.corner_coordinates()
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def edge_lengths(self) -> np.ndarray:
        """(m, 3) lengths of local edges (edge k opposite vertex k)."""
        p = self.corner_coordinates()
        return np.stack(
            [
                np.hypot(*(p[:, 2] - p[:, 1]).T),
                np.hypot(*(p[:, 0] - p[:, 2]).T),
                np.hypot(*(p[:, 1] - p[:, 0]).T),
            ],
            axis=1,
        )

    def diameters(self) -> np.ndarray:
        return self.edge_lengths().max(axis=1)

    def inradius_diameters(self) -> np.ndarray:
        return 4.0 * self.signed_areas() / self.edge_lengths().sum(axis=1)

    def mesh_size(self) -> float:
        return float(self.diameters().max())

    def min_angle(self) -> float:
        """Smallest interior angle over all triangles, in degrees."""
        p = self.corner_coordinates()
        angles = []
        for k in range(3):
            a = p[:, (k + 1) % 3] - p[:, k]
            b = p[:, (k + 2) % 3] - p[:, k]
            cos = np.einsum("ij,ij->i", a, b) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
            angles.append(np.degrees(np.arccos(np.clip(cos, -1.0, 1.0))))
        return float(np.min(angles))

    def gradients(self) -> np.ndarray:
        """Constant gradients of the P1 hat functions, shape (m, 3, 2)."""
        p = self.corner_coordinates()
        area2 = 2.0 * self.signed_areas()
        g = np.empty((self.n_triangles, 3, 2))
        for k in range(3):
            a = p[:, (k + 1) % 3]
            b = p[:, (k + 2) % 3]
            g[:, k, 0] = (a[:, 1] - b[:, 1]) / area2
            g[:, k, 1] = (b[:, 0] - a[:, 0]) / area2
        return g

    # -- validation --------------------------------------------------------
    def check(self, sigma: float = 4.0) -> None:
        """Audit orientation, conformity and shape regularity.

        Raises MeshError on the first failed invariant.
        """
        area = self.signed_areas()
        if np.any(area <= 0.0):
            bad = np.flatnonzero(area <= 0.0)
            raise MeshError(f"non-positive area in triangles {bad[:10].tolist()}")
        counts = (self.edge_triangles >= 0).sum(axis=1)
        bedges = self.edges[counts == 1]
        p = self.vertices[bedges]
        on_side = np.zeros(len(bedges), dtype=bool)
        for axis in (0, 1):
            for value in (-1.0, 1.0):
                on_side |= np.all(np.abs(p[:, :, axis] - value) < 1e-12, axis=1)
        if not np.all(on_side):
            raise MeshError("hanging node: a one-sided edge lies inside the domain")
        ratio = self.diameters() / self.inradius_diameters()
        if np.any(ratio > sigma * (1.0 + 1e-12)):
            raise MeshError(f"shape regularity violated: max h/rho = {ratio.max():.4f} > {sigma}")

    def is_conforming(self) -> bool:
        try:
            self.check(sigma=np.inf)
        except MeshError:
            return False
        return True


def element_geometry(mesh: Mesh, t: int) -> ElementGeometry:
    """Diameter, inscribed-circle diameter and area of triangle ``t``."""
    if not 0 <= t < mesh.n_triangles:
        raise IndexError(f"triangle index {t} out of range")
    p = mesh.vertices[mesh.triangles[t]]
    return triangle_geometry(p)


def triangle_geometry(p) -> ElementGeometry:
    p = np.asarray(p, dtype=float)
    d1 = p[1] - p[0]
    d2 = p[2] - p[0]
    area = 0.5 * (d1[0] * d2[1] - d1[1] * d2[0])
    if area <= 0.0:
        raise MeshError(f"degenerate or inverted triangle (area={area!r})")
    lengths = np.hypot(*(p[[1, 2, 0]] - p).T)
    return ElementGeometry(
        h_T=float(lengths.max()),
        rho_T=float(4.0 * area / lengths.sum()),
        area=float(area),
        vertices=p.copy(),
    )


def uniform_mesh(n: int) -> Mesh:
    """n x n squares, each split along its lower-left to upper-right diagonal."""
    if int(n) != n or n < 2:
        raise ValueError(f"uniform_mesh needs an integer n >= 2, got {n!r}")
    n = int(n)
    idx = np.arange(n + 1)
    x = idx * (2.0 / n) - 1.0
    X, Y = np.meshgrid(x, x)
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    i, j = np.meshgrid(np.arange(n), np.arange(n))
    i = i.ravel()
    j = j.ravel()
    a = j * (n + 1) + i
    b = a + 1
    c = a + n + 2
    d = a + n + 1
    # right angle first, hypotenuse a-c opposite it
    lower = np.column_stack([b, c, a])
    upper = np.column_stack([d, a, c])
    triangles = np.empty((2 * n * n, 3), dtype=np.int64)
    triangles[0::2] = lower
    triangles[1::2] = upper
    return Mesh(vertices, triangles, np.zeros(len(triangles), dtype=np.int64))


def _normalized(mesh: Mesh) -> np.ndarray:
    """Triangles rotated so that the refinement edge is opposite vertex 0."""
    tris = mesh.triangles
    ref = mesh.refinement_edge
    rows = np.arange(len(tris))[:, None]
    cols = (ref[:, None] + np.arange(3)[None, :]) % 3
    return tris[rows, cols]


def bisect(mesh: Mesh, marked) -> Mesh:
    """Newest-vertex bisection of ``marked`` triangles plus conforming closure.

    Every triangle whose refinement edge gets a midpoint is split at that
    midpoint; a triangle with a split non-refinement edge is first split at
    its refinement edge, then the child holding the split edge is split
    again.  Children put the new vertex at local index 0, so the parent's
    legs become their refinement edges.
    """
    marked = np.unique(np.asarray(list(marked) if not isinstance(marked, np.ndarray) else marked, dtype=np.int64))
    if marked.size and (marked.min() < 0 or marked.max() >= mesh.n_triangles):
        raise IndexError("marked triangle index out of range")
    if marked.size == 0:
        return Mesh(mesh.vertices.copy(), mesh.triangles.copy(), mesh.refinement_edge.copy())

    tris = _normalized(mesh)
    ref_pos = (mesh.refinement_edge[:, None] + np.arange(3)[None, :]) % 3
    tri_edges = mesh.triangle_edges[np.arange(mesh.n_triangles)[:, None], ref_pos]

    split = np.zeros(len(mesh.edges), dtype=bool)
    split[tri_edges[marked, 0]] = True
    while True:
        touched = split[tri_edges].any(axis=1)
        need = tri_edges[touched, 0]
        if split[need].all():
            break
        split[need] = True

    split_ids = np.flatnonzero(split)
    midpoint = np.full(len(mesh.edges), -1, dtype=np.int64)
    midpoint[split_ids] = mesh.n_vertices + np.arange(len(split_ids))
    ends = mesh.vertices[mesh.edges[split_ids]]
    vertices = np.vstack([mesh.vertices, 0.5 * (ends[:, 0] + ends[:, 1])])

    cur_tris = tris
    cur_edges = tri_edges
    done = []
    while len(cur_tris):
        e0 = cur_edges[:, 0]
        go = np.zeros(len(cur_tris), dtype=bool)
        valid = e0 >= 0
        go[valid] = split[e0[valid]]
        stray = np.zeros(len(cur_tris), dtype=bool)
        for k in (1, 2):
            ek = cur_edges[:, k]
            ok = ek >= 0
            stray[ok] |= split[ek[ok]]
        if np.any(stray & ~go):
            raise MeshError("bisection closure failed to propagate")
        done.append(cur_tris[~go])
        t = cur_tris[go]
        te = cur_edges[go]
        if len(t) == 0:
            break
        m = midpoint[te[:, 0]]
        a, b, c = t[:, 0], t[:, 1], t[:, 2]
        none = np.full(len(t), -1, dtype=np.int64)
        child1 = np.column_stack([m, a, b])
        child2 = np.column_stack([m, c, a])
        edges1 = np.column_stack([te[:, 2], none, none])
        edges2 = np.column_stack([te[:, 1], none, none])
        cur_tris = np.vstack([child1, child2])
        cur_edges = np.vstack([edges1, edges2])

    triangles = np.vstack(done)
    out = Mesh(vertices, triangles, np.zeros(len(triangles), dtype=np.int64))
    return out


def refine_uniformly(mesh: Mesh, sweeps: int = 1) -> Mesh:
    """Bisect every triangle ``sweeps`` times."""
    for _ in range(sweeps):
        mesh = bisect(mesh, np.arange(mesh.n_triangles))
    return mesh


def refine_red(mesh: Mesh, sweeps: int = 1) -> Mesh:
    """Split every triangle into four similar ones through its edge midpoints.

    Unlike repeated bisection this keeps the local mesh pattern, so a
    regular right-triangle mesh stays regular at every level.
    """
    for _ in range(sweeps):
        tris = _normalized(mesh)
        te = mesh.triangle_edges[np.arange(mesh.n_triangles)[:, None],
                                 (mesh.refinement_edge[:, None] + np.arange(3)[None, :]) % 3]
        ends = mesh.vertices[mesh.edges]
        vertices = np.vstack([mesh.vertices, 0.5 * (ends[:, 0] + ends[:, 1])])
        mid = mesh.n_vertices + te          # midpoint opposite local vertex k
        a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
        m0, m1, m2 = mid[:, 0], mid[:, 1], mid[:, 2]
        # refinement edge stays opposite local vertex 0 in every child
        children = np.vstack([
            np.column_stack([a, m2, m1]),
            np.column_stack([m2, m0, b]),
            np.column_stack([m1, c, m0]),
            np.column_stack([m0, m1, m2]),
        ])
        P = vertices[children]
        det = ((P[:, 1, 0] - P[:, 0, 0]) * (P[:, 2, 1] - P[:, 0, 1])
               - (P[:, 1, 1] - P[:, 0, 1]) * (P[:, 2, 0] - P[:, 0, 0]))
        flip = det < 0
        children[flip, 1], children[flip, 2] = children[flip, 2].copy(), children[flip, 1].copy()
        mesh = Mesh(vertices, children, np.zeros(len(children), dtype=np.int64))
    return mesh


def write_mesh(mesh: Mesh, path) -> None:
    """Plain-text dump: vertex count, "x y" lines, triangle count, "i j k" lines."""
    with open(path, "w") as fh:
        fh.write(f"{mesh.n_vertices}\n")
        np.savetxt(fh, mesh.vertices, fmt="%.17g")
        fh.write(f"{mesh.n_triangles}\n")
        np.savetxt(fh, mesh.triangles, fmt="%d")


def read_mesh(path) -> Mesh:
    with open(path) as fh:
        nv = int(fh.readline())
        verts = np.loadtxt(fh, max_rows=nv, ndmin=2)
        nt = int(fh.readline())
        tris = np.loadtxt(fh, max_rows=nt, dtype=np.int64, ndmin=2)
    return Mesh(verts, tris, np.zeros(len(tris), dtype=np.int64))
