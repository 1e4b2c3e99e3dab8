"""Element classification against the interface and cut-element geometry.

Inside a cut element the interface is replaced by the straight chord between
its two edge crossings.  The chord splits the triangle into a triangle
around the "lone" vertex (the one whose sign differs from the other two) and
a quadrilateral.  Per-element arrays are kept as a struct of arrays aligned
with ``Classification.cut_elements``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import AssumptionViolation, DegenerateCut, NoConvergence
from .mesh import Mesh, triangle_geometry
from .quadrature import fan_polygons, map_segments

log = logging.getLogger(__name__)

CUT, INTERIOR1, INTERIOR2 = 0, 1, 2

SNAP_TOL = 1e-10
TINY_CUT = 1e-12
ROOT_TOL = 1e-12
MAX_ROOT_ITER = 200
EDGE_SAMPLES = 64
EDGE_CHORD = 1e-6


# -- root finding -----------------------------------------------------------

def _illinois(fun, p0, p1, f0, f1, tol):
    """Vectorized Illinois (modified regula falsi) along segments p0->p1.

    Requires ``f0 * f1 < 0``.  Returns the root parameters in [0, 1].
    """
    k = len(p0)
    a = np.zeros(k)
    b = np.ones(k)
    fa = f0.astype(float).copy()
    fb = f1.astype(float).copy()
    side = np.zeros(k, dtype=np.int8)
    t = np.full(k, 0.5)
    active = np.ones(k, dtype=bool)
    d = p1 - p0
    for _ in range(MAX_ROOT_ITER):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            return t
        aa, bb, ffa, ffb = a[idx], b[idx], fa[idx], fb[idx]
        c = bb - ffb * (bb - aa) / (ffb - ffa)
        bad = ~((c > np.minimum(aa, bb)) & (c < np.maximum(aa, bb)))
        c[bad] = 0.5 * (aa[bad] + bb[bad])
        q = p0[idx] + c[:, None] * d[idx]
        fc = fun(q[:, 0], q[:, 1])
        t[idx] = c
        done = (np.abs(fc) <= tol[idx]) | (np.abs(bb - aa) <= 4e-16)
        # c replaces the endpoint with the same sign; Illinois halves the stale one
        same_b = np.sign(fc) == np.sign(ffb)
        nb = np.where(same_b, c, bb)
        nfb = np.where(same_b, fc, ffb)
        na = np.where(same_b, aa, c)
        nfa = np.where(same_b, ffa, fc)
        s = side[idx]
        nfa = np.where(same_b & (s == 1), 0.5 * nfa, nfa)
        nfb = np.where(~same_b & (s == -1), 0.5 * nfb, nfb)
        side[idx] = np.where(same_b, 1, -1)
        a[idx], b[idx], fa[idx], fb[idx] = na, nb, nfa, nfb
        active[idx[done]] = False
    if np.any(active):
        raise NoConvergence(f"edge root finding did not converge on {int(active.sum())} segments")
    return t


def edge_points(interface, p0, p1, f0=None, f1=None):
    """Interface crossings on k segments (vectorized ``edge_intersection``).

    Where the endpoint values do not bracket a root (an endpoint lies on the
    interface up to snapping) the endpoint with the smaller ``|phi|`` is
    returned.
    """
    p0 = np.atleast_2d(np.asarray(p0, dtype=float))
    p1 = np.atleast_2d(np.asarray(p1, dtype=float))
    if f0 is None:
        f0 = interface(p0[:, 0], p0[:, 1])
    if f1 is None:
        f1 = interface(p1[:, 0], p1[:, 1])
    out = np.where((np.abs(f0) <= np.abs(f1))[:, None], p0, p1)
    br = f0 * f1 < 0
    if np.any(br):
        tol = ROOT_TOL * np.hypot(*(p1[br] - p0[br]).T)
        t = _illinois(interface, p0[br], p1[br], f0[br], f1[br], tol)
        out[br] = p0[br] + t[:, None] * (p1[br] - p0[br])
    return out


def edge_intersection(p0, p1, interface):
    """Point on segment [p0, p1] where ``phi`` vanishes; phi must change sign."""
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    f0 = float(interface(p0[0], p0[1]))
    f1 = float(interface(p1[0], p1[1]))
    if f0 * f1 > 0:
        raise ValueError("phi does not change sign on the segment")
    return edge_points(interface, p0[None], p1[None], np.array([f0]), np.array([f1]))[0]


# -- assumption checking ----------------------------------------------------

def edge_sign_changes(mesh: Mesh, interface, edge_ids=None, samples=EDGE_SAMPLES, vertex_phi=None):
    """Sampled sign-change counts of phi along mesh edges.

    ``samples`` interior points plus both endpoints; zero values are skipped.
    Edges that cannot contain a root by the interface's Lipschitz bound are
    reported as 0 without sampling.
    """
    if edge_ids is None:
        edge_ids = np.arange(len(mesh.edges))
    edge_ids = np.asarray(edge_ids, dtype=np.int64)
    counts = np.zeros(len(edge_ids), dtype=np.int64)
    if vertex_phi is None:
        vertex_phi = interface(mesh.vertices[:, 0], mesh.vertices[:, 1])
    ends = mesh.edges[edge_ids]
    pa = mesh.vertices[ends[:, 0]]
    pb = mesh.vertices[ends[:, 1]]
    fa = vertex_phi[ends[:, 0]]
    fb = vertex_phi[ends[:, 1]]
    todo = np.ones(len(edge_ids), dtype=bool)
    if getattr(interface, "lipschitz", None) is not None:
        reach = interface.lipschitz * np.hypot(*(pb - pa).T)
        todo = (np.abs(fa) <= reach) & (np.abs(fb) <= reach)
    idx = np.flatnonzero(todo)
    s = np.linspace(0.0, 1.0, samples + 2)[1:-1]
    chunk = max(1, 400_000 // samples)
    for start in range(0, len(idx), chunk):
        sel = idx[start : start + chunk]
        q = pa[sel, None, :] + s[None, :, None] * (pb[sel] - pa[sel])[:, None, :]
        f = interface(q[..., 0].ravel(), q[..., 1].ravel()).reshape(len(sel), samples)
        vals = np.column_stack([fa[sel], f, fb[sel]])
        # values within the snapping band count as zeros
        ln = np.hypot(*(pb[sel] - pa[sel]).T)
        vals[np.abs(vals) < SNAP_TOL * ln[:, None]] = 0.0
        sg = np.sign(vals)
        counts[sel] = _count_changes(sg)
    return counts


def _count_changes(sg):
    """Sign changes along rows, ignoring zeros."""
    out = np.zeros(len(sg), dtype=np.int64)
    last = np.zeros(len(sg))
    for j in range(sg.shape[1]):
        cur = sg[:, j]
        nz = cur != 0
        out += (nz & (last != 0) & (cur != last)).astype(np.int64)
        last = np.where(nz, cur, last)
    return out


# -- classification -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CutGeometry:
    """Straight-chord geometry of all cut elements (struct of arrays)."""

    element: np.ndarray
    lone: np.ndarray        # local index of the lone vertex
    lone_side: np.ndarray   # 1 or 2
    entry: np.ndarray       # crossing on edge lone -> next vertex
    exit: np.ndarray        # crossing on edge previous vertex -> lone
    poly1: np.ndarray       # (k, 4, 2), triangles padded by repeating a vertex
    poly2: np.ndarray
    area1: np.ndarray
    area2: np.ndarray
    chord_len: np.ndarray
    normal: np.ndarray      # unit, from side 1 into side 2
    h_T: np.ndarray
    area: np.ndarray
    empty_side: np.ndarray = None  # 1 or 2 when the chord runs along an edge, else 0

    def __post_init__(self):
        if self.empty_side is None:
            object.__setattr__(self, "empty_side", np.zeros(len(self.element), dtype=np.int64))

    def __len__(self):
        return len(self.element)

    def midpoints(self):
        return 0.5 * (self.entry + self.exit)

    def subset(self, mask):
        return CutGeometry(**{k: getattr(self, k)[mask] for k in self.__dataclass_fields__})


@dataclass(frozen=True, eq=False)
class Classification:
    kind: np.ndarray
    cut_elements: np.ndarray
    covers1: np.ndarray
    covers2: np.ndarray
    strict1: np.ndarray
    strict2: np.ndarray
    cuts: CutGeometry
    vertex_phi: np.ndarray
    violations: np.ndarray = None  # elements failing the crossing check (warn mode)

    def support(self, side: int) -> np.ndarray:
        """Elements carrying side-``side`` DOFs: ``covers`` minus edge cuts empty on that side."""
        cov = self.covers1 if side == 1 else self.covers2
        empty = self.cuts.element[self.cuts.empty_side == side]
        if empty.size == 0:
            return cov
        return np.setdiff1d(cov, empty, assume_unique=True)

    def position(self):
        """Map element index -> row in ``cuts`` (-1 for uncut elements)."""
        pos = np.full(len(self.kind), -1, dtype=np.int64)
        pos[self.cuts.element] = np.arange(len(self.cuts))
        return pos


def _element_signs(mesh, interface, vertex_phi, snap_tol):
    """Per-element vertex signs; values with ``|phi| < snap_tol * h_T`` count as side 2."""
    pv = vertex_phi[mesh.triangles]
    h = mesh.diameters()
    snapped = np.abs(pv) < snap_tol * h[:, None]
    return np.where((pv < 0) & ~snapped, -1, 1).astype(np.int8)


def _assumption_violations(mesh, interface, signs, vertex_phi, samples=EDGE_SAMPLES):
    """Elements violating the two-crossing rule; returns sorted indices."""
    changes = edge_sign_changes(mesh, interface, samples=samples, vertex_phi=vertex_phi)
    te = mesh.triangle_edges
    local = np.stack(
        [signs[:, 1] != signs[:, 2], signs[:, 2] != signs[:, 0], signs[:, 0] != signs[:, 1]], axis=1
    ).astype(np.int64)
    per_edge = np.maximum(changes[te], local)
    mixed = (signs.min(axis=1) < 0) & (signs.max(axis=1) > 0)
    bad = np.any(per_edge > 1, axis=1) | (mixed & (per_edge.sum(axis=1) != 2)) | (~mixed & (per_edge.sum(axis=1) > 0))
    return np.flatnonzero(bad)


def _chord_geometry(mesh, interface, elements, signs, vertex_phi):
    tri = mesh.triangles[elements]
    s = signs[elements]
    neg = (s < 0).sum(axis=1)
    lone_sign = np.where(neg == 1, -1, 1)
    lone = np.argmax(s == lone_sign[:, None], axis=1)
    lone_side = np.where(lone_sign < 0, 1, 2)
    k = len(elements)
    r = np.arange(k)
    iL = tri[r, lone]
    iA = tri[r, (lone + 1) % 3]
    iB = tri[r, (lone + 2) % 3]
    te = mesh.triangle_edges[elements]
    eLA = te[r, (lone + 2) % 3]
    eBL = te[r, (lone + 1) % 3]

    need = np.unique(np.concatenate([eLA, eBL]))
    ends = mesh.edges[need]
    p0 = mesh.vertices[ends[:, 0]]
    p1 = mesh.vertices[ends[:, 1]]
    pts = edge_points(interface, p0, p1, vertex_phi[ends[:, 0]], vertex_phi[ends[:, 1]])
    where = np.searchsorted(need, eLA)
    entry = pts[where]
    exit_ = pts[np.searchsorted(need, eBL)]

    V = mesh.vertices
    L, A, B = V[iL], V[iA], V[iB]
    lone_poly = np.stack([L, entry, exit_, exit_], axis=1)
    other_poly = np.stack([entry, A, B, exit_], axis=1)
    # lone triangle from vectors at L; the rest is the complement, so the split is exact to rounding
    u, v = entry - L, exit_ - L
    lone_area = 0.5 * (u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0])
    total = mesh.signed_areas()[elements]
    other_area = total - lone_area
    one = (lone_side == 1)[:, None, None]
    poly1 = np.where(one, lone_poly, other_poly)
    poly2 = np.where(one, other_poly, lone_poly)
    area1 = np.where(lone_side == 1, lone_area, other_area)
    area2 = np.where(lone_side == 1, other_area, lone_area)
    d = exit_ - entry
    chord = np.hypot(d[:, 0], d[:, 1])
    safe = np.where(chord > 0, chord, 1.0)
    right = np.column_stack([d[:, 1], -d[:, 0]]) / safe[:, None]
    normal = np.where((lone_side == 1)[:, None], right, -right)
    return CutGeometry(
        element=np.asarray(elements, dtype=np.int64),
        lone=lone.astype(np.int64),
        lone_side=lone_side.astype(np.int64),
        entry=entry,
        exit=exit_,
        poly1=poly1,
        poly2=poly2,
        area1=area1,
        area2=area2,
        chord_len=chord,
        normal=normal,
        h_T=mesh.diameters()[elements],
        area=total,
    )


def classify_elements(mesh: Mesh, interface, *, check="raise", snap_tol=SNAP_TOL, tiny_cut=TINY_CUT) -> Classification:
    """Tag every triangle Interior1, Interior2 or Cut and build chord geometry.

    ``check`` is ``"raise"`` (or True), ``"warn"`` or ``"off"`` (or False).
    Sampling flags an edge crossed more than once or a mixed element with
    other than two crossings; "raise" turns that into AssumptionViolation,
    "warn" logs it and keeps the vertex-sign classification.
    Cuts leaving less than ``tiny_cut * |T|`` on one side are reclassified
    to the majority side, except when the chord still has positive length:
    then the interface runs along an element edge and the element is kept as
    an "edge cut" with an empty side (it carries the interface terms).
    """
    vphi = np.asarray(interface(mesh.vertices[:, 0], mesh.vertices[:, 1]), dtype=float)
    signs = _element_signs(mesh, interface, vphi, snap_tol)
    mode = {True: "raise", False: "off", None: "off"}.get(check, check)
    if mode not in ("raise", "warn", "off"):
        raise ValueError(f"check must be 'raise', 'warn' or 'off', got {check!r}")
    bad = np.zeros(0, dtype=np.int64)
    if mode != "off":
        bad = _assumption_violations(mesh, interface, signs, vphi)
        if bad.size and mode == "warn":
            log.warning("%d element(s) violate the two-crossing rule; continuing", bad.size)
        elif bad.size:
            raise AssumptionViolation(
                f"interface crosses {bad.size} element boundaries other than exactly twice "
                f"(first elements: {bad[:8].tolist()})",
                bad,
            )
    kind = np.where(signs.max(axis=1) < 0, INTERIOR1, np.where(signs.min(axis=1) > 0, INTERIOR2, CUT)).astype(np.int8)
    cand = np.flatnonzero(kind == CUT)
    cuts = _chord_geometry(mesh, interface, cand, signs, vphi)
    small = np.minimum(cuts.area1, cuts.area2) < tiny_cut * cuts.area
    along = small & (cuts.chord_len > EDGE_CHORD * cuts.h_T)
    if np.any(along):
        empty = np.where(cuts.area1 < cuts.area2, 1, 2)
        cuts = CutGeometry(**{
            **{k: getattr(cuts, k) for k in cuts.__dataclass_fields__},
            "area1": np.where(along & (empty == 1), 0.0, np.where(along, cuts.area, cuts.area1)),
            "area2": np.where(along & (empty == 2), 0.0, np.where(along, cuts.area, cuts.area2)),
            "empty_side": np.where(along, empty, 0),
        })
        small = small & ~along
    if np.any(small):
        kind[cuts.element[small]] = np.where(cuts.area1[small] >= cuts.area2[small], INTERIOR1, INTERIOR2)
        cuts = cuts.subset(~small)
    cut = cuts.element
    strict1 = np.flatnonzero(kind == INTERIOR1)
    strict2 = np.flatnonzero(kind == INTERIOR2)
    return Classification(
        kind=kind,
        cut_elements=cut,
        covers1=np.sort(np.concatenate([strict1, cut])),
        covers2=np.sort(np.concatenate([strict2, cut])),
        strict1=strict1,
        strict2=strict2,
        cuts=cuts,
        vertex_phi=vphi,
        violations=bad,
    )


# -- weights and penalty ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CutInfos:
    """Chord geometry plus the Nitsche weights for every cut element."""

    geometry: CutGeometry
    beta1: np.ndarray   # at the chord midpoint
    beta2: np.ndarray
    kappa1: np.ndarray
    kappa2: np.ndarray
    gamma: np.ndarray

    def __len__(self):
        return len(self.geometry)


def nitsche_weights(area1, area2, chord_len, h_T, beta1, beta2):
    """kappa_1, kappa_2 and gamma from the sub-areas and coefficients."""
    area1 = np.asarray(area1, dtype=float)
    area2 = np.asarray(area2, dtype=float)
    denom = beta2 * area1 + beta1 * area2
    kappa1 = beta2 * area1 / denom
    kappa2 = 1.0 - kappa1
    gamma = 2.0 * h_T * chord_len / (area1 / beta1 + area2 / beta2)
    return kappa1, kappa2, gamma


def cut_infos(classification: Classification, beta1, beta2, penalty_scale: float = 1.0) -> CutInfos:
    """Weights and penalties of all cut elements; ``penalty_scale`` multiplies gamma."""
    if not penalty_scale > 0:
        raise ValueError("penalty_scale must be positive")
    g = classification.cuts
    mid = g.midpoints()
    b1 = np.broadcast_to(np.asarray(beta1(mid[:, 0], mid[:, 1]), dtype=float), (len(g),)).copy()
    b2 = np.broadcast_to(np.asarray(beta2(mid[:, 0], mid[:, 1]), dtype=float), (len(g),)).copy()
    k1, k2, gam = nitsche_weights(g.area1, g.area2, g.chord_len, g.h_T, b1, b2)
    return CutInfos(g, b1, b2, k1, k2, penalty_scale * gam)


@dataclass(frozen=True)
class CutInfo:
    element: int
    entry: np.ndarray
    exit: np.ndarray
    poly1: np.ndarray
    poly2: np.ndarray
    area1: float
    area2: float
    chord_len: float
    normal: np.ndarray
    kappa1: float
    kappa2: float
    gamma: float


def _dedupe(poly):
    keep = [poly[0]]
    for p in poly[1:]:
        if not np.array_equal(p, keep[-1]):
            keep.append(p)
    if len(keep) > 1 and np.array_equal(keep[0], keep[-1]):
        keep.pop()
    return np.array(keep)


def cut_info(mesh: Mesh, t: int, interface, beta1, beta2, *, snap_tol=SNAP_TOL) -> CutInfo:
    """Geometry, weights and penalty of one cut element.

    Raises DegenerateCut when one side keeps less than 1e-12 of the area, and
    ValueError when the element is not cut.
    """
    geom = triangle_geometry(mesh.vertices[mesh.triangles[t]])
    vphi = np.asarray(interface(mesh.vertices[:, 0], mesh.vertices[:, 1]), dtype=float)
    sub = Mesh(mesh.vertices, mesh.triangles[[t]], mesh.refinement_edge[[t]])
    signs = _element_signs(sub, interface, vphi, snap_tol)
    if signs.min() > 0 or signs.max() < 0:
        raise ValueError(f"element {t} is not cut by the interface")
    g = _chord_geometry(sub, interface, np.array([0]), signs, vphi)
    if min(g.area1[0], g.area2[0]) < TINY_CUT * geom.area:
        raise DegenerateCut(f"element {t}: sub-areas {g.area1[0]:.3e}, {g.area2[0]:.3e}")
    mid = g.midpoints()[0]
    b1 = float(np.asarray(beta1(mid[0], mid[1])))
    b2 = float(np.asarray(beta2(mid[0], mid[1])))
    k1, k2, gam = nitsche_weights(g.area1[0], g.area2[0], g.chord_len[0], g.h_T[0], b1, b2)
    return CutInfo(
        element=int(t),
        entry=g.entry[0],
        exit=g.exit[0],
        poly1=_dedupe(g.poly1[0]),
        poly2=_dedupe(g.poly2[0]),
        area1=float(g.area1[0]),
        area2=float(g.area2[0]),
        chord_len=float(g.chord_len[0]),
        normal=g.normal[0],
        kappa1=float(k1),
        kappa2=float(k2),
        gamma=float(gam),
    )


# -- quadrature on cut pieces -------------------------------------------------

def chord_quadrature(cuts: CutGeometry, order: int):
    """Gauss points (k, q, 2) and weights (k, q) on every chord."""
    return map_segments(cuts.entry, cuts.exit, order)


def side_quadrature(cuts: CutGeometry, side: int, order: int):
    """Fan quadrature over the straight-chord sub-polygons of one side."""
    poly = cuts.poly1 if side == 1 else cuts.poly2
    return fan_polygons(poly, order=order)


def _project_knots(interface, knots, normal, phi_knots, reach):
    """Move knots along the normal onto phi = 0; None where no root is found."""
    k = len(knots)
    # phi > 0 means the curve lies behind the knot (normal points into side 2)
    direction = np.where(phi_knots > 0, -1.0, 1.0)
    step = reach / 64.0
    far = knots.copy()
    found = np.zeros(k, dtype=bool)
    f_far = phi_knots.copy()
    for _ in range(7):
        cand = knots + (direction * step)[:, None] * normal
        fc = interface(cand[:, 0], cand[:, 1])
        hit = ~found & (np.sign(fc) != np.sign(phi_knots))
        far[hit] = cand[hit]
        f_far[hit] = fc[hit]
        found |= hit
        if found.all():
            break
        step = step * 2.0
    out = knots.copy()
    if np.any(found):
        out[found] = edge_points(interface, knots[found], far[found], phi_knots[found], f_far[found])
    return out, found


def curved_polygons(cuts: CutGeometry, interface, subdivisions: int, mesh: Mesh | None = None):
    """Side polygons with the chord replaced by knots projected onto the curve.

    Returns ``(lone_poly, other_poly)`` as (k, n, 2) arrays; the lone polygon
    is ``[L, entry, knots..., exit]`` and the other
    ``[entry, A, B, exit, knots reversed...]``.  Knots that cannot be
    projected, or land outside the element, stay on the chord.
    """
    if subdivisions < 1:
        raise ValueError("subdivisions must be >= 1")
    k = len(cuts)
    s = np.arange(1, subdivisions) / subdivisions
    knots = cuts.entry[:, None, :] + s[None, :, None] * (cuts.exit - cuts.entry)[:, None, :]
    if subdivisions > 1 and k:
        flat = knots.reshape(-1, 2)
        nrm = np.repeat(cuts.normal, subdivisions - 1, axis=0)
        reach = np.repeat(0.5 * cuts.h_T, subdivisions - 1)
        fk = interface(flat[:, 0], flat[:, 1])
        proj, ok = _project_knots(interface, flat, nrm, fk, reach)
        if mesh is not None:
            corners = mesh.corner_coordinates()[cuts.element]
            inside = _inside_triangles(proj, np.repeat(corners, subdivisions - 1, axis=0))
            ok &= inside
        if not ok.all():
            log.warning("curved quadrature: %d knot(s) kept on the chord", int((~ok).sum()))
        flat = np.where(ok[:, None], proj, flat)
        knots = flat.reshape(k, subdivisions - 1, 2)

    lone_v, A, B = _lone_corners(cuts, mesh)
    lone_poly = np.concatenate([lone_v[:, None], cuts.entry[:, None], knots, cuts.exit[:, None]], axis=1)
    other_poly = np.concatenate(
        [cuts.entry[:, None], A[:, None], B[:, None], cuts.exit[:, None], knots[:, ::-1]], axis=1
    )
    return lone_poly, other_poly


def _lone_corners(cuts: CutGeometry, mesh: Mesh | None):
    if mesh is not None:
        tri = mesh.triangles[cuts.element]
        r = np.arange(len(cuts))
        V = mesh.vertices
        return V[tri[r, cuts.lone]], V[tri[r, (cuts.lone + 1) % 3]], V[tri[r, (cuts.lone + 2) % 3]]
    # recover corners from the straight polygons
    lone_poly = np.where((cuts.lone_side == 1)[:, None, None], cuts.poly1, cuts.poly2)
    other_poly = np.where((cuts.lone_side == 1)[:, None, None], cuts.poly2, cuts.poly1)
    return lone_poly[:, 0], other_poly[:, 1], other_poly[:, 2]


def _inside_triangles(p, tri, slack=1e-12):
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]

    def cross(u, v, w):
        return (v[:, 0] - u[:, 0]) * (w[:, 1] - u[:, 1]) - (v[:, 1] - u[:, 1]) * (w[:, 0] - u[:, 0])

    area = np.abs(cross(a, b, c))
    tol = -slack * area
    return (cross(a, b, p) >= tol) & (cross(b, c, p) >= tol) & (cross(c, a, p) >= tol)


def curved_error_quadrature(cuts: CutGeometry, interface, subdivisions: int = 8, order: int = 6, mesh: Mesh | None = None, apex="first"):
    """Point sets approximating integrals over T ∩ Omega_1 and T ∩ Omega_2.

    Signed fans from the first polygon vertex (``apex="first"``) or from the
    vertex average (``apex="mean"``).  Returns ``((pts1, w1), (pts2, w2))``
    with shapes (k, q, 2) and (k, q).
    """
    lone_poly, other_poly = curved_polygons(cuts, interface, subdivisions, mesh)
    ql = _fan(lone_poly, order, apex)
    qo = _fan(other_poly, order, apex)
    # pad the lone set so both sides have equal point counts per element
    lone_is_1 = (cuts.lone_side == 1)[:, None]
    nl, no = ql[1].shape[1], qo[1].shape[1]
    n = max(nl, no)
    ql = _pad(ql, n)
    qo = _pad(qo, n)
    pts1 = np.where(lone_is_1[..., None], ql[0], qo[0])
    w1 = np.where(lone_is_1, ql[1], qo[1])
    pts2 = np.where(lone_is_1[..., None], qo[0], ql[0])
    w2 = np.where(lone_is_1, qo[1], ql[1])
    return (pts1, w1), (pts2, w2)


def _fan(poly, order, apex):
    if apex == "first":
        return fan_polygons(poly, apex=poly[:, 0], order=order)
    return fan_polygons(poly, order=order)


def _pad(q, n):
    pts, w = q
    extra = n - w.shape[1]
    if extra == 0:
        return q
    pts = np.concatenate([pts, np.repeat(pts[:, :1], extra, axis=1)], axis=1)
    w = np.concatenate([w, np.zeros((len(w), extra))], axis=1)
    return pts, w
