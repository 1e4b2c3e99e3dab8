"""CSV and legacy-VTK output of per-side nodal fields."""
from __future__ import annotations

import csv
import os

import numpy as np

VTK_TRIANGLE = 5


def _side_mesh(dofmap, side):
    """Points, remapped support triangles and vertex ids of one side."""
    nodes = dofmap.nodes(side)
    local = np.full(dofmap.mesh.n_vertices, -1, dtype=np.int64)
    local[nodes] = np.arange(len(nodes))
    tris = local[dofmap.mesh.triangles[dofmap.support(side)]]
    return dofmap.mesh.vertices[nodes], tris, nodes


def write_vtk(path, points, triangles, point_data: dict, title: str = "nitsche_uppr field") -> None:
    """ASCII legacy-VTK unstructured grid; values are scalars (n,) or vectors (n, 2)."""
    points = np.asarray(points, dtype=float)
    triangles = np.asarray(triangles, dtype=np.int64)
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(title.replace("\n", " ")[:255] + "\n")
        fh.write("ASCII\nDATASET UNSTRUCTURED_GRID\n")
        fh.write(f"POINTS {len(points)} double\n")
        for x, y in points:
            fh.write(f"{float(x)!r} {float(y)!r} 0.0\n")
        fh.write(f"CELLS {len(triangles)} {4 * len(triangles)}\n")
        for a, b, c in triangles:
            fh.write(f"3 {a} {b} {c}\n")
        fh.write(f"CELL_TYPES {len(triangles)}\n")
        fh.write(f"{VTK_TRIANGLE}\n" * len(triangles))
        fh.write(f"POINT_DATA {len(points)}\n")
        for name, values in point_data.items():
            values = np.asarray(values, dtype=float)
            if values.ndim == 1:
                fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
                fh.writelines(f"{float(v)!r}\n" for v in values)
            else:
                fh.write(f"VECTORS {name} double\n")
                fh.writelines(f"{float(vx)!r} {float(vy)!r} 0.0\n" for vx, vy in values[:, :2])


def read_vtk(path) -> dict:
    """Minimal reader for files written by :func:`write_vtk` (used in tests)."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh]
    if not lines[0].startswith("# vtk DataFile") or lines[2] != "ASCII":
        raise ValueError(f"{path}: not an ASCII legacy VTK file")
    out = {"points": None, "cells": None, "data": {}}
    i = 4
    while i < len(lines):
        head = lines[i].split()
        if not head:
            i += 1
            continue
        if head[0] == "POINTS":
            n = int(head[1])
            out["points"] = np.array([[float(v) for v in lines[i + 1 + k].split()] for k in range(n)])
            i += n + 1
        elif head[0] == "CELLS":
            n = int(head[1])
            out["cells"] = np.array([[int(v) for v in lines[i + 1 + k].split()[1:]] for k in range(n)])
            i += n + 1
        elif head[0] == "CELL_TYPES":
            i += int(head[1]) + 1
        elif head[0] == "POINT_DATA":
            npts = int(head[1])
            i += 1
        elif head[0] == "SCALARS":
            out["data"][head[1]] = np.array([float(lines[i + 2 + k]) for k in range(npts)])
            i += npts + 2
        elif head[0] == "VECTORS":
            out["data"][head[1]] = np.array([[float(v) for v in lines[i + 1 + k].split()] for k in range(npts)])
            i += npts + 1
        else:
            raise ValueError(f"{path}:{i + 1}: unexpected section {head[0]!r}")
    return out


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def emit_fields(state, output_dir) -> list:
    """Per-side solution and recovered gradient as CSV and legacy VTK.

    Returns the list of written paths.
    """
    os.makedirs(output_dir, exist_ok=True)
    dm = state.dofmap
    written = []
    for side in (1, 2):
        pts, tris, nodes = _side_mesh(dm, side)
        u = state.uh.side_values(side)[nodes]
        g = state.recovered.side(side)
        base = os.path.join(output_dir, f"solution_s{side}")
        write_vtk(base + ".vtk", pts, tris, {"u": u}, f"{state.problem.name} side {side} solution")
        write_csv(base + ".csv", ["side", "node_x", "node_y", "u"],
                  ([side, float(x), float(y), float(val)] for (x, y), val in zip(pts, u)))
        base = os.path.join(output_dir, f"recovered_s{side}")
        write_vtk(base + ".vtk", pts, tris, {"gx": g[:, 0], "gy": g[:, 1]},
                  f"{state.problem.name} side {side} recovered gradient")
        write_csv(base + ".csv", ["side", "node_x", "node_y", "gx", "gy"],
                  ([side, float(x), float(y), float(a), float(b)] for (x, y), (a, b) in zip(pts, g)))
        written += [os.path.join(output_dir, f"{n}_s{side}.{ext}")
                    for n in ("solution", "recovered") for ext in ("vtk", "csv")]
    return written
