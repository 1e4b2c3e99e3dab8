import math

import numpy as np
import pytest

from nitsche_uppr.errors import MeshError
from nitsche_uppr.mesh import (Mesh, bisect, element_geometry, read_mesh, refine_red, refine_uniformly,
                               triangle_geometry, uniform_mesh, write_mesh)


def test_uniform_mesh_counts():
    m = uniform_mesh(2)
    assert m.n_vertices == 9 and m.n_triangles == 8
    assert m.diameters().max() / math.sqrt(2) == pytest.approx(1.0)
    m = uniform_mesh(16)
    assert (m.n_vertices, m.n_triangles) == (289, 512)
    assert m.edge_lengths().min() == pytest.approx(0.125)


def test_uniform_mesh_rejects_small_n():
    with pytest.raises(ValueError):
        uniform_mesh(1)
    with pytest.raises(ValueError):
        uniform_mesh(2.5)


def test_uniform_mesh_shape_ratio():
    m = uniform_mesh(3)
    ratio = m.diameters() / m.inradius_diameters()
    # inradius of a right isosceles triangle with legs a is a(2 - sqrt2)/2,
    # so diameter over inscribed diameter is sqrt2 / (2 - sqrt2) = 1 + sqrt2
    assert np.allclose(ratio, 1 + math.sqrt(2), atol=1e-12, rtol=0)
    uniform_mesh(3).check(sigma=4.0)


def test_uniform_mesh_diagonals_and_orientation():
    m = uniform_mesh(4)
    assert np.all(m.signed_areas() > 0)
    P = m.corner_coordinates()
    # hypotenuse is opposite local vertex 0 and runs lower-left to upper-right
    d = P[:, 2] - P[:, 1]
    assert np.all(np.abs(np.abs(d[:, 0]) - np.abs(d[:, 1])) < 1e-14)
    assert np.all(d[:, 0] * d[:, 1] > 0)


def test_uniform_mesh_bit_identical():
    a, b = uniform_mesh(12), uniform_mesh(12)
    assert np.array_equal(a.vertices, b.vertices)
    assert a.vertices[1, 0] == 1 * (2.0 / 12) - 1.0


def test_element_geometry_unit_triangle():
    g = triangle_geometry(np.array([[0, 0], [1, 0], [0, 1.0]]))
    assert g.h_T == pytest.approx(math.sqrt(2), abs=1e-15)
    assert g.area == pytest.approx(0.5)
    assert g.rho_T == pytest.approx(2 - math.sqrt(2), abs=1e-14)
    g2 = triangle_geometry(np.array([[0, 0], [2, 0], [0, 2.0]]))
    assert (g2.h_T, g2.rho_T, g2.area) == pytest.approx((2 * g.h_T, 2 * g.rho_T, 4 * g.area))


def test_element_geometry_equilateral():
    g = triangle_geometry(np.array([[0, 0], [1, 0], [0.5, math.sqrt(3) / 2]]))
    assert g.h_T / g.rho_T == pytest.approx(math.sqrt(3), abs=1e-12)


def test_element_geometry_from_mesh():
    m = uniform_mesh(2)
    g = element_geometry(m, 0)
    assert g.area == pytest.approx(0.5)


def test_degenerate_triangle_rejected():
    m = Mesh(np.array([[0, 0], [1, 0], [2, 0.0]]), np.array([[0, 1, 2]]), np.zeros(1, int))
    with pytest.raises(MeshError):
        m.check()
    with pytest.raises(MeshError):
        element_geometry(m, 0)
    flipped = Mesh(np.array([[0, 0], [0, 1], [1, 0.0]]), np.array([[0, 1, 2]]), np.zeros(1, int))
    assert not flipped.is_conforming()


def test_edge_adjacency():
    m = uniform_mesh(5)
    n_tri_per_edge = (m.edge_triangles >= 0).sum(axis=1)
    boundary = np.all(np.isclose(np.abs(m.vertices[m.edges]).max(axis=2), 1.0) &
                      (np.isclose(m.vertices[m.edges][:, 0], m.vertices[m.edges][:, 1]).any(axis=1))[:, None],
                      axis=1)
    assert set(n_tri_per_edge) == {1, 2}
    assert np.sum(n_tri_per_edge == 1) == 4 * 5
    assert np.all(n_tri_per_edge[boundary] == 1)
    assert m.is_conforming()


def test_bisect_empty_marking_is_identity():
    m = uniform_mesh(2)
    b = bisect(m, [])
    assert b.n_triangles == 8
    assert np.array_equal(b.vertices, m.vertices)


def test_bisect_single_triangle_closure():
    m = uniform_mesh(2)
    b = bisect(m, [0])
    assert b.n_triangles == 10
    assert b.is_conforming()


def test_bisect_all_twice_quadruples():
    for n in (2, 5):
        m = uniform_mesh(n)
        b = refine_uniformly(m, 2)
        assert b.n_triangles == 4 * 2 * n * n
        assert np.allclose(np.sort(b.diameters()), np.sort(np.repeat(m.diameters(), 4)) / 2)
        once = refine_uniformly(m, 1)
        assert once.diameters().max() == pytest.approx(m.diameters().max() / math.sqrt(2))


def test_bisect_min_angle_and_conformity(rng):
    m = uniform_mesh(4)
    for _ in range(6):
        marked = rng.choice(m.n_triangles, size=max(1, m.n_triangles // 5), replace=False)
        m = bisect(m, marked)
        assert m.is_conforming()
        assert m.min_angle() == pytest.approx(45.0, abs=1e-9)
        assert np.all(m.signed_areas() > 0)
    # a second pass with nothing marked adds nothing
    assert bisect(m, []).n_triangles == m.n_triangles


def test_bisect_index_check():
    with pytest.raises(IndexError):
        bisect(uniform_mesh(2), [8])


def test_red_refinement_keeps_pattern():
    m = refine_red(uniform_mesh(4))
    u = uniform_mesh(8)
    key = lambda mesh: np.sort(np.round(mesh.corner_coordinates().mean(axis=1), 12).view("f8,f8").ravel())
    assert np.array_equal(key(m), key(u))
    assert m.is_conforming()
    assert np.all(m.signed_areas() > 0)


def test_red_refinement_after_bisection(rng):
    m = bisect(uniform_mesh(4), rng.choice(32, 7, replace=False))
    r = refine_red(m)
    assert r.n_triangles == 4 * m.n_triangles
    assert r.is_conforming()
    assert r.min_angle() == pytest.approx(45.0, abs=1e-9)
    # still bisectable: refinement edges stay hypotenuses
    assert bisect(r, [0, 5]).is_conforming()


def test_mesh_roundtrip(tmp_path):
    m = bisect(uniform_mesh(3), [1, 4])
    path = tmp_path / "m.txt"
    write_mesh(m, path)
    m2 = read_mesh(path)
    assert np.array_equal(m.vertices, m2.vertices)
    assert np.array_equal(m.triangles, m2.triangles)
