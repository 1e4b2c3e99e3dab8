import numpy as np
import pytest

from nitsche_uppr import interfaces
from nitsche_uppr.analysis import error_norms, interpolate_exact, solve_problem
from nitsche_uppr.errors import PatchFailure
from nitsche_uppr.geometry import classify_elements, cut_infos
from nitsche_uppr.mesh import Mesh, bisect, uniform_mesh
from nitsche_uppr.problems import get_problem
from nitsche_uppr.recovery import build_recovery, estimate, mesh_norm, ppr_recover, side_recovery, uppr
from nitsche_uppr.space import PairedField, build_dofmap, interpolate

from studies import uniform_study


def setup(n=16, iface=None, mesh=None, **kw):
    m = uniform_mesh(n) if mesh is None else mesh
    cls = classify_elements(m, iface or interfaces.circle(), **kw)
    return m, cls, build_dofmap(m, cls)


def quad(x, y):
    return x * x - 3 * x * y + y


def quad_grad(x, y):
    return np.column_stack([2 * x - 3 * y, -3 * x + 1])


def full_patch_nodes(dm, side):
    """Side nodes whose one-ring patch is not cut short by the side's fringe or the boundary."""
    rec = side_recovery(dm.mesh, dm.support(side), dm.nodes(side), side)
    return rec, rec.rings == 1


@pytest.mark.parametrize("side", [1, 2])
def test_quadratic_preserved(side):
    m, cls, dm = setup(16)
    f = interpolate(dm, quad, quad)
    g = ppr_recover(dm, f, side)
    V = m.vertices[dm.nodes(side)]
    # P2 is reproduced by every full-rank fit, whatever the patch
    assert np.max(np.abs(g - quad_grad(V[:, 0], V[:, 1]))) <= 1e-10


def test_quadratic_preserved_on_bisected_mesh(rng):
    m = uniform_mesh(12)
    for _ in range(3):
        m = bisect(m, rng.choice(m.n_triangles, m.n_triangles // 6, replace=False))
    _, _, dm = setup(mesh=m, iface=interfaces.flower5(), check="off")
    rec = build_recovery(dm)(interpolate(dm, quad, quad))
    for side in (1, 2):
        V = m.vertices[dm.nodes(side)]
        assert np.max(np.abs(rec.side(side) - quad_grad(V[:, 0], V[:, 1]))) <= 1e-10


def test_affine_everywhere():
    m, cls, dm = setup(16)
    rec = uppr(dm, interpolate(dm, lambda x, y: x + 2 * y, lambda x, y: x + 2 * y))
    for side in (1, 2):
        assert np.max(np.abs(rec.side(side) - [1.0, 2.0])) <= 1e-12


def test_dense_least_squares_oracle():
    m, cls, dm = setup(16)
    rec, _ = full_patch_nodes(dm, 1)
    V = m.vertices
    center = int(np.argmin(np.hypot(V[rec.nodes, 0] + 0.1, V[rec.nodes, 1] - 0.05)))
    fit = rec.patch(center)
    z = V[fit.center]
    S = V[fit.sample_nodes] - z
    M = np.column_stack([np.ones(len(S)), S[:, 0], S[:, 1], S[:, 0] ** 2, S[:, 0] * S[:, 1], S[:, 1] ** 2])
    coef = np.linalg.lstsq(M, np.sin(V[fit.sample_nodes, 0]), rcond=None)[0]
    got = fit.weights_x @ np.sin(V[fit.sample_nodes, 0])
    assert got == pytest.approx(coef[1], abs=1e-12)
    assert fit.weights_y @ np.sin(V[fit.sample_nodes, 0]) == pytest.approx(coef[2], abs=1e-12)
    assert len(fit.sample_nodes) >= 6 and fit.condition_estimate < 1e8


def test_ring_expansion_near_fringe():
    m, cls, dm = setup(16)
    for side in (1, 2):
        rec = side_recovery(m, dm.support(side), dm.nodes(side), side)
        counts = np.diff(rec.indptr)
        assert np.all(counts >= 6)
        assert rec.rings.min() == 1 and rec.rings.max() <= 4
        # samples never leave the side's own nodes
        assert np.all(np.isin(rec.nodes[rec.indices], dm.nodes(side)))


def test_patch_failure_on_degenerate_domain():
    # a single triangle has three nodes and no ring to grow into
    m = Mesh(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), np.array([[0, 1, 2]]), np.zeros(1, int))
    with pytest.raises(PatchFailure):
        side_recovery(m, np.array([0]), np.array([0, 1, 2]))


def test_linearity(rng):
    m, cls, dm = setup(16)
    op = build_recovery(dm)
    u = PairedField(rng.standard_normal(dm.n_dofs), dm)
    v = PairedField(rng.standard_normal(dm.n_dofs), dm)
    a, b = 2.5, -0.75
    lhs = op(a * u + b * v)
    ru, rv = op(u), op(v)
    scale = max(np.abs(ru.gx).max(), np.abs(rv.gx).max())
    assert np.max(np.abs(lhs.gx - (a * ru.gx + b * rv.gx))) <= 1e-12 * scale
    assert np.max(np.abs(lhs.gy - (a * ru.gy + b * rv.gy))) <= 1e-12 * scale


def test_operator_matches_per_side_recovery(rng):
    m, cls, dm = setup(16)
    u = PairedField(rng.standard_normal(dm.n_dofs), dm)
    rec = uppr(dm, u)
    for side in (1, 2):
        assert np.allclose(rec.side(side), ppr_recover(dm, u, side), rtol=0, atol=1e-12)


def test_renumbering_invariance():
    # same geometry, vertices listed in reverse order
    m = uniform_mesh(12)
    perm = np.arange(m.n_vertices)[::-1]
    inv = np.argsort(perm)
    m2 = Mesh(m.vertices[perm], inv[m.triangles], m.refinement_edge)
    out = []
    for mesh in (m, m2):
        _, _, dm = setup(mesh=mesh)
        f = interpolate(dm, lambda x, y: np.sin(3 * x) * y, lambda x, y: np.exp(x - y))
        rec = uppr(dm, f)
        rows = []
        for side in (1, 2):
            V = mesh.vertices[dm.nodes(side)]
            g = rec.side(side)
            rows += [(side, round(x, 12), round(y, 12), a, b) for (x, y), (a, b) in zip(V, g)]
        out.append(sorted(rows))
    a, b = np.array([r[3:] for r in out[0]]), np.array([r[3:] for r in out[1]])
    assert [r[:3] for r in out[0]] == [r[:3] for r in out[1]]
    assert np.max(np.abs(a - b)) <= 1e-12


def _p1_mass_and_stiffness(mesh, elements, nodes):
    local = np.full(mesh.n_vertices, -1)
    local[nodes] = np.arange(len(nodes))
    n = len(nodes)
    M = np.zeros((n, n))
    K = np.zeros((n, n))
    ref_mass = (np.ones((3, 3)) + np.eye(3)) / 12.0
    G = mesh.gradients()
    area = np.abs(mesh.signed_areas())
    for t in elements:
        idx = local[mesh.triangles[t]]
        M[np.ix_(idx, idx)] += area[t] * ref_mass
        K[np.ix_(idx, idx)] += area[t] * G[t] @ G[t].T
    return M, K


def test_boundedness(rng):
    m, cls, dm = setup(16)
    op = build_recovery(dm)
    worst = 0.0
    for side in (1, 2):
        M, K = _p1_mass_and_stiffness(m, dm.support(side), dm.nodes(side))
        for _ in range(5):
            u = PairedField(rng.standard_normal(dm.n_dofs), dm)
            g = op(u).side(side)
            v = u.coefficients[dm.side_slice(side)]
            l2 = np.sqrt(g[:, 0] @ M @ g[:, 0] + g[:, 1] @ M @ g[:, 1])
            worst = max(worst, l2 / np.sqrt(v @ K @ v))
    assert worst <= 10.0


# -- estimator ------------------------------------------------------------------------

def _estimate(state):
    p = state.problem
    return estimate(state.mesh, state.classification, state.infos, state.dofmap, state.uh, state.recovered,
                    p.beta1, p.beta2)


def test_estimator_vanishes_for_affine_data():
    m, cls, dm = setup(16)
    b1, b2 = (lambda x, y: 1.0 + 0 * x), (lambda x, y: 5.0 + 0 * x)
    infos = cut_infos(cls, b1, b2)
    f = interpolate(dm, lambda x, y: 2 * x - y, lambda x, y: 2 * x - y)
    eta_T, eta = estimate(m, cls, infos, dm, f, uppr(dm, f), b1, b2)
    assert eta <= 1e-12


def test_estimator_sum_identity():
    st = solve_problem(uniform_mesh(32), get_problem("ex51a"))
    eta_T, eta = _estimate(st)
    assert eta ** 2 == pytest.approx(np.sum(eta_T ** 2), rel=1e-14)
    assert np.all(eta_T >= 0) and eta > 0


def test_effectivity_asymptotically_exact():
    _, runs, _ = uniform_study("ex51a", ns=(256,), with_effectivity=True)
    assert 0.9 <= runs[-1]["effectivity"] <= 1.1


# -- mesh-dependent norm -------------------------------------------------------------------

def test_mesh_norm_zero_and_continuous():
    m, cls, dm = setup(16)
    infos = cut_infos(cls, lambda x, y: 1.0 + 0 * x, lambda x, y: 10.0 + 0 * x)
    assert mesh_norm(m, cls, infos, dm, PairedField(np.zeros(dm.n_dofs), dm)) == 0.0
    lin = interpolate(dm, lambda x, y: x + 2 * y, lambda x, y: x + 2 * y)
    total = mesh_norm(m, cls, infos, dm, lin)
    # with no jump, the norm is |grad|^2 * area plus the flux term (h_T |chord| (grad.n)^2)
    g = infos.geometry
    flux = np.sum(g.h_T * g.chord_len * (g.normal @ np.array([1.0, 2.0])) ** 2)
    assert total ** 2 == pytest.approx(5.0 * 4.0 + flux, rel=1e-12)


def test_mesh_norm_jump_only():
    m, cls, dm = setup(16)
    infos = cut_infos(cls, lambda x, y: 1.0 + 0 * x, lambda x, y: 10.0 + 0 * x)
    c = interpolate(dm, lambda x, y: 1.0 + 0 * x, lambda x, y: 0.0 * x)
    g = infos.geometry
    assert mesh_norm(m, cls, infos, dm, c) ** 2 == pytest.approx(np.sum(g.chord_len / g.h_T), rel=1e-12)


def test_supercloseness_quantity_matches_gradient_error():
    st = solve_problem(uniform_mesh(32), get_problem("ex51a"))
    diff = interpolate_exact(st.problem, st.dofmap) - st.uh
    full = mesh_norm(st.mesh, st.classification, st.infos, st.dofmap, diff)
    assert full >= error_norms(st).Die * (1 - 1e-12)


# -- values reported in the source tables ----------------------------------------------------

@pytest.mark.xfail(strict=True, reason="penalty normalisation differs from the published runs; see notes")
def test_table_recovery_error_at_1_64():
    report, _, _ = uniform_study("ex51a")
    assert report.rows[2].Dre == pytest.approx(2.75e-3, rel=0.1)


@pytest.mark.xfail(strict=True, reason="penalty normalisation differs from the published runs; see notes")
def test_table_supercloseness_at_1_64():
    report, _, _ = uniform_study("ex51a")
    assert report.rows[2].Die == pytest.approx(3.28e-3, rel=0.1)
