import numpy as np
import pytest

from nitsche_uppr import interfaces
from nitsche_uppr.problems import CATALOG, get_problem

STEP = 1e-5
EXAMPLES = ["ex51a", "ex51b", "ex51c", "ex51d", "ex52", "ex53", "ex54", "ex55", "custom"]


def sample_points(rng, n=100):
    # keep away from the origin, where the log branches are singular
    pts = rng.uniform(-1, 1, (4 * n, 2))
    pts = pts[np.hypot(*pts.T) > 0.15]
    return pts[:n, 0], pts[:n, 1]


def fd_grad(u, x, y, h=STEP):
    return (u(x + h, y) - u(x - h, y)) / (2 * h), (u(x, y + h) - u(x, y - h)) / (2 * h)


def fd_source(beta, grad, x, y, h=1e-4):
    """-div(beta grad u) by central differences of the flux."""
    fx = lambda a, b: beta(a, b) * grad(a, b)[0]
    fy = lambda a, b: beta(a, b) * grad(a, b)[1]
    return -((fx(x + h, y) - fx(x - h, y)) / (2 * h) + (fy(x, y + h) - fy(x, y - h)) / (2 * h))


def rel(a, b):
    return np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300)


@pytest.mark.parametrize("name", EXAMPLES)
def test_gradients_match_finite_differences(name, rng):
    p = get_problem(name)
    x, y = sample_points(rng)
    for side in (1, 2):
        gx, gy = p.exact_grad(side)(x, y)
        fx, fy = fd_grad(p.exact(side), x, y)
        assert rel(np.broadcast_to(gx, x.shape), fx) < 1e-4
        assert rel(np.broadcast_to(gy, x.shape), fy) < 1e-4


@pytest.mark.parametrize("name", EXAMPLES)
def test_sources_match_finite_differences(name, rng):
    p = get_problem(name)
    x, y = sample_points(rng)
    for side in (1, 2):
        ref = fd_source(p.beta(side), lambda a, b: fd_grad(p.exact(side), a, b, 1e-4), x, y)
        coded = np.broadcast_to(p.source(side)(x, y), x.shape)
        scale = max(np.max(np.abs(ref)), 1.0)
        assert np.max(np.abs(coded - ref)) / scale < 1e-4


@pytest.mark.parametrize("name", EXAMPLES)
def test_coefficients_positive(name, rng):
    p = get_problem(name)
    x, y = rng.uniform(-1, 1, (2, 2000))
    for side in (1, 2):
        assert np.all(np.broadcast_to(p.beta(side)(x, y), x.shape) > 0)


@pytest.mark.parametrize("name", ["ex51a", "ex51b", "ex51c", "ex51d"])
def test_circle_examples_have_no_jumps(name, rng):
    p = get_problem(name)
    t = rng.uniform(0, 2 * np.pi, 50)
    x, y = 0.5 * np.cos(t), 0.5 * np.sin(t)
    assert np.max(np.abs(p.q(x, y))) < 1e-14
    assert np.max(np.abs(p.g(x, y, np.cos(t), np.sin(t)))) < 1e-12


def test_jumps_follow_branches(rng):
    p = get_problem("ex52")
    x, y = sample_points(rng, 20)
    nx, ny = np.cos(0.3), np.sin(0.3)
    assert np.allclose(p.q(x, y), p.u1(x, y) - p.u2(x, y))
    g1 = np.array(p.grad1(x, y))
    g2 = np.array(p.grad2(x, y))
    expect = 1.0 * (g1[0] * nx + g1[1] * ny) - 10.0 * (g2[0] * nx + g2[1] * ny)
    assert np.allclose(p.g(x, y, nx, ny), expect)


def test_unknown_example():
    with pytest.raises(KeyError):
        get_problem("ex99")
    assert set(EXAMPLES) == set(CATALOG)


def test_scaled_problem_is_linear(rng):
    p = get_problem("ex53")
    s = p.scaled(2.0)
    x, y = sample_points(rng, 10)
    assert np.allclose(s.f1(x, y), 2 * p.f1(x, y))
    assert np.allclose(s.q(x, y), 2 * p.q(x, y))
    assert np.allclose(s.beta1(x, y), p.beta1(x, y))


# -- interfaces --------------------------------------------------------------------------

def test_circle_level_set():
    c = interfaces.circle()
    assert c(0.0, 0.0) < 0 and c(1.0, 0.0) > 0 and c(0.5, 0.0) == 0.0
    assert c.curvature_at(np.array([0.5]), np.array([0.0]))[0] == pytest.approx(2.0)


def test_finite_difference_curvature_of_circle():
    c = interfaces.circle()
    bare = interfaces.Interface("c", c.phi)
    t = np.linspace(0, 2 * np.pi, 7)
    k = bare.curvature_at(0.5 * np.cos(t), 0.5 * np.sin(t), h=0.05)
    assert np.allclose(k, 2.0, rtol=1e-3)
    gx, gy = bare.gradient(0.3, 0.4)
    assert (gx, gy) == pytest.approx((0.6, 0.8), abs=1e-8)


@pytest.mark.parametrize("name", ["petal6", "spiralish", "sharp20"])
def test_polyline_distance_against_dense_curve(name, rng):
    iface = interfaces.get_interface(name)
    t = np.linspace(*iface.t_range, 200001)
    cx, cy = iface.curve_fn(t)
    x, y = rng.uniform(-1, 1, (2, 200))
    d = np.array([np.min(np.hypot(cx - a, cy - b)) for a, b in zip(x, y)])
    phi = iface(x, y)
    # sign: negative inside; magnitude close to the true distance
    assert np.max(np.abs(np.abs(phi) - d)) < 1e-4


@pytest.mark.parametrize("name", ["petal6", "spiralish", "sharp20"])
def test_polyline_inside_points(name):
    iface = interfaces.get_interface(name)
    # every interface encloses a point near its centre
    cx, cy = iface.vertices.mean(axis=0)
    assert iface(cx, cy) < 0
    assert np.all(iface(np.array([-0.99, 0.99, 0.99]), np.array([-0.99, -0.99, 0.99])) > 0)


def test_polyline_curve_points_are_on_interface(rng):
    iface = interfaces.sharp20()
    t = rng.uniform(0, 2 * np.pi, 100)
    x, y = iface.curve_fn(t)
    # chord sag of the sampled polyline: spacing^2 * curvature / 8
    assert np.max(np.abs(iface(x, y))) < 1e-4


def test_get_interface_unknown():
    with pytest.raises(KeyError):
        interfaces.get_interface("square")
