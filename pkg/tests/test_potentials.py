import math

import numpy as np
import pytest

from modicalab import potentials

ALL_IDS = potentials.POTENTIAL_IDS


def test_catalog_is_closed():
    with pytest.raises(ValueError, match="unknown potential id"):
        potentials.make_potential("sombrero")


def test_double_well_values():
    p = potentials.make_potential("double_well")
    assert p.m == 1
    u = np.array([[1.0], [-1.0], [0.0], [0.5]])
    w = p.w(u)
    assert w[0] == 0.0 and w[1] == 0.0
    assert w[2] == 0.25
    assert abs(w[3] - 0.25 * 0.75**2) < 1e-16
    # grad = (u^2-1)u, hess = 3u^2-1
    assert np.allclose(p.grad(u)[:, 0], (u[:, 0] ** 2 - 1) * u[:, 0])
    assert np.allclose(p.hess(u)[:, 0, 0], 3 * u[:, 0] ** 2 - 1)


def test_double_well_zeros_are_nondegenerate():
    p = potentials.make_potential("double_well")
    for z in p.zeros:
        assert abs(p.w(z)) < 1e-15
        assert np.max(np.abs(p.grad(z))) < 1e-15
        assert np.min(np.linalg.eigvalsh(p.hess(z))) > 0.0


@pytest.mark.parametrize("m", [1, 2, 3])
def test_ginzburg_landau_vanishes_on_sphere(m):
    p = potentials.make_potential("ginzburg_landau", m=m)
    rng = np.random.default_rng(7)
    u = rng.standard_normal((50, m))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    assert np.max(np.abs(p.w(u))) < 1e-14
    assert np.max(np.abs(p.grad(u))) < 1e-14


def test_ginzburg_landau_radial_derivatives():
    p = potentials.make_potential("ginzburg_landau", m=2)
    u = np.array([0.3, -0.4])
    q = np.sum(u**2) - 1.0
    assert abs(p.w(u) - 0.25 * q**2) < 1e-16
    assert np.allclose(p.grad(u), q * u)
    H = p.hess(u)
    assert np.allclose(H, q * np.eye(2) + 2.0 * np.outer(u, u))


def test_n_well_zeros():
    p = potentials.make_potential("n_well", N=5)
    assert len(p.zeros) == 5
    for z in p.zeros:
        assert abs(p.w(z)) < 1e-14
        assert np.max(np.abs(p.grad(z))) < 1e-13
    # strictly positive away from the wells
    assert p.w(np.array([0.0, 0.0])) == 1.0


def test_polygon_product_zeros_and_positivity():
    verts = [[1.0, 0.0], [0.0, 1.0], [-1.0, -0.5]]
    p = potentials.make_potential("polygon_product", vertices=verts)
    for z in p.zeros:
        assert p.w(np.asarray(z)) == 0.0
    rng = np.random.default_rng(3)
    pts = rng.uniform(-2, 2, size=(200, 2))
    assert np.all(p.w(pts) >= 0.0)


def test_quadratic_and_zero():
    q = potentials.make_potential("quadratic", m=3)
    u = np.array([1.0, -2.0, 0.5])
    assert abs(q.w(u) - 0.5 * np.sum(u**2)) < 1e-15
    assert np.allclose(q.grad(u), u)
    assert np.allclose(q.hess(u), np.eye(3))

    z = potentials.make_potential("zero", m=2)
    pts = np.ones((4, 2))
    assert np.all(z.w(pts) == 0.0)
    assert np.all(z.grad(pts) == 0.0)
    assert np.all(z.hess(pts) == 0.0)
    assert z.zeros == ()


def test_wrong_dimension_raises():
    p = potentials.make_potential("ginzburg_landau", m=2)
    with pytest.raises(ValueError, match="trailing axis"):
        p.w(np.zeros(3))


def test_eval_bundle():
    p = potentials.make_potential("double_well")
    w, g, H = p.eval(np.array([0.5]))
    assert w == float(p.w(np.array([0.5])))
    assert g.shape == (1,) and H.shape == (1, 1)
    with pytest.raises(ValueError, match="single point"):
        p.eval(np.zeros((3, 1)))


@pytest.mark.parametrize("name,params", [
    ("double_well", {}),
    ("ginzburg_landau", {"m": 2}),
    ("ginzburg_landau", {"m": 3}),
    ("n_well", {"N": 3}),
    ("polygon_product", {}),
    ("quadratic", {"m": 2}),
])
def test_fd_consistency(name, params):
    """Analytic gradient/Hessian agree with central differences of W."""
    p = potentials.make_potential(name, **params)
    rng = np.random.default_rng(11)
    for u in rng.uniform(-1.5, 1.5, size=(8, p.m)):
        assert potentials.fd_consistency(p, u) < 5e-9


# ---------------------------------------------------------------------------
# radial structure probes


def test_radial_parameters_gl_closed_form():
    p = potentials.make_potential("ginzburg_landau", m=2)
    for R in (0.3, 0.5, 0.9):
        rp = potentials.radial_parameters(p, R)
        assert isinstance(rp, potentials.RadialParams)
        assert abs(rp.lam - 0.25 * (R**2 - 1.0) ** 2) < 1e-14
        assert abs(rp.mu - (1.0 - R**2)) < 1e-14
        assert not rp.degenerate


def test_radial_parameters_rejects_polygon():
    p = potentials.make_potential("polygon_product")
    out = potentials.radial_parameters(p, 0.5)
    assert isinstance(out, potentials.NotRadial)
    assert out.worst_deviation > 1e-9


def test_radial_parameters_scalar_potential():
    p = potentials.make_potential("double_well")
    rp = potentials.radial_parameters(p, 0.5)
    assert isinstance(rp, potentials.RadialParams)
    assert abs(rp.lam - 0.25 * 0.75**2) < 1e-15


def test_convexity_region_probe_double_well():
    p = potentials.make_potential("double_well")
    u = np.array([[0.0], [0.5], [0.6], [1.0]])
    eig = potentials.convexity_region_probe(p, u)
    # W'' = 3u^2 - 1 changes sign at 1/sqrt(3) ~ 0.577
    assert eig[0] < 0 and eig[1] < 0
    assert eig[2] > 0 and eig[3] > 0
