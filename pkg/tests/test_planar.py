"""Stress tensor, auxiliary function U, Green identity, monotone profiles."""

import json
import math

import numpy as np
import pytest

from modicalab import fields, planar, potentials
from modicalab.estimates import HypothesisError


def _random_jet(rng, m=2):
    u = rng.normal(size=m)
    du = rng.normal(size=(m, 2))
    s = rng.normal(size=(m, 2, 2))
    return fields.Jet2(x=rng.normal(size=2), u=u, du=du,
                       d2u=0.5 * (s + np.swapaxes(s, 1, 2)))


def _sample_grid(name, h, box=1.0, **params):
    f = fields.make_field(name, **params)
    n = int(round(2.0 * box / h)) + 1
    return fields.sample_field(f, origin=(-box, -box), spacing=(h, h), extents=(n, n))


def _exp_modes():
    """Two exponential modes solving Lap u = u; genuinely two-dimensional."""
    a = np.array([math.cos(0.3), math.sin(0.3)])
    b = np.array([math.cos(1.2), math.sin(1.2)])

    def jet_fn(x):
        ea = math.exp(float(a @ x))
        eb = 0.5 * math.exp(float(b @ x))
        u = np.array([ea, eb])
        du = np.array([ea * a, eb * b])
        d2u = np.array([ea * np.outer(a, a), eb * np.outer(b, b)])
        return u, du, d2u

    def values(X):
        X = np.asarray(X, float)
        return np.stack([np.exp(X @ a), 0.5 * np.exp(X @ b)], axis=-1)

    return fields.ClosedFormField("exp_modes", 2, 2, {}, jet_fn, values)


# ---------------------------------------------------------------------------
# tensor algebra at a jet


def test_stress_tensor_symmetric_with_trace_minus_two_w():
    rng = np.random.default_rng(7)
    p = potentials.make_potential("ginzburg_landau", m=3)
    for _ in range(50):
        jet = _random_jet(rng, m=3)
        T = planar.stress_tensor(jet, p)
        assert T.shape == (2, 2)
        assert np.allclose(T, T.T, atol=0.0)
        assert abs(np.trace(T) + 2.0 * p.w(jet.u)) < 1e-12


def test_stress_decomposition_sums_to_tensor():
    rng = np.random.default_rng(8)
    p = potentials.make_potential("double_well")
    for _ in range(20):
        jet = _random_jet(rng, m=1)
        scalar, gram = planar.stress_decomposition(jet, p)
        T = planar.stress_tensor(jet, p)
        assert np.allclose(gram + scalar * np.eye(2), T, atol=1e-14)
        assert scalar <= 0.0 or p.w(jet.u) < 0.0  # -(kinetic + W) with W >= 0


def test_hessian_u_trace_and_adjugate_relation():
    # trace D2U = 4W, and D2U = -2 adj(T) entrywise
    rng = np.random.default_rng(9)
    p = potentials.make_potential("ginzburg_landau", m=2)
    for _ in range(50):
        jet = _random_jet(rng)
        H = planar.hessian_U(jet, p)
        T = planar.stress_tensor(jet, p)
        assert abs(np.trace(H) - 4.0 * p.w(jet.u)) < 1e-12
        adj = np.array([[T[1, 1], -T[0, 1]], [-T[1, 0], T[0, 0]]])
        assert np.allclose(H, -2.0 * adj, atol=1e-12)


def test_hessian_u_rejects_nonplanar_jet():
    jet = fields.jet(fields.make_field("tanh_profile"), np.array([0.3]))
    assert jet.n == 1
    p = potentials.make_potential("double_well")
    with pytest.raises(ValueError, match="planar"):
        planar.hessian_U(jet, p)


# ---------------------------------------------------------------------------
# divergence of the stress tensor on grids


def test_divergence_residual_roundoff_on_circle_solution():
    # the field depends on x1 only, so every tensor entry is constant and the
    # finite-difference divergence sits at roundoff
    p = potentials.make_potential("ginzburg_landau", m=2)
    g = _sample_grid("gl_circle_planar", 0.05, R=0.6)
    # gate admits the O(h^2) truncation of the sampled field; the divergence
    # itself still sits at roundoff because every tensor entry is constant
    assert planar.divergence_residual(g, p, gate=1e-3) < 1e-10


def test_divergence_residual_gates_on_the_equation():
    g = _sample_grid("product_saddle", 0.1)
    dw = potentials.make_potential("double_well")
    with pytest.raises(HypothesisError, match="does not solve"):
        planar.divergence_residual(g, dw)


def test_divergence_residual_needs_planar_grid():
    f = fields.make_field("tanh_profile")
    g = fields.sample_field(f, origin=(-1.0,), spacing=(0.1,), extents=(21,))
    p = potentials.make_potential("double_well")
    with pytest.raises(ValueError, match="planar"):
        planar.divergence_residual(g, p)


def test_divergence_residual_margin_validation():
    p = potentials.make_potential("ginzburg_landau", m=2)
    g = _sample_grid("gl_circle_planar", 0.1, R=0.5)
    with pytest.raises(ValueError, match="measurement nodes"):
        planar.divergence_residual(g, p, gate=1e-2, margin=5.0)


def test_divergence_pair_second_order_on_exponential_modes():
    f = _exp_modes()
    q = potentials.make_potential("quadratic", m=2)

    def make_grid(h):
        n = int(round(2.0 / h)) + 1
        return fields.sample_field(f, origin=(-1.0, -1.0), spacing=(h, h), extents=(n, n))

    pair = planar.divergence_pair(make_grid, q, 0.05, gate=1e-2)
    assert pair["h"] == 0.05
    assert pair["residual_h2"] < pair["residual_h"]
    assert 3.5 <= pair["ratio"] <= 4.5


def test_compatibility_residual_roundoff_on_circle_solution():
    p = potentials.make_potential("ginzburg_landau", m=2)
    g = _sample_grid("gl_circle_planar", 0.05, R=0.6)
    assert planar.compatibility_residual(g, p) < 1e-10


# ---------------------------------------------------------------------------
# reconstruction of U


def test_reconstruct_u_circle_grid_machine_zero_defects():
    p = potentials.make_potential("ginzburg_landau", m=2)
    g = _sample_grid("gl_circle_planar", 0.02, R=0.5)
    rec = planar.reconstruct_U(g, p)
    assert rec.path_defect < 1e-12
    assert rec.laplacian_defect < 1e-11
    ni = g.values.shape[0] - 2
    assert rec.values.shape == (ni, ni)
    assert rec.grid.meta["content"] == "auxiliary-U"
    # U grid starts at the first interior node of the source grid
    assert np.allclose(rec.grid.origin, g.node_position((1, 1)))


def test_reconstruct_u_gauge_node_is_exact_zero():
    p = potentials.make_potential("ginzburg_landau", m=2)
    g = _sample_grid("gl_circle_planar", 0.05, R=0.5)
    rec = planar.reconstruct_U(g, p, gauge=(3, 4))
    assert rec.gauge_index == (3, 4)
    assert rec.values[3, 4] == 0.0
    assert rec.grid.meta["gauge_index"] == [3, 4]


def test_reconstruct_u_path_defect_second_order():
    # on a genuinely two-dimensional solution the two integration orders
    # disagree at O(h^2)
    f = _exp_modes()
    q = potentials.make_potential("quadratic", m=2)
    defects = []
    for h in (0.025, 0.0125):
        n = int(round(2.0 / h)) + 1
        g = fields.sample_field(f, origin=(-1.0, -1.0), spacing=(h, h), extents=(n, n))
        defects.append(planar.reconstruct_U(g, q, gate=1.0).path_defect)
    ratio = defects[0] / defects[1]
    assert 3.0 <= ratio <= 5.0


def test_reconstruct_u_gates_on_the_equation():
    g = _sample_grid("product_saddle", 0.1)
    dw = potentials.make_potential("double_well")
    with pytest.raises(HypothesisError, match="does not solve"):
        planar.reconstruct_U(g, dw)


# ---------------------------------------------------------------------------
# convexity of U


def test_convexity_margin_closed_form_dichotomy():
    p = potentials.make_potential("ginzburg_landau", m=2)
    for r_sq, expected_convex in ((0.3, True), (0.5, False)):
        f = fields.make_field("gl_circle_planar", R=math.sqrt(r_sq))
        jet = f.jet(np.array([0.37, -0.2]))
        status = planar.convexity_status(jet, p)
        closed = 0.25 * (1.0 - r_sq) ** 2 * (1.0 - 3.0 * r_sq) * (1.0 + r_sq)
        assert abs(status["margin"] - closed) < 1e-12
        assert status["convex"] is expected_convex
        assert not status["conformal_vacuum"]


def test_convexity_margin_equals_det():
    rng = np.random.default_rng(11)
    p = potentials.make_potential("ginzburg_landau", m=2)
    for _ in range(40):
        status = planar.convexity_status(_random_jet(rng), p)
        assert abs(status["det"] - status["margin"]) < 1e-9 * max(1.0, abs(status["det"]))


def test_conformal_vacuum_flag():
    z = potentials.make_potential("zero", m=2)
    ident = fields.make_field("harmonic_linear_map")  # the identity map
    status = planar.convexity_status(ident.jet(np.array([0.4, 1.1])), z)
    assert status["conformal_vacuum"]
    assert status["convex"]
    assert status["margin"] == 0.0

    saddle = fields.make_field("product_saddle")
    jet = saddle.jet(np.array([1.0, 2.0]))
    status = planar.convexity_status(jet, potentials.make_potential("zero", m=1))
    assert not status["conformal_vacuum"]
    assert not status["convex"]
    # margin = -(x1^2 + x2^2)^2 when W = 0
    assert abs(status["margin"] + 25.0) < 1e-12


# ---------------------------------------------------------------------------
# quadrature and the Green identity


def test_disk_integral_polynomials():
    area = planar.disk_integral(lambda pts: np.ones(pts.shape[:-1]), (0.3, -0.2), 1.5)
    assert abs(area - math.pi * 1.5**2) < 1e-12

    def rad_sq(pts):
        d = pts - np.array([0.3, -0.2])
        return np.sum(d**2, axis=-1)

    moment = planar.disk_integral(rad_sq, (0.3, -0.2), 2.0)
    assert abs(moment - math.pi * 2.0**4 / 2.0) < 1e-10


def test_disk_integral_rejects_bad_radius():
    with pytest.raises(ValueError, match="positive"):
        planar.disk_integral(lambda pts: np.ones(pts.shape[:-1]), (0.0, 0.0), 0.0)


def test_green_identity_on_circle_solution():
    p = potentials.make_potential("ginzburg_landau", m=2)
    f = fields.make_field("gl_circle_planar", R=0.5)
    result = planar.green_boundary_identity(f, p, (0.0, 0.0), 1.0)
    assert result["defect"] <= 1e-10
    # |u| = R everywhere, so the bulk side is 4 W pi R^2 exactly
    w = 0.25 * (1.0 - 0.25) ** 2
    assert abs(result["lhs"] - 4.0 * w * math.pi) < 1e-10
    assert result["rule_order"] == 64
    assert result["boundary_nodes"] == 256


def test_green_identity_on_transition_profile():
    p = potentials.make_potential("double_well")
    f = fields.make_field("tanh_planar")
    result = planar.green_boundary_identity(f, p, (0.2, -0.1), 1.3)
    assert result["defect"] <= 1e-8


def test_green_identity_gates_on_the_boundary():
    dw = potentials.make_potential("double_well")
    f = fields.make_field("product_saddle")
    with pytest.raises(HypothesisError, match="on the boundary"):
        planar.green_boundary_identity(f, dw, (0.0, 0.0), 1.0)


# ---------------------------------------------------------------------------
# monotone radial profiles


def test_profile_laplacian_quadratic_is_four_pi_r():
    radii = np.linspace(0.25, 2.0, 8)
    prof = planar.monotonicity_profile("laplacian_quadratic", None, None, (0.0, 0.0), radii)
    expected = 4.0 * math.pi * np.asarray(prof.radii)
    assert np.max(np.abs(np.asarray(prof.values) - expected)) < 1e-10
    assert prof.is_monotone()
    assert prof.density == "laplacian_quadratic"


def test_profile_grad_sq_linear_for_the_identity_map():
    f = fields.make_field("harmonic_linear_map")
    radii = (0.5, 1.0, 1.5)
    prof = planar.monotonicity_profile("grad_sq", f, None, (0.1, 0.2), radii, n_r=16, n_theta=32)
    expected = 2.0 * math.pi * np.asarray(radii)
    assert np.max(np.abs(np.asarray(prof.values) - expected)) < 1e-10


def test_profile_potential_monotone_for_transition_solution():
    f = fields.make_field("tanh_planar")
    p = potentials.make_potential("double_well")
    prof = planar.monotonicity_profile("potential", f, p, (0.0, 0.0), np.linspace(0.25, 2.0, 8))
    assert prof.is_monotone()
    assert all(v >= 0.0 for v in prof.values)


def test_profile_argument_validation():
    with pytest.raises(ValueError, match="strictly increasing"):
        planar.monotonicity_profile("laplacian_quadratic", None, None, (0.0, 0.0), (1.0, 1.0))
    with pytest.raises(ValueError, match="positive"):
        planar.monotonicity_profile("laplacian_quadratic", None, None, (0.0, 0.0), (-1.0, 2.0))
    with pytest.raises(ValueError, match="unknown density"):
        planar.monotonicity_profile("vorticity", None, None, (0.0, 0.0), (1.0,))
    with pytest.raises(ValueError, match="needs a field"):
        planar.monotonicity_profile("potential", None, None, (0.0, 0.0), (1.0,))


def test_is_monotone_slack_uses_error_estimates():
    base = dict(center=(0.0, 0.0), radii=(1.0, 2.0, 3.0), density="potential")
    falling = planar.MonotoneProfile(values=(3.0, 2.0, 1.0), errors=(0.0, 0.0, 0.0), **base)
    assert not falling.is_monotone()
    noisy = planar.MonotoneProfile(values=(3.0, 2.9, 2.8), errors=(0.1, 0.1, 0.1), **base)
    assert noisy.is_monotone()  # dips within quadrature error are tolerated


def test_profile_csv_format(tmp_path):
    radii = (0.5, 1.0)
    prof = planar.monotonicity_profile("laplacian_quadratic", None, None, (0.0, 0.0), radii)
    path = tmp_path / "profile.csv"
    prof.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "r,M,quad_error_estimate"
    assert len(lines) == 3
    r, m, e = lines[1].split(",")
    assert float(r) == 0.5
    assert float(m) == prof.values[0]
    assert float(e) == prof.errors[0]


def test_identity_json_sorted_and_stable():
    payload = {"rhs": 2.0, "lhs": 1.0, "defect": 1.0}
    s = planar.identity_json(payload)
    assert s == planar.identity_json(dict(reversed(list(payload.items()))))
    assert json.loads(s) == payload
    assert s.index('"defect"') < s.index('"lhs"') < s.index('"rhs"')
