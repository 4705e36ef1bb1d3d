import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modicalab import dynamics, potentials

GL = potentials.make_potential("ginzburg_landau", m=2)
DW = potentials.make_potential("double_well")


def test_phase_point_validation():
    with pytest.raises(ValueError):
        dynamics.PhasePoint(np.zeros(2), np.zeros(3))


def test_orbit_family_closed_forms():
    fam = dynamics.orbit_family(0.5)
    assert fam.lam == 0.25 * 0.75**2
    assert fam.mu == 0.75
    assert abs(fam.period - 2 * math.pi / math.sqrt(0.75)) < 1e-15
    assert fam.H == (-3 * 0.5**4 + 4 * 0.5**2 - 1) / 4
    with pytest.raises(ValueError):
        dynamics.orbit_family(1.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=0.05, max_value=0.95))
def test_start_state_hamiltonian_matches_family(R):
    """H computed from the phase point equals the family's closed form."""
    fam = dynamics.orbit_family(R)
    h = dynamics.hamiltonian(GL, fam.start_state())
    assert abs(h - fam.H) < 1e-14


def test_hamiltonian_sign_change_at_one_third():
    below = dynamics.orbit_family(math.sqrt(1.0 / 3.0 - 1e-6))
    above = dynamics.orbit_family(math.sqrt(1.0 / 3.0 + 1e-6))
    assert below.H < 0.0 < above.H
    at = dynamics.orbit_family(math.sqrt(1.0 / 3.0))
    assert abs(at.H) < 1e-15


def test_integrate_one_orbit_period():
    fam = dynamics.orbit_family(0.5)
    dt = 1e-3
    steps = int(round(fam.period / dt))
    traj = dynamics.integrate(GL, fam.start_state(), dt, steps)
    assert traj.drift() < 1e-9
    # the orbit is closed: the endpoint returns near the start
    gap = np.linalg.norm(traj.u[-1] - traj.u[0])
    assert gap < 5e-3  # period not an exact multiple of dt, plus O(dt^2) error
    assert traj.m == 2
    assert abs(traj.dt - dt) < 1e-15


def test_integrate_is_time_reversible():
    fam = dynamics.orbit_family(0.4)
    traj = dynamics.integrate(GL, fam.start_state(), 1e-3, 500)
    end = traj.state(-1)
    back = dynamics.integrate(GL, dynamics.PhasePoint(end.u, -end.v), 1e-3, 500)
    assert np.max(np.abs(back.u[-1] - traj.u[0])) < 1e-10


def test_integrate_argument_validation():
    with pytest.raises(ValueError):
        dynamics.integrate(GL, dynamics.orbit_family(0.5).start_state(), -1.0, 10)


def test_blowup_carries_partial_trajectory():
    # u'' = u along the unstable direction grows like e^t and must trip the guard
    quad = potentials.make_potential("quadratic", m=1)
    start = dynamics.PhasePoint(np.array([1.0]), np.array([1.0]))
    with pytest.raises(dynamics.BlowUpError) as info:
        dynamics.integrate(quad, start, 1e-2, 5000, blowup=1e4)
    partial = info.value.trajectory
    assert len(partial.times) < 5001
    assert np.all(np.abs(partial.u) <= 1e4)


def test_trajectory_csv_format(tmp_path):
    traj = dynamics.integrate(GL, dynamics.orbit_family(0.5).start_state(), 1e-2, 5)
    path = tmp_path / "traj.csv"
    traj.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,u_1,u_2,v_1,v_2,H"
    assert len(lines) == 7
    row = lines[1].split(",")
    assert float(row[0]) == 0.0
    assert float(row[1]) == 0.5  # starts on the circle
    # repr round-trip: parsing the text reproduces the stored floats exactly
    assert float(lines[3].split(",")[5]) == traj.H[2]


# ---------------------------------------------------------------------------
# heteroclinic shooting


def test_heteroclinic_matches_tanh_profile():
    traj = dynamics.shoot_heteroclinic(DW, -1.0, 1.0)
    # centre the profile at its zero crossing and compare with tanh(x/sqrt 2)
    k0 = int(np.argmin(np.abs(traj.u[:, 0])))
    ts = traj.times - traj.times[k0]
    ref = np.tanh(ts / math.sqrt(2.0))
    mask = np.abs(ts) < 5.0
    assert np.max(np.abs(traj.u[mask, 0] - ref[mask])) < 1e-5


def test_heteroclinic_equipartition():
    traj = dynamics.shoot_heteroclinic(DW, -1.0, 1.0)
    kin = 0.5 * traj.v[:, 0] ** 2
    pot = np.asarray(DW.w(traj.u))
    assert np.max(np.abs(kin - pot)) < 1e-12
    assert np.max(np.abs(traj.H)) < 1e-12


def test_heteroclinic_rejects_bad_endpoints():
    with pytest.raises(ValueError, match="zeros of the potential"):
        dynamics.shoot_heteroclinic(DW, -0.5, 1.0)
    with pytest.raises(ValueError, match="a_minus < a_plus"):
        dynamics.shoot_heteroclinic(DW, 1.0, -1.0)
    gl3 = potentials.make_potential("ginzburg_landau", m=2)
    with pytest.raises(ValueError, match="scalar"):
        dynamics.shoot_heteroclinic(gl3, -1.0, 1.0)


def test_heteroclinic_rejects_interior_zero():
    # a triple well vanishing at 0 strictly between -1 and 1: no monotone connection
    def w(u):
        return (u[..., 0] ** 2 * (u[..., 0] ** 2 - 1.0)) ** 2

    def grad(u):
        x = u[..., :1]
        return 2.0 * (x**4 - x**2) * (4.0 * x**3 - 2.0 * x)

    def hess(u):
        x = u[..., 0]
        q, dq = x**4 - x**2, 4.0 * x**3 - 2.0 * x
        return (2.0 * dq**2 + 2.0 * q * (12.0 * x**2 - 2.0))[..., None, None]

    p = potentials.Potential("triple", 1, {}, (np.array([-1.0]), np.array([0.0]), np.array([1.0])),
                             w, grad, hess)
    with pytest.raises(ValueError, match="vanishes between the wells"):
        dynamics.shoot_heteroclinic(p, -1.0, 1.0)
