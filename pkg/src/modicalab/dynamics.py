"""Hamiltonian dynamics for the traveling-coordinate ODE u'' = grad W(u).

The conserved quantity throughout is H = |u'|^2 / 2 - W(u) (note the minus
sign: the system is Newtonian in the inverted potential -W).  Orbits are
integrated with position Verlet, which preserves H up to a bounded O(dt^2)
oscillation, so a drift check is a meaningful diagnostic of step size.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .potentials import Potential

__all__ = [
    "PhasePoint",
    "Trajectory",
    "OrbitFamily",
    "BlowUpError",
    "hamiltonian",
    "integrate",
    "orbit_family",
    "shoot_heteroclinic",
]


@dataclass(frozen=True)
class PhasePoint:
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u", np.atleast_1d(np.asarray(self.u, float)))
        object.__setattr__(self, "v", np.atleast_1d(np.asarray(self.v, float)))
        if self.u.shape != self.v.shape:
            raise ValueError("u and v must have the same shape")


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled phase trajectory with its Hamiltonian series."""

    times: np.ndarray  # (k+1,)
    u: np.ndarray  # (k+1, m)
    v: np.ndarray  # (k+1, m)
    H: np.ndarray  # (k+1,)
    drift_tol: float

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def m(self) -> int:
        return self.u.shape[1]

    def drift(self) -> float:
        return float(np.max(np.abs(self.H - self.H[0])))

    def state(self, k: int) -> PhasePoint:
        return PhasePoint(self.u[k], self.v[k])

    def to_csv(self, path: str) -> None:
        m = self.m
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["t"] + [f"u_{j+1}" for j in range(m)] + [f"v_{j+1}" for j in range(m)] + ["H"])
            for k in range(len(self.times)):
                wr.writerow(
                    [repr(float(self.times[k]))]
                    + [repr(float(x)) for x in self.u[k]]
                    + [repr(float(x)) for x in self.v[k]]
                    + [repr(float(self.H[k]))]
                )


class BlowUpError(RuntimeError):
    """Raised when the integration leaves the trusted region; carries the
    portion of the trajectory computed before the blow-up."""

    def __init__(self, message, trajectory: Trajectory):
        super().__init__(message)
        self.trajectory = trajectory


def hamiltonian(p: Potential, s: PhasePoint) -> float:
    return float(0.5 * np.sum(s.v**2) - p.w(s.u))


def _trajectory(p, times, uu, vv, drift_tol):
    H = 0.5 * np.sum(vv**2, axis=1) - p.w(uu)
    return Trajectory(times=times, u=uu, v=vv, H=H, drift_tol=drift_tol)


def integrate(
    p: Potential,
    start: PhasePoint,
    dt: float,
    steps: int,
    drift_tol: float = 1e-6,
    blowup: float = 1e6,
) -> Trajectory:
    """Position-Verlet integration of u'' = grad W(u) for `steps` steps.

    Returns the synchronized (u_k, v_k) samples at t_k = k dt together with
    the measured Hamiltonian series.  Raises BlowUpError when the state
    leaves |u| <= blowup or stops being finite, attaching the valid prefix.
    """
    if dt <= 0 or steps < 1:
        raise ValueError("need dt > 0 and steps >= 1")
    m = start.u.size
    uu = np.empty((steps + 1, m))
    vv = np.empty((steps + 1, m))
    uu[0], vv[0] = start.u, start.v
    u = start.u.copy()
    v = start.v.copy()
    half = 0.5 * dt
    for k in range(1, steps + 1):
        u_mid = u + half * v
        v = v + dt * p.grad(u_mid)
        u = u_mid + half * v
        if not np.all(np.isfinite(u)) or np.max(np.abs(u)) > blowup:
            times = dt * np.arange(k)
            partial = _trajectory(p, times, uu[:k], vv[:k], drift_tol)
            raise BlowUpError(f"blow-up at step {k} (t = {k * dt:g})", partial)
        uu[k], vv[k] = u, v
    times = dt * np.arange(steps + 1)
    return _trajectory(p, times, uu, vv, drift_tol)


@dataclass(frozen=True)
class OrbitFamily:
    """Circular orbit u_R(x) = R (cos x sqrt(1-R^2), sin x sqrt(1-R^2)) of the
    quartic radial well, with its conserved quantities in closed form."""

    R: float
    lam: float
    mu: float
    period: float
    H: float

    def start_state(self) -> PhasePoint:
        omega = math.sqrt(self.mu)
        return PhasePoint(np.array([self.R, 0.0]), np.array([0.0, self.R * omega]))


def orbit_family(R: float) -> OrbitFamily:
    if not 0.0 < R < 1.0:
        raise ValueError(f"orbit family needs 0 < R < 1, got {R}")
    lam = 0.25 * (R**2 - 1.0) ** 2
    mu = 1.0 - R**2
    H = (-3.0 * R**4 + 4.0 * R**2 - 1.0) / 4.0
    return OrbitFamily(R=R, lam=lam, mu=mu, period=2.0 * math.pi / math.sqrt(mu), H=H)


def shoot_heteroclinic(
    p: Potential,
    a_minus,
    a_plus,
    tol: float = 1e-10,
    dt: float = 1e-3,
    max_span: float = 60.0,
) -> Trajectory:
    """Scalar connection between adjacent zeros via the equipartition reduction.

    On a monotone heteroclinic the Hamiltonian vanishes, so u' = sqrt(2 W(u));
    we integrate that first-order equation from the midpoint of (a-, a+) both
    ways until within `tol` of the wells and resample on a uniform grid.

    Raises if W vanishes somewhere strictly between the wells (no connection).
    """
    if p.m != 1:
        raise ValueError("heteroclinic shooting is implemented for scalar potentials")
    a_minus = float(np.atleast_1d(a_minus)[0])
    a_plus = float(np.atleast_1d(a_plus)[0])
    if not a_minus < a_plus:
        raise ValueError("need a_minus < a_plus")
    for a in (a_minus, a_plus):
        if abs(p.w(np.array([a]))) > 1e-12:
            raise ValueError(f"W({a}) != 0: endpoints must be zeros of the potential")
    interior = np.linspace(a_minus, a_plus, 2001)[1:-1][:, None]
    wmin = float(np.min(p.w(interior)))
    if wmin <= 0.0:
        raise ValueError("potential vanishes between the wells; no monotone connection")

    mid = 0.5 * (a_minus + a_plus)

    def speed(u):
        return math.sqrt(max(2.0 * float(p.w(np.array([u]))), 0.0))

    def rhs_fwd(_, y):
        return [speed(y[0])]

    def rhs_bwd(_, y):
        return [-speed(y[0])]

    def make_event(target, sign):
        def ev(_, y):
            return sign * (y[0] - target)

        ev.terminal = True
        ev.direction = 0
        return ev

    kw = dict(rtol=1e-12, atol=1e-14, dense_output=True, max_step=0.25)
    fwd = solve_ivp(rhs_fwd, (0.0, max_span), [mid], events=make_event(a_plus - tol, 1.0), **kw)
    bwd = solve_ivp(rhs_bwd, (0.0, max_span), [mid], events=make_event(a_minus + tol, -1.0), **kw)
    if fwd.t_events[0].size == 0 or bwd.t_events[0].size == 0:
        raise RuntimeError("connection did not reach the wells within max_span")
    t_plus = float(fwd.t_events[0][0])
    t_minus = float(bwd.t_events[0][0])

    n_neg = int(math.ceil(t_minus / dt))
    n_pos = int(math.ceil(t_plus / dt))
    times = dt * np.arange(-n_neg, n_pos + 1)
    uu = np.empty((times.size, 1))
    for i, t in enumerate(times):
        if t < -t_minus:
            uu[i, 0] = bwd.sol(t_minus)[0]
        elif t < 0:
            uu[i, 0] = bwd.sol(-t)[0]
        elif t <= t_plus:
            uu[i, 0] = fwd.sol(t)[0]
        else:
            uu[i, 0] = fwd.sol(t_plus)[0]
    vv = np.sqrt(2.0 * np.clip(p.w(uu), 0.0, None))[:, None]
    H = 0.5 * vv[:, 0] ** 2 - p.w(uu)
    return Trajectory(times=times, u=uu, v=vv, H=H, drift_tol=tol)
