"""A bounded periodic orbit of u'' = grad W(u) whose gradient excess
|u'|^2/2 - W(u) is a positive constant: the planar obstruction to carrying
the scalar pointwise gradient bound over to systems.

Construction, in the order the code builds it:

1.  A plateau profile rho with rho(a) = a below 1/4 and rho = 1/2 above 3/4,
    glued by a flat C-infinity blend.  The two wells a+- = (+-2, 0) carry the
    square patches W(u) = 2 lam rho(|u - a|^2) on |u1 -+ 2| <= 1, |u2| <= 1.
2.  The vertical segment orbit u = (2, y(x)) with y'' = 4 lam rho'(y^2) y,
    launched from the well with speed 1/2.  The level lam = 3/8 is the unique
    choice making the speed hit exactly 1 when the patch plateaus, so the
    orbit coasts onto the connecting curve at unit speed.
3.  A closed C-infinity curve containing both segments: the upper arc is laid
    out by its tangent angle, with curvature a flat bump calibrated by a
    scalar root-find so the arc closes onto the far segment.
4.  A tube potential W = lam + mu kappa(s) in arc/offset coordinates around
    the arc, blended back to the constant lam at the tube edge; with tube
    half-width eps <= lam / (2 max kappa) it stays >= lam / 2.
5.  The full orbit: up the right segment, across the arc, down the left
    segment, then reflected through the origin for the second half-period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from . import smooth
from .potentials import Potential

__all__ = [
    "RhoSpec",
    "CurveSpec",
    "TubePotential",
    "SegmentSolution",
    "PeriodicConnection",
    "ConstructionError",
    "build_rho",
    "lambda_from_hamiltonian",
    "solve_segment",
    "build_curve",
    "assemble",
    "verify_counterexample",
]

A_PLUS = np.array([2.0, 0.0])
A_MINUS = np.array([-2.0, 0.0])


class ConstructionError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# plateau profile


@dataclass(frozen=True)
class RhoSpec:
    """Smooth nondecreasing profile: identity below 1/4, constant 1/2 above 3/4.

    Built from the derivative side: rho' = 1 - smoothstep(2(a - 1/4)) on the
    transition, whose integral lands exactly on 1/2 at a = 3/4 because the
    smoothstep integrates to 1/2 over [0, 1] by symmetry.
    """

    lo: float = 0.25
    hi: float = 0.75

    def rho(self, a):
        a = np.asarray(a, float)
        tau = np.clip(2.0 * (a - self.lo), 0.0, 1.0)
        mid = a - 0.5 * smooth.smoothstep_integral(tau)
        return np.where(a <= self.lo, a, np.where(a >= self.hi, 0.5, mid))

    def drho(self, a):
        a = np.asarray(a, float)
        tau = 2.0 * (a - self.lo)
        return np.where(a <= self.lo, 1.0, np.where(a >= self.hi, 0.0, 1.0 - smooth.smoothstep(tau)))

    def d2rho(self, a):
        a = np.asarray(a, float)
        tau = 2.0 * (a - self.lo)
        inside = (a > self.lo) & (a < self.hi)
        out = np.zeros_like(a)
        out[inside] = -2.0 * smooth.smoothstep_d(tau[inside])
        return out


def build_rho() -> RhoSpec:
    return RhoSpec()


def lambda_from_hamiltonian() -> float:
    """Patch plateau level forced by energy bookkeeping on the segment orbit.

    The orbit leaves the well with speed 1/2 where W = 0, so its conserved
    excess is (1/2)(1/2)^2 = 1/8; demanding unit speed on the plateau
    (where W = lam) gives 1/2 - lam = 1/8.
    """
    return 0.5 - 0.125


# ---------------------------------------------------------------------------
# segment orbit


@dataclass(frozen=True)
class SegmentSolution:
    t1: float  # time at which y = sqrt(3)/2 (plateau entry, speed 1)
    t2: float  # time at which y = 1 (hand-off to the arc)
    times: np.ndarray
    y: np.ndarray
    v: np.ndarray
    drift_per_unit_time: float
    sol: Callable  # dense solution, sol(t) -> (y, v)


def solve_segment(lam: float, dt: float = 1e-3, rho: RhoSpec | None = None) -> SegmentSolution:
    """Integrate y'' = 4 lam rho'(y^2) y from (y, y') = (0, 1/2) up to y = 1.

    Returns crossing times t1 (y = sqrt(3)/2) and t2 (y = 1) plus the profile
    sampled at dt.  Errors out if the measured Hamiltonian drift exceeds
    1e-8 per unit time, i.e. if dt is too coarse for the tolerance budget.
    """
    rho = rho or build_rho()

    def rhs(_, s):
        y, v = s
        return (v, 4.0 * lam * float(rho.drho(y * y)) * y)

    def ev_t1(_, s):
        return s[0] - math.sqrt(0.75)

    def ev_t2(_, s):
        return s[0] - 1.0

    ev_t2.terminal = True
    res = solve_ivp(
        rhs,
        (0.0, 10.0),
        (0.0, 0.5),
        method="DOP853",
        rtol=1e-12,
        atol=1e-14,
        max_step=dt,
        dense_output=True,
        events=(ev_t1, ev_t2),
    )
    if res.t_events[1].size == 0:
        raise ConstructionError("segment orbit never reached y = 1")
    t1 = float(res.t_events[0][0])
    t2 = float(res.t_events[1][0])

    times = np.arange(0.0, t2, dt)
    states = res.sol(times)
    y, v = states[0], states[1]
    if np.any(np.diff(y) <= 0.0):
        raise ConstructionError("segment profile is not strictly increasing")
    H = 0.5 * v**2 - 2.0 * lam * rho.rho(y**2)
    drift = float(np.max(np.abs(H - 0.125))) / max(t2, 1.0)
    if drift > 1e-8:
        raise ConstructionError(f"dt too large: Hamiltonian drift {drift:.3e} per unit time")
    return SegmentSolution(t1=t1, t2=t2, times=times, y=y, v=v, drift_per_unit_time=drift, sol=res.sol)


# ---------------------------------------------------------------------------
# connecting curve


class _BumpIntegral:
    """Machine-accurate cumulative integral of the unit bump on [0, 1]:
    a panel table of Gauss-Legendre prefix sums plus a partial-panel query."""

    def __init__(self, panels: int = 8192, order: int = 8):
        self.K = panels
        nodes, weights = np.polynomial.legendre.leggauss(order)
        edges = np.linspace(0.0, 1.0, panels + 1)
        a, b = edges[:-1], edges[1:]
        t = 0.5 * (b - a)[:, None] * (nodes[None, :] + 1.0) + a[:, None]
        panel_ints = 0.5 * (b - a) * (smooth.bump01(t) @ weights)
        self.table = np.concatenate([[0.0], np.cumsum(panel_ints)])
        self.nodes, self.weights = nodes, weights
        self.total = float(self.table[-1])

    def __call__(self, x):
        x = np.clip(np.asarray(x, float), 0.0, 1.0)
        k = np.minimum((x * self.K).astype(int), self.K - 1)
        a = k / self.K
        t = 0.5 * (x - a)[..., None] * (self.nodes + 1.0) + a[..., None]
        partial = 0.5 * (x - a) * (smooth.bump01(t) @ self.weights)
        return self.table[k] + partial


@dataclass(frozen=True)
class CurveSpec:
    """Upper connecting arc, arclength-parametrized, from (2, 1) to (-2, 1).

    The half-arc on [0, ell] turns the tangent angle from pi/2 to pi with
    curvature kappa(s) = amplitude * bump(s / ell); the second half is the
    mirror image through the u2-axis.  Flat contact of the bump makes the
    junctions with the straight segments C-infinity.
    """

    ell: float
    amplitude: float
    closure_defect: float
    max_kappa: float
    _ieta: _BumpIntegral = field(repr=False)
    _s_nodes: np.ndarray = field(repr=False)
    _gamma_nodes: np.ndarray = field(repr=False)
    _gl: tuple = field(repr=False)

    @property
    def L(self) -> float:
        return 2.0 * self.ell

    def shape_params(self) -> dict:
        return {
            "profile": "exp-flat-bump",
            "half_length": self.ell,
            "amplitude": self.amplitude,
            "max_curvature": self.max_kappa,
            "closure_defect": self.closure_defect,
        }

    # -- scalar geometry, all vectorized over s ------------------------------

    def _fold(self, s):
        s = np.asarray(s, float)
        mirrored = s > self.ell
        return np.where(mirrored, self.L - s, s), mirrored

    def theta(self, s):
        sf, mirrored = self._fold(s)
        base = 0.5 * math.pi * (1.0 + self._ieta(sf / self.ell) / self._ieta.total)
        return np.where(mirrored, 2.0 * math.pi - base, base)

    def kappa(self, s):
        sf, _ = self._fold(s)
        return self.amplitude * smooth.bump01(sf / self.ell)

    def kappa_prime(self, s):
        sf, mirrored = self._fold(s)
        d = (self.amplitude / self.ell) * smooth.bump01_d(sf / self.ell)
        return np.where(mirrored, -d, d)

    def tangent(self, s):
        th = self.theta(s)
        return np.stack([np.cos(th), np.sin(th)], axis=-1)

    def normal(self, s):
        """Leftward (inward) unit normal."""
        th = self.theta(s)
        return np.stack([-np.sin(th), np.cos(th)], axis=-1)

    def gamma(self, s):
        s = np.asarray(s, float)
        scalar = s.ndim == 0
        s = np.atleast_1d(s)
        sf = np.where(s > self.ell, self.L - s, s)
        out = self._gamma_half(sf)
        mirrored = s > self.ell
        out[mirrored, 0] *= -1.0
        return out[0] if scalar else out

    def _gamma_half(self, s):
        """Positions on the half-arc [0, ell] via table + partial-panel GL."""
        s = np.clip(np.asarray(s, float), 0.0, self.ell)
        Np = len(self._s_nodes) - 1
        delta = self.ell / Np
        j = np.minimum((s / delta).astype(int), Np - 1)
        a = self._s_nodes[j]
        nodes, weights = self._gl
        t = 0.5 * (s - a)[:, None] * (nodes + 1.0) + a[:, None]
        th = self.theta(t.ravel()).reshape(t.shape)
        dx = 0.5 * (s - a) * (np.cos(th) @ weights)
        dy = 0.5 * (s - a) * (np.sin(th) @ weights)
        return self._gamma_nodes[j] + np.stack([dx, dy], axis=-1)

    # -- closest-point projection -------------------------------------------

    def project(self, pts, newton_iters: int = 4):
        """Arc coordinates (s, mu) of planar points near the arc.

        Coarse argmin over the node table, then Newton on the tangency
        condition <p - gamma(s), tangent(s)> = 0.  Returns (s, mu, dist).
        """
        pts = np.atleast_2d(np.asarray(pts, float))
        full_nodes = np.concatenate(
            [self._gamma_nodes, self._gamma_nodes[::-1][1:] * np.array([-1.0, 1.0])]
        )
        full_s = np.concatenate([self._s_nodes, self.L - self._s_nodes[::-1][1:]])
        stride = max(1, len(full_nodes) // 1024)
        cand_s = full_s[::stride]
        cand = full_nodes[::stride]
        out_s = np.empty(len(pts))
        for lo in range(0, len(pts), 512):
            chunk = pts[lo : lo + 512]
            d2 = np.sum((chunk[:, None, :] - cand[None, :, :]) ** 2, axis=-1)
            out_s[lo : lo + 512] = cand_s[np.argmin(d2, axis=1)]
        s = out_s
        for _ in range(newton_iters):
            g = self.gamma(s)
            tvec = self.tangent(s)
            nvec = self.normal(s)
            diff = pts - g
            num = np.sum(diff * tvec, axis=-1)
            mu = np.sum(diff * nvec, axis=-1)
            den = 1.0 - self.kappa(s) * mu
            s = np.clip(s + num / np.where(np.abs(den) < 0.1, 0.1, den), 0.0, self.L)
        g = self.gamma(s)
        diff = pts - g
        mu = np.sum(diff * self.normal(s), axis=-1)
        dist = np.sqrt(np.sum(diff**2, axis=-1))
        return s, mu, dist


def build_curve(panels: int = 16384, bracket=(0.2, 40.0)) -> CurveSpec:
    """Lay out the upper arc and calibrate its half-length by a root-find.

    The tangent angle profile is fixed (flat bump curvature, quarter turn per
    half-arc); the single free parameter ell is chosen so the half-arc ends
    exactly on the symmetry axis u1 = 0, which closes the full curve.
    """
    ieta = _BumpIntegral()
    gl = np.polynomial.legendre.leggauss(8)

    def half_arc_endpoint_x(ell, n_panels):
        s_nodes, gamma_nodes = _integrate_half(ieta, gl, ell, n_panels)
        return gamma_nodes[-1, 0], (s_nodes, gamma_nodes)

    def residual(ell):
        x_end, _ = half_arc_endpoint_x(ell, 2048)
        return x_end

    ell = brentq(residual, bracket[0], bracket[1], xtol=1e-13, rtol=8.9e-16)
    x_end, (s_nodes, gamma_nodes) = half_arc_endpoint_x(ell, panels)
    amplitude = 0.5 * math.pi / (ell * ieta.total)
    max_kappa = amplitude * float(smooth.bump01(np.array(0.5)))
    return CurveSpec(
        ell=ell,
        amplitude=amplitude,
        closure_defect=abs(x_end),
        max_kappa=max_kappa,
        _ieta=ieta,
        _s_nodes=s_nodes,
        _gamma_nodes=gamma_nodes,
        _gl=gl,
    )


def _integrate_half(ieta, gl, ell, n_panels):
    """Gauss-Legendre prefix sums of (cos theta, sin theta) on [0, ell]."""
    nodes, weights = gl
    s_nodes = np.linspace(0.0, ell, n_panels + 1)
    a, b = s_nodes[:-1], s_nodes[1:]
    t = 0.5 * (b - a)[:, None] * (nodes[None, :] + 1.0) + a[:, None]
    th = 0.5 * math.pi * (1.0 + ieta(t.ravel() / ell) / ieta.total)
    th = th.reshape(t.shape)
    half = 0.5 * (b - a)
    dx = half * (np.cos(th) @ weights)
    dy = half * (np.sin(th) @ weights)
    gamma_nodes = np.empty((n_panels + 1, 2))
    gamma_nodes[0] = (2.0, 1.0)
    gamma_nodes[1:, 0] = 2.0 + np.cumsum(dx)
    gamma_nodes[1:, 1] = 1.0 + np.cumsum(dy)
    return s_nodes, gamma_nodes


# ---------------------------------------------------------------------------
# tube potential and the assembled global potential


@dataclass(frozen=True)
class TubePotential:
    """W = lam + mu kappa(s) near the arc, faded to the constant lam across
    the outer third of the tube so the global extension is smooth."""

    curve: CurveSpec
    lam: float
    eps: float

    def cutoff(self, mu):
        return 1.0 - smooth.smoothstep(2.0 * (np.abs(mu) / self.eps - 1.0 / 3.0))

    def cutoff_d(self, mu):
        arg = 2.0 * (np.abs(mu) / self.eps - 1.0 / 3.0)
        return -smooth.smoothstep_d(arg) * 2.0 * np.sign(mu) / self.eps

    def w(self, s, mu):
        return self.lam + mu * self.curve.kappa(s) * self.cutoff(mu)

    def grad(self, s, mu):
        """Euclidean gradient at gamma(s) + mu n(s), shape (..., 2)."""
        kap = self.curve.kappa(s)
        chi = self.cutoff(mu)
        w_s = mu * self.curve.kappa_prime(s) * chi
        w_mu = kap * (chi + mu * self.cutoff_d(mu))
        tvec = self.curve.tangent(s)
        nvec = self.curve.normal(s)
        metric = 1.0 - mu * kap
        return (w_s / metric)[..., None] * tvec + w_mu[..., None] * nvec


class _GlobalPotential:
    """Region-resolved evaluation of the assembled planar potential."""

    def __init__(self, rho: RhoSpec, curve: CurveSpec, lam: float, eps: float):
        self.rho = rho
        self.curve = curve
        self.lam = lam
        self.tube = TubePotential(curve, lam, eps)
        pts = curve._gamma_nodes
        self._bbox = (
            -float(np.max(np.abs(pts[:, 0]))) - eps - 0.1,
            float(np.max(np.abs(pts[:, 0]))) + eps + 0.1,
            float(np.min(pts[:, 1])) - eps - 0.1,
            float(np.max(pts[:, 1])) + eps + 0.1,
        )

    def _masks(self, u):
        in_right = (np.abs(u[..., 0] - 2.0) <= 1.0) & (np.abs(u[..., 1]) <= 1.0)
        in_left = (np.abs(u[..., 0] + 2.0) <= 1.0) & (np.abs(u[..., 1]) <= 1.0)
        return in_right, in_left

    def _near_arc(self, w):
        x0, x1, y0, y1 = self._bbox
        return (w[..., 0] >= x0) & (w[..., 0] <= x1) & (w[..., 1] >= y0) & (w[..., 1] <= y1)

    def w(self, u):
        u = np.asarray(u, float)
        shape = u.shape[:-1]
        flat = u.reshape(-1, 2)
        out = np.full(len(flat), self.lam)
        in_r, in_l = self._masks(flat)
        for mask, center in ((in_r, A_PLUS), (in_l, A_MINUS)):
            if np.any(mask):
                v = flat[mask] - center
                out[mask] = 2.0 * self.lam * self.rho.rho(np.sum(v**2, axis=-1))
        rest = ~(in_r | in_l)
        if np.any(rest):
            w = flat[rest].copy()
            w[:, 1] = np.abs(w[:, 1])
            near = self._near_arc(w)
            if np.any(near):
                s, mu, _ = self.curve.project(w[near])
                tube_vals = self.tube.w(s, mu)
                vals = out[rest]
                sub = vals[near]
                sub = np.where(np.abs(mu) <= self.tube.eps, tube_vals, sub)
                vals[near] = sub
                out[rest] = vals
        return out.reshape(shape)

    def grad(self, u):
        u = np.asarray(u, float)
        shape = u.shape
        flat = u.reshape(-1, 2)
        out = np.zeros_like(flat)
        in_r, in_l = self._masks(flat)
        for mask, center in ((in_r, A_PLUS), (in_l, A_MINUS)):
            if np.any(mask):
                v = flat[mask] - center
                out[mask] = 4.0 * self.lam * self.rho.drho(np.sum(v**2, axis=-1))[:, None] * v
        rest = ~(in_r | in_l)
        if np.any(rest):
            w = flat[rest].copy()
            signs = np.sign(w[:, 1])
            signs[signs == 0.0] = 1.0
            w[:, 1] = np.abs(w[:, 1])
            near = self._near_arc(w)
            if np.any(near):
                s, mu, _ = self.curve.project(w[near])
                g_tube = self.tube.grad(s, mu)
                g_tube[np.abs(mu) > self.tube.eps] = 0.0
                g = out[rest]
                sub = g[near]
                sub[:] = g_tube
                g[near] = sub
                g[:, 1] *= signs
                out[rest] = g
        return out.reshape(shape)

    def hess(self, u, h: float = 1e-5):
        u = np.asarray(u, float)
        flat = u.reshape(-1, 2)
        out = np.empty((len(flat), 2, 2))
        in_r, in_l = self._masks(flat)
        patch = in_r | in_l
        for mask, center in ((in_r, A_PLUS), (in_l, A_MINUS)):
            if np.any(mask):
                v = flat[mask] - center
                a = np.sum(v**2, axis=-1)
                d1 = self.rho.drho(a)
                d2 = self.rho.d2rho(a)
                out[mask] = 4.0 * self.lam * (
                    d1[:, None, None] * np.eye(2) + 2.0 * d2[:, None, None] * v[:, :, None] * v[:, None, :]
                )
        rest = ~patch
        if np.any(rest):
            w = flat[rest]
            H = np.empty((len(w), 2, 2))
            for i in range(2):
                e = np.zeros(2)
                e[i] = h
                H[:, :, i] = (self.grad(w + e) - self.grad(w - e)) / (2.0 * h)
            out[rest] = 0.5 * (H + np.swapaxes(H, 1, 2))
        return out.reshape(u.shape[:-1] + (2, 2))

    def as_potential(self) -> Potential:
        return Potential(
            name="counterexample",
            m=2,
            params={"lam": self.lam, "eps": self.tube.eps, **self.curve.shape_params()},
            zeros=(A_PLUS.copy(), A_MINUS.copy()),
            _w=self.w,
            _grad=self.grad,
            _hess=self.hess,
        )


# ---------------------------------------------------------------------------
# assembly


@dataclass(frozen=True)
class PeriodicConnection:
    """The assembled orbit and potential over one full period [0, T]."""

    lam: float
    t1: float
    t2: float
    t3: float
    T: float
    eps_tube: float
    times: np.ndarray
    u: np.ndarray
    v: np.ndarray
    rho: RhoSpec
    curve: CurveSpec
    segment: SegmentSolution
    _global: _GlobalPotential = field(repr=False)

    @cached_property
    def potential(self) -> Potential:
        return self._global.as_potential()

    @property
    def tube(self) -> TubePotential:
        return self._global.tube

    # phase-resolved orbit evaluation ---------------------------------------

    def orbit(self, x):
        """(u, v) at arbitrary times, vectorized; period-wrapped."""
        x = np.atleast_1d(np.asarray(x, float))
        x = np.mod(x, self.T)
        half = x >= 0.5 * self.T
        xr = np.where(half, x - 0.5 * self.T, x)
        u = np.empty((len(x), 2))
        v = np.empty((len(x), 2))

        ph_a = xr <= self.t2
        ph_b = (xr > self.t2) & (xr <= self.t3)
        ph_c = xr > self.t3

        if np.any(ph_a):
            st = self.segment.sol(xr[ph_a])
            u[ph_a, 0] = 2.0
            u[ph_a, 1] = st[0]
            v[ph_a, 0] = 0.0
            v[ph_a, 1] = st[1]
        if np.any(ph_b):
            s = xr[ph_b] - self.t2
            u[ph_b] = self.curve.gamma(s)
            v[ph_b] = self.curve.tangent(s)
        if np.any(ph_c):
            xi = np.clip(self.t2 + self.t3 - xr[ph_c], 0.0, self.t2)
            st = self.segment.sol(xi)
            u[ph_c, 0] = -2.0
            u[ph_c, 1] = st[0]
            v[ph_c, 0] = 0.0
            v[ph_c, 1] = -st[1]

        u[half] *= -1.0
        v[half] *= -1.0
        return u, v

    def orbit_w(self, x):
        """W(u(x)) using the phase decomposition (no projection needed)."""
        x = np.atleast_1d(np.asarray(x, float))
        xr = np.mod(x, 0.5 * self.T)
        out = np.full(len(x), self.lam)
        ph_a = xr <= self.t2
        ph_c = xr > self.t3
        if np.any(ph_a):
            y = self.segment.sol(xr[ph_a])[0]
            out[ph_a] = 2.0 * self.lam * self.rho.rho(y**2)
        if np.any(ph_c):
            xi = np.clip(self.t2 + self.t3 - xr[ph_c], 0.0, self.t2)
            y = self.segment.sol(xi)[0]
            out[ph_c] = 2.0 * self.lam * self.rho.rho(y**2)
        return out

    def orbit_grad(self, x):
        """grad W(u(x)) using the phase decomposition."""
        x = np.atleast_1d(np.asarray(x, float))
        x = np.mod(x, self.T)
        half = x >= 0.5 * self.T
        xr = np.where(half, x - 0.5 * self.T, x)
        g = np.zeros((len(x), 2))
        ph_a = xr <= self.t2
        ph_b = (xr > self.t2) & (xr <= self.t3)
        ph_c = xr > self.t3
        if np.any(ph_a):
            y = self.segment.sol(xr[ph_a])[0]
            g[ph_a, 1] = 4.0 * self.lam * self.rho.drho(y**2) * y
        if np.any(ph_b):
            s = xr[ph_b] - self.t2
            kap = self.curve.kappa(s)
            g[ph_b] = kap[:, None] * self.curve.normal(s)
        if np.any(ph_c):
            xi = np.clip(self.t2 + self.t3 - xr[ph_c], 0.0, self.t2)
            y = self.segment.sol(xi)[0]
            g[ph_c, 1] = 4.0 * self.lam * self.rho.drho(y**2) * y
        g[half] *= -1.0
        return g

    # diagnostics ------------------------------------------------------------

    def hamiltonian_series(self):
        return 0.5 * np.sum(self.v**2, axis=1) - self.orbit_w(self.times)

    def ode_residual(self) -> float:
        """sup |second difference of the sampled orbit - grad W(u)| with
        periodic wrap (the sample grid divides the period exactly)."""
        dt = self.times[1] - self.times[0]
        u = self.u[:-1]  # drop duplicated endpoint
        upp = (np.roll(u, -1, axis=0) - 2.0 * u + np.roll(u, 1, axis=0)) / dt**2
        g = self.orbit_grad(self.times[:-1])
        return float(np.max(np.abs(upp - g)))

    def report(self, tol: float = 1e-7) -> dict:
        check = verify_counterexample(self, tol)
        return check


def assemble(
    lam: float | None = None,
    segment_dt: float = 1e-3,
    sample_dt: float = 1e-3,
    curve_panels: int = 16384,
) -> PeriodicConnection:
    """Build the full periodic connection and run junction consistency checks."""
    lam = lambda_from_hamiltonian() if lam is None else float(lam)
    rho = build_rho()
    seg = solve_segment(lam, dt=segment_dt, rho=rho)
    curve = build_curve(panels=curve_panels)
    eps = min(0.1, lam / (2.0 * curve.max_kappa))

    t1, t2 = seg.t1, seg.t2
    t3 = t2 + curve.L
    T = 2.0 * (t2 + t3)
    glob = _GlobalPotential(rho, curve, lam, eps)

    n = int(round(T / sample_dt))
    times = (T / n) * np.arange(n + 1)

    pc = PeriodicConnection(
        lam=lam,
        t1=t1,
        t2=t2,
        t3=t3,
        T=T,
        eps_tube=eps,
        times=times,
        u=np.zeros((n + 1, 2)),
        v=np.zeros((n + 1, 2)),
        rho=rho,
        curve=curve,
        segment=seg,
        _global=glob,
    )
    u, v = pc.orbit(times)
    pc.u[:] = u
    pc.v[:] = v

    _junction_consistency(pc)
    return pc


def _junction_consistency(pc: PeriodicConnection, tol: float = 1e-8) -> None:
    """Square-patch and tube formulas must agree where both regions apply."""
    curve, lam, rho = pc.curve, pc.lam, pc.rho
    s = np.linspace(0.0, 0.05 * curve.ell, 40)
    mu = np.linspace(-pc.eps_tube, pc.eps_tube, 9)
    S, MU = np.meshgrid(s, mu, indexing="ij")
    pts = curve.gamma(S.ravel()) + MU.ravel()[:, None] * curve.normal(S.ravel())
    inside = (np.abs(pts[:, 0] - 2.0) <= 1.0) & (np.abs(pts[:, 1]) <= 1.0)
    if np.any(inside):
        v = pts[inside] - A_PLUS
        w_patch = 2.0 * lam * rho.rho(np.sum(v**2, axis=-1))
        w_tube = pc.tube.w(S.ravel()[inside], MU.ravel()[inside])
        worst = float(np.max(np.abs(w_patch - w_tube)))
        if worst > tol:
            raise ConstructionError(f"patch/tube junction mismatch {worst:.3e} exceeds {tol:g}")
    # patch boundary must already sit on the plateau (flat contact with the
    # constant background)
    edge = np.stack([np.linspace(1.0, 3.0, 101), np.ones(101)], axis=-1)
    v = edge - A_PLUS
    w_edge = 2.0 * lam * rho.rho(np.sum(v**2, axis=-1))
    if float(np.max(np.abs(w_edge - lam))) > tol:
        raise ConstructionError("square boundary is not on the plateau level")


def verify_counterexample(pc: PeriodicConnection, tol: float = 1e-7) -> dict:
    """Check the assembled orbit violates the scalar gradient bound while
    solving the system, and package the construction report."""
    P = pc.hamiltonian_series()
    defect = float(np.mean(P))
    spread = float(np.max(np.abs(P - 0.125)))
    residual = pc.ode_residual()
    u0, v0 = pc.orbit(np.array([0.0]))
    uh, _ = pc.orbit(np.array([0.5 * pc.T]))
    w0 = float(pc.potential.w(u0[0]))
    oscillation = float(np.max(np.linalg.norm(pc.u - pc.u[0], axis=1)))
    return {
        "lambda": pc.lam,
        "t1": pc.t1,
        "t2": pc.t2,
        "t3": pc.t3,
        "T": pc.T,
        "eps_tube": pc.eps_tube,
        "residual_max": residual,
        "modica_defect": defect,
        "modica_defect_spread": spread,
        "endpoint_start": [float(u0[0, 0]), float(u0[0, 1])],
        "endpoint_half": [float(uh[0, 0]), float(uh[0, 1])],
        "w_at_start": w0,
        "oscillation": oscillation,
        "liouville_violated": bool(defect > tol and oscillation > 1.0),
        "curve": pc.curve.shape_params(),
        "checks_pass": bool(spread <= tol and residual <= 1e-5),
    }
