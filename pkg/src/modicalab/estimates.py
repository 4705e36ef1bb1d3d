"""Pointwise gradient-bound checkers.

Each checker evaluates one differential inequality (or the constants feeding
it) on sampled fields or trajectories and reports the worst margin found,
where margin = RHS - LHS, so nonnegative means the bound holds.  Constants
(kappa, mu, lambda, epsilon, S) are estimated by deterministic dense sampling,
with closed-form cross-checks living in the test suite.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.optimize import brentq

from . import smooth
from .dynamics import Trajectory, integrate, PhasePoint, shoot_heteroclinic
from .fields import GridField, Jet2, grid_jets
from .potentials import Potential, make_potential

__all__ = [
    "DefectReport",
    "HypothesisError",
    "DiagonalSystemConfig",
    "BallConfinementConstants",
    "ConvexWellConfig",
    "PhiBarrier",
    "modica_defect",
    "gl_pointwise_bound",
    "gl_bound_rhs",
    "pde_inequality_residual",
    "scalar_p_residual",
    "gl_p_residual",
    "diagonal_p_residual",
    "ode_phi_p_residual",
    "build_phi",
    "ode_bound_check",
    "speed_envelope_check",
    "diagonal_system_check",
    "ball_confinement_check",
    "convex_well_check",
    "polygon_confinement_check",
    "ball_samples",
]


class HypothesisError(ValueError):
    """A checker's standing hypothesis failed on the supplied data."""


# ---------------------------------------------------------------------------
# report plumbing


@dataclass(frozen=True)
class DefectReport:
    check_id: str
    samples: int
    worst_margin: float
    worst_point: list | None
    verdict: str  # "holds" | "violated" | "vacuous"
    tol: float
    constants: dict = dc_field(default_factory=dict)

    @classmethod
    def from_margins(cls, check_id, margins, points, tol, constants=None):
        margins = np.asarray(margins, float)
        if margins.size == 0:
            return cls(check_id, 0, math.inf, None, "vacuous", tol, constants or {})
        k = int(np.argmin(margins))
        worst = float(margins[k])
        pt = points[k] if points is not None else None
        if pt is not None:
            pt = [float(c) for c in np.atleast_1d(pt)]
        verdict = "holds" if worst >= -tol else "violated"
        return cls(check_id, int(margins.size), worst, pt, verdict, tol, constants or {})

    def to_dict(self) -> dict:
        return {
            "id": self.check_id,
            "samples": self.samples,
            "worst_margin": None if math.isinf(self.worst_margin) else self.worst_margin,
            "worst_point": self.worst_point,
            "verdict": self.verdict,
            "constants": self.constants,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# ---------------------------------------------------------------------------
# pointwise quantities


def modica_defect(jet: Jet2, p: Potential) -> float:
    """Gradient excess 0.5|grad u|^2 - W(u); positive means the scalar
    pointwise bound is violated at this jet."""
    return 0.5 * jet.grad_sq() - float(p.w(jet.u))


def gl_pointwise_bound(jet: Jet2) -> float:
    """Margin of the sharp Ginzburg-Landau bound 0.5|grad u|^2 <= (1-|u|^2)/2."""
    return 0.5 * (1.0 - float(np.sum(jet.u**2))) - 0.5 * jet.grad_sq()


def gl_bound_rhs(u, m: int | None = None) -> dict:
    """The three right-hand sides at a GL state, sharpest first.

    The sharp bound (1-|u|^2)/2, the ball-confinement bound C(1-|u|^2) with
    the derived C=1, and the diagonal-system bound (lam/2)(1-|u|^2) with the
    derived lam=2m+1.
    """
    u = np.asarray(u, float)
    m = u.shape[-1] if m is None else m
    q = 1.0 - np.sum(u**2, axis=-1)
    return {"sharp": 0.5 * q, "ball": 1.0 * q, "diagonal": 0.5 * (2 * m + 1) * q}


# ---------------------------------------------------------------------------
# differential-inequality residuals (finite differences of the P-field)


def scalar_p_residual(f, x, p: Potential, h: float = 1e-3) -> float:
    """Residual of the scalar P-function inequality at a point:
    |grad u|^2 Lap P - 0.5|grad P|^2 - 2 W'(u) grad u . grad P  (m=1 only).

    P = 0.5|grad u|^2 - W(u) is sampled on a 5-point star of spacing h around
    x, so the third derivatives of u enter only through differences of P.
    """
    from .fields import jet as field_jet

    x = np.atleast_1d(np.asarray(x, float))
    n = x.size

    def p_at(pt):
        j = field_jet(f, pt)
        return 0.5 * j.grad_sq() - float(p.w(j.u))

    center = field_jet(f, x)
    if center.m != 1:
        raise ValueError("scalar_p_residual requires a scalar field (m=1)")
    p0 = 0.5 * center.grad_sq() - float(p.w(center.u))
    lap = 0.0
    grad_p = np.zeros(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        plus, minus = p_at(x + e), p_at(x - e)
        lap += (plus - 2.0 * p0 + minus) / h**2
        grad_p[i] = (plus - minus) / (2.0 * h)
    grad_u = center.du[0]
    wprime = float(p.grad(center.u)[0])
    return center.grad_sq() * lap - 0.5 * float(np.sum(grad_p**2)) - 2.0 * wprime * float(
        np.dot(grad_u, grad_p)
    )


def _interior_p_laplacian(g: GridField, p_values: np.ndarray):
    """5-point Laplacian of a scalar field defined on the interior nodes of g;
    valid two nodes away from the original boundary."""
    h1, h2 = g.spacing
    core = p_values[1:-1, 1:-1]
    lap = (p_values[2:, 1:-1] - 2.0 * core + p_values[:-2, 1:-1]) / h1**2 + (
        p_values[1:-1, 2:] - 2.0 * core + p_values[1:-1, :-2]
    ) / h2**2
    return lap


def gl_p_residual(g: GridField, tol_solution: float = 1e-4) -> np.ndarray:
    """Residual array of Lap P >= 2(2Q+1) P for the GL system on a planar
    grid, with P = 0.5|grad u|^2 + Q and Q = (|u|^2-1)/2.

    Evaluated on the deep interior (two nodes in).  The true gap equals the
    squared-second-derivative term B, so values should be >= -O(h^2).
    """
    jets = grid_jets(g, order=2)
    u = jets.u
    q = 0.5 * (np.sum(u**2, axis=-1) - 1.0)
    gradsq = jets.grad_sq()
    gate = float(np.max(np.abs(jets.laplacian() - 2.0 * q[..., None] * u)))
    if gate > tol_solution:
        raise HypothesisError(f"grid is not a GL solution: residual {gate:.3e}")
    p_vals = 0.5 * gradsq + q
    lap_p = _interior_p_laplacian(g, p_vals)
    core = p_vals[1:-1, 1:-1]
    q_core = q[1:-1, 1:-1]
    return lap_p - 2.0 * (2.0 * q_core + 1.0) * core


@dataclass(frozen=True)
class DiagonalSystemConfig:
    """Data for the diagonal-matrix system D Lap u + [1 - <Au,u>] u = 0."""

    D: np.ndarray
    A: np.ndarray
    M: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "D", np.asarray(self.D, float))
        object.__setattr__(self, "A", np.asarray(self.A, float))
        if self.D.ndim == 1:
            object.__setattr__(self, "D", np.diag(self.D))

    @property
    def m(self) -> int:
        return self.D.shape[0]

    @property
    def nu(self) -> np.ndarray:
        return np.diag(self.D)

    @property
    def S(self) -> np.ndarray:
        """The symmetrized product A D^{-1} + D^{-1} A."""
        Dinv = np.diag(1.0 / self.nu)
        return self.A @ Dinv + Dinv @ self.A

    @property
    def a(self) -> float:
        return float(np.linalg.norm(self.A, 2))

    @property
    def c(self) -> float:
        return float(np.min(np.linalg.eigvalsh(0.5 * (self.A + self.A.T))))

    def validate(self, tol: float = 1e-12) -> None:
        if np.any(self.nu <= 0.0):
            raise HypothesisError("D must have positive diagonal entries")
        if not np.allclose(self.D, np.diag(self.nu)):
            raise HypothesisError("D must be diagonal")
        smin = float(np.min(np.linalg.eigvalsh(0.5 * (self.S + self.S.T))))
        if smin < -tol:
            raise HypothesisError(f"hypothesis (i) fails: min eig of sym(AD^-1 + D^-1A) = {smin:.3e}")
        if self.c <= tol:
            raise HypothesisError(f"hypothesis (ii) fails: coercivity constant c = {self.c:.3e} <= 0")

    def is_gradient(self, tol: float = 1e-12) -> bool:
        """Whether the system is the gradient of a potential, i.e. whether
        (A + A^T) D is a multiple of the identity."""
        G = (self.A + self.A.T) @ self.D
        mu = np.trace(G) / self.m
        return bool(np.max(np.abs(G - mu * np.eye(self.m))) <= tol)

    def lambda_multiplier(self, n_samples: int = 10_000) -> float:
        """Smallest multiplier making the P-function inequality close, by
        dense sampling of the ball |v|^2 <= M:
        lam = max [ (nu/2)<Sv,v> - <Av,v> + 1 + 2 a m M ] / c."""
        v = ball_samples(self.m, math.sqrt(self.M), n_samples)
        nu_max = float(np.max(self.nu))
        sv = np.einsum("ij,kj->ki", self.S, v)
        av = np.einsum("ij,kj->ki", self.A, v)
        expr = 0.5 * nu_max * np.sum(sv * v, axis=1) - np.sum(av * v, axis=1) + 1.0 + 2.0 * self.a * self.m * self.M
        return float(np.max(expr) / self.c)


def diagonal_p_residual(g: GridField, cfg: DiagonalSystemConfig, lam: float | None = None,
                        tol_solution: float = 1e-5) -> np.ndarray:
    """Residual array of Lap P >= B + <Su,u> P on the deep interior, for
    P = sum_j (nu_j/2)|grad u^j|^2 + (lam/2)(<Au,u> - 1)."""
    jets = grid_jets(g, order=2)
    u = jets.u
    au = np.einsum("ij,...j->...i", cfg.A, u)
    quad = np.sum(au * u, axis=-1)
    sys_resid = np.einsum("jk,...k->...j", cfg.D, jets.laplacian()) + (1.0 - quad)[..., None] * u
    gate = float(np.max(np.abs(sys_resid)))
    if gate > tol_solution:
        raise HypothesisError(f"grid does not solve the diagonal system: residual {gate:.3e}")
    lam = cfg.lambda_multiplier() if lam is None else float(lam)
    nu = cfg.nu
    gradsq_j = np.sum(jets.du**2, axis=-1)  # (ni, nj, m)
    p_vals = 0.5 * np.sum(nu * gradsq_j, axis=-1) + 0.5 * lam * (quad - 1.0)
    lap_p = _interior_p_laplacian(g, p_vals)
    b_term = np.sum(nu[:, None, None] * jets.d2u**2, axis=(-3, -2, -1))
    su = np.einsum("ij,...j->...i", cfg.S, u)
    h_factor = np.sum(su * u, axis=-1)
    core = slice(1, -1)
    return lap_p - b_term[core, core] - h_factor[core, core] * p_vals[core, core]


def ode_phi_p_residual(traj: Trajectory, barrier: "PhiBarrier", p: Potential) -> np.ndarray:
    """Residual array of P'' >= 2 phi_eps'(Q) P along a GL ODE trajectory,
    with P = 0.5|u'|^2 - W(u) + phi_eps(Q(u)), by second differences."""
    u, v = traj.u, traj.v
    q = 0.5 * (np.sum(u**2, axis=-1) - 1.0)
    p_series = 0.5 * np.sum(v**2, axis=-1) - p.w(u) + barrier.phi_eps(q)
    dt = traj.dt
    p_dd = (p_series[2:] - 2.0 * p_series[1:-1] + p_series[:-2]) / dt**2
    h = 2.0 * barrier.rho(6.0 * q[1:-1] + 1.0)
    return p_dd - h * p_series[1:-1]


_PDE_VARIANTS = ("scalar_P", "theorem0_P", "gl_P", "ode_phi_P")


def pde_inequality_residual(variant: str, **kw) -> float:
    """Worst-case residual of the chosen differential inequality.

    Dispatch by variant: scalar_P(f, x, p[, h]); theorem0_P(g, cfg[, lam]);
    gl_P(g); ode_phi_P(traj, barrier, p).  Nonnegative within tolerance
    certifies the inequality on the sampled set.
    """
    if variant == "scalar_P":
        return float(scalar_p_residual(kw["f"], kw["x"], kw["p"], kw.get("h", 1e-3)))
    if variant == "theorem0_P":
        return float(np.min(diagonal_p_residual(kw["g"], kw["cfg"], kw.get("lam"))))
    if variant == "gl_P":
        return float(np.min(gl_p_residual(kw["g"])))
    if variant == "ode_phi_P":
        return float(np.min(ode_phi_p_residual(kw["traj"], kw["barrier"], kw["p"])))
    raise ValueError(f"unknown variant {variant!r}; known: {', '.join(_PDE_VARIANTS)}")


# ---------------------------------------------------------------------------
# sampling helpers


def ball_samples(m: int, radius: float, n: int = 10_000) -> np.ndarray:
    """Deterministic dense sample of the closed ball |v| <= radius.

    Radial shells including points within 1e-4 of the boundary (where the
    extremal ratios of the estimates typically live) crossed with directions:
    a uniform circle grid for m = 2, a fixed-seed unit-vector cloud for
    m >= 3, and plain intervals for m = 1.
    """
    if m == 1:
        return np.linspace(-radius, radius, n)[:, None]
    n_shell = max(int(round(math.sqrt(n))), 8)
    radii = np.concatenate(
        [np.linspace(0.0, radius, n_shell), [radius * (1.0 - 1e-4), radius * (1.0 - 1e-3)]]
    )
    n_dirs = n_shell
    if m == 2:
        ang = np.linspace(0.0, 2.0 * math.pi, n_dirs, endpoint=False)
        dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    else:
        rng = np.random.default_rng(12345)
        dirs = rng.standard_normal((n_dirs, m))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return (radii[:, None, None] * dirs[None, :, :]).reshape(-1, m)


def _field_states(obj):
    """(u, grad_sq, points) triples from either a Trajectory or a GridField."""
    if isinstance(obj, Trajectory):
        u = obj.u
        gradsq = np.sum(obj.v**2, axis=-1)
        pts = obj.times[:, None]
        return u, gradsq, pts
    if isinstance(obj, GridField):
        jets = grid_jets(obj, order=2)
        ni, nj = jets.u.shape[:2]
        u = jets.u.reshape(ni * nj, -1)
        gradsq = jets.grad_sq().reshape(ni * nj)
        pts = jets.x.reshape(ni * nj, 2)
        return u, gradsq, pts
    raise TypeError(f"expected Trajectory or GridField, got {type(obj).__name__}")


# ---------------------------------------------------------------------------
# theorem checkers


def diagonal_system_check(cfg: DiagonalSystemConfig, g: GridField | None = None,
                          tol: float = 1e-7) -> tuple[float, DefectReport]:
    """Validate the diagonal-system hypotheses, compute the multiplier lambda,
    and (when a solution grid is supplied) check the gradient estimate
    sum (nu_j/2)|grad u^j|^2 <= (lam/2)(1 - <Au,u>) and confinement <Au,u> <= 1."""
    cfg.validate()
    lam = cfg.lambda_multiplier()
    constants = {
        "lambda": lam,
        "a": cfg.a,
        "c": cfg.c,
        "nu_max": float(np.max(cfg.nu)),
        "M": cfg.M,
        "gradient_system": cfg.is_gradient(),
    }
    if g is None:
        return lam, DefectReport("diagonal-system", 0, math.inf, None, "vacuous", tol, constants)
    jets = grid_jets(g, order=2)
    u = jets.u
    au = np.einsum("ij,...j->...i", cfg.A, u)
    quad = np.sum(au * u, axis=-1)
    sys_resid = np.einsum("jk,...k->...j", cfg.D, jets.laplacian()) + (1.0 - quad)[..., None] * u
    gate = float(np.max(np.abs(sys_resid)))
    if gate > 1e-4:
        raise HypothesisError(f"grid does not solve the diagonal system: residual {gate:.3e}")
    constants["solution_residual"] = gate
    gradsq_j = np.sum(jets.du**2, axis=-1)
    lhs = 0.5 * np.sum(cfg.nu * gradsq_j, axis=-1)
    margins = (0.5 * lam * (1.0 - quad) - lhs).ravel()
    conf = (1.0 - quad).ravel()
    pts = jets.x.reshape(-1, 2)
    all_margins = np.concatenate([margins, conf])
    all_pts = np.concatenate([pts, pts])
    constants["confinement_worst"] = float(np.min(conf))
    report = DefectReport.from_margins("diagonal-system", all_margins, all_pts, tol, constants)
    return lam, report


@dataclass(frozen=True)
class BallConfinementConstants:
    R: float
    M: float
    mu: float
    kappa: float

    @property
    def C(self) -> float:
        return 0.5 * (self.kappa + self.mu)


def ball_confinement_check(p: Potential, obj, R: float, M: float | None = None,
                           tol: float = 1e-7, n_samples: int = 10_000):
    """Constants and margins for the ball-confinement gradient estimate
    0.5|grad u|^2 <= C (R^2 - |u|^2), C = (kappa + mu)/2.

    kappa is the smallest sampled constant with u.grad W >= kappa(|u|^2 - R^2)
    on |u| <= R; mu bounds the negative part of the Hessian spectrum on
    |u|^2 <= M.  The standing hypothesis u.grad W > 0 for |u| > R is
    validated on shells |u| in (R, R+1] and raises on failure.
    """
    M = R * R if M is None else float(M)
    outside = ball_samples(p.m, R + 1.0, n_samples)
    norms = np.linalg.norm(outside, axis=1)
    mask = norms > R * (1.0 + 1e-9)
    radial = np.sum(outside * p.grad(outside), axis=-1)
    bad = mask & (radial <= 0.0)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise HypothesisError(
            f"condition ball fails at u={outside[k]} (u.grad W = {radial[k]:.3e} <= 0)"
        )

    inside = ball_samples(p.m, R, n_samples)
    radial_in = np.sum(inside * p.grad(inside), axis=-1)
    denom = np.sum(inside**2, axis=-1) - R * R
    neg = radial_in < 0.0
    kappa = float(np.max(radial_in[neg] / denom[neg])) if np.any(neg) else tol

    hess_samples = ball_samples(p.m, math.sqrt(M), n_samples)
    eigmin = np.min(np.linalg.eigvalsh(p.hess(hess_samples)), axis=-1)
    mu = max(0.0, -float(np.min(eigmin)))

    consts = BallConfinementConstants(R=R, M=M, mu=mu, kappa=kappa)
    constants = {"R": R, "M": M, "mu": mu, "kappa": kappa, "C": consts.C}
    if obj is None:
        return consts, DefectReport("ball-confinement", 0, math.inf, None, "vacuous", tol, constants)
    u, gradsq, pts = _field_states(obj)
    unorm2 = np.sum(u**2, axis=-1)
    margins = consts.C * (R * R - unorm2) - 0.5 * gradsq
    confinement = R * R - unorm2
    constants["confinement_worst"] = float(np.min(confinement))
    all_margins = np.concatenate([margins, confinement])
    all_pts = np.concatenate([pts, pts])
    report = DefectReport.from_margins("ball-confinement", all_margins, all_pts, tol, constants)
    return consts, report


@dataclass(frozen=True)
class ConvexWellConfig:
    """Convexity region F = {lambda_min(D^2 W) >= 0}, the potential floor
    eps = inf W outside F, and the slope bound S = sup |grad u|^2 outside F."""

    eps: float
    S: float
    n: int
    boundary_points: tuple = ()

    @property
    def condition(self) -> bool:
        return 0.0 < self.S < 2.0 * self.eps / self.n


def _convexity_floor_1d(p: Potential, lo: float, hi: float, n_grid: int) -> tuple[float, tuple]:
    """inf W over the nonconvexity set {W'' < 0} for a scalar potential,
    with the set's boundary located by root-finding on W''."""
    grid = np.linspace(lo, hi, n_grid)
    hess = p.hess(grid[:, None])[:, 0, 0]
    w_vals = p.w(grid[:, None])
    outside = hess < 0.0
    if not np.any(outside):
        return math.inf, ()
    best = float(np.min(w_vals[outside]))
    roots = []
    sign_change = np.nonzero(np.diff(np.signbit(hess)))[0]
    for k in sign_change:
        root = brentq(lambda t: float(p.hess(np.array([t]))[0, 0]), grid[k], grid[k + 1], xtol=1e-14)
        roots.append(root)
        best = min(best, float(p.w(np.array([root]))))
    return best, tuple(roots)


def convex_well_check(p: Potential, obj=None, box: float = 2.0, n_grid: int = 4001,
                      tol: float = 1e-7):
    """Constants and margins for the convex-well estimate
    (eps/S)|grad u|^2 <= W, valid when 0 < S < 2 eps / n."""
    if p.m == 1:
        eps, boundary = _convexity_floor_1d(p, -box, box, n_grid)
    else:
        samples = ball_samples(p.m, box, n_grid)
        eigmin = np.min(np.linalg.eigvalsh(p.hess(samples)), axis=-1)
        outside = eigmin < 0.0
        eps = float(np.min(p.w(samples[outside]))) if np.any(outside) else math.inf
        boundary = ()
    if obj is None:
        cfg = ConvexWellConfig(eps=eps, S=0.0, n=1, boundary_points=boundary)
        return cfg, DefectReport(
            "convex-well", 0, math.inf, None, "vacuous", tol,
            {"eps": eps, "S": 0.0, "note": "no field supplied"},
        )
    u, gradsq, pts = _field_states(obj)
    n_dim = 1 if isinstance(obj, Trajectory) else obj.n
    eigmin_u = np.min(np.linalg.eigvalsh(p.hess(u)), axis=-1)
    outside = eigmin_u < 0.0
    S = float(np.max(gradsq[outside])) if np.any(outside) else 0.0
    cfg = ConvexWellConfig(eps=eps, S=S, n=n_dim, boundary_points=boundary)
    constants = {
        "eps": eps if math.isfinite(eps) else None,
        "S": S,
        "n": n_dim,
        "condition_2eps_over_n": (2.0 * eps / n_dim) if math.isfinite(eps) else None,
        "condition_met": cfg.condition,
    }
    if not np.any(outside) or S == 0.0:
        constants["note"] = "constant expected"
        return cfg, DefectReport("convex-well", int(u.shape[0]), math.inf, None, "vacuous", tol, constants)
    if not cfg.condition:
        constants["note"] = "hypothesis S < 2 eps / n fails; estimate not asserted"
        return cfg, DefectReport("convex-well", int(u.shape[0]), math.inf, None, "vacuous", tol, constants)
    margins = np.asarray(p.w(u)) - (eps / S) * gradsq
    report = DefectReport.from_margins("convex-well", margins, pts, tol, constants)
    return cfg, report


def polygon_confinement_check(vertices, n_samples: int = 100, seed: int = 0,
                              tol: float = 1e-12) -> DefectReport:
    """For the product potential with wells at the polygon's vertices, check
    <grad W(u), r> > 0 at exterior samples beyond each edge (outward normal r).
    """
    verts = np.asarray(vertices, float)
    N = len(verts)
    if N < 3:
        raise HypothesisError("need at least three vertices")
    center = verts.mean(axis=0)
    ang = np.arctan2(verts[:, 1] - center[1], verts[:, 0] - center[0])
    order = np.argsort(ang)
    verts = verts[order]
    cross = []
    for i in range(N):
        a, b, c = verts[i], verts[(i + 1) % N], verts[(i + 2) % N]
        e1, e2 = b - a, c - b
        cross.append(e1[0] * e2[1] - e1[1] * e2[0])
    cross = np.asarray(cross)
    if not (np.all(cross > 0.0) or np.all(cross < 0.0)):
        raise HypothesisError("vertices do not form a convex polygon")

    p = make_potential("polygon_product", vertices=verts.tolist())
    rng = np.random.default_rng(seed)
    pts = center + rng.uniform(-3.0, 3.0, size=(n_samples, 2)) * (
        1.0 + np.max(np.linalg.norm(verts - center, axis=1))
    )
    margins = []
    points = []
    hyp_count = 0
    for i in range(N):
        a, b = verts[i], verts[(i + 1) % N]
        edge = b - a
        r = np.array([edge[1], -edge[0]])
        r /= np.linalg.norm(r)
        if np.dot(r, center - a) > 0:
            r = -r
        side = (pts - a) @ r
        mask = side > 1e-12
        hyp_count += int(np.sum(mask))
        if np.any(mask):
            gw = p.grad(pts[mask])
            margins.append(gw @ r)
            points.append(pts[mask])
    if hyp_count == 0:
        return DefectReport("polygon-confinement", 0, math.inf, None, "vacuous", tol, {})
    margins = np.concatenate(margins)
    points = np.concatenate(points)
    return DefectReport.from_margins(
        "polygon-confinement", margins, points, tol, {"vertices": verts.tolist()}
    )


# ---------------------------------------------------------------------------
# the scalar GL ODE barrier and bounds


@dataclass(frozen=True)
class PhiBarrier:
    """Mollified barrier phi_eps(s) = integral_0^s rho_eps(6t+1) dt and its
    uniform limit phi, used to certify the Hamiltonian bound H <= 1/12.

    rho_eps rounds the corner of t -> max(t, eps): identically eps below 0,
    identically t above 2 eps, C-infinity and nondecreasing in between, and
    always >= t.  Integrating rho_eps' = smoothstep gives exact junctions.
    """

    eps: float

    def __post_init__(self):
        if not 0.0 < self.eps <= 1.0 / 12.0:
            raise ValueError("eps must lie in (0, 1/12]")

    # -- rho and its antiderivative ------------------------------------------

    def rho(self, t):
        t = np.asarray(t, float)
        e = self.eps
        y = np.clip(t / (2.0 * e), 0.0, 1.0)
        mid = e + 2.0 * e * smooth.smoothstep_integral(y)
        return np.where(t <= 0.0, e, np.where(t >= 2.0 * e, t, mid))

    def _rho_antiderivative(self, x):
        """R(x) = integral_0^x rho_eps, closed form outside the blend and
        Gauss-Legendre inside it."""
        x = np.asarray(x, float)
        e = self.eps
        nodes, weights = np.polynomial.legendre.leggauss(32)
        xc = np.clip(x, 0.0, 2.0 * e)
        t = 0.5 * xc[..., None] * (nodes + 1.0)
        blend = 0.5 * xc * ((2.0 * e * smooth.smoothstep_integral(t / (2.0 * e))) @ weights)
        r_mid = e * xc + blend
        r2e = self._r2e
        return np.where(
            x <= 0.0, e * x, np.where(x >= 2.0 * e, r2e + 0.5 * (x**2 - 4.0 * e**2), r_mid)
        )

    @property
    def _r2e(self) -> float:
        e = self.eps
        nodes, weights = np.polynomial.legendre.leggauss(32)
        t = e * (nodes + 1.0)
        return float(2.0 * e * e + e * ((2.0 * e * smooth.smoothstep_integral(t / (2.0 * e))) @ weights))

    # -- the barrier and its limit -------------------------------------------

    def phi_eps(self, s):
        s = np.asarray(s, float)
        r1 = self._rho_antiderivative(np.asarray(1.0))
        return (self._rho_antiderivative(6.0 * s + 1.0) - r1) / 6.0

    @staticmethod
    def phi(s):
        s = np.asarray(s, float)
        return np.where(s >= -1.0 / 6.0, 3.0 * s**2 + s, -1.0 / 12.0)

    def phi_prime(self, s):
        return self.rho(6.0 * np.asarray(s, float) + 1.0)

    def sup_deviation(self, n: int = 2001) -> float:
        s = np.linspace(-0.5, 0.0, n)
        return float(np.max(np.abs(self.phi_eps(s) - self.phi(s))))

    def validate(self, n: int = 2001, tol: float = 1e-10) -> dict:
        """Check every structural property the barrier is used for."""
        t = np.linspace(-1.0, 1.0, n)
        rho = self.rho(t)
        below = float(np.min(rho - t))
        s = np.linspace(-0.5, 0.0, n)
        pe = self.phi_eps(s)
        upper = float(np.min((3.0 * s**2 + s) - pe))
        under_limit = float(np.min(self.phi(s) - pe))
        increasing = float(np.min(np.diff(pe)))
        second = np.diff(pe, 2) / (s[1] - s[0]) ** 2
        out = {
            "rho_floor": below,
            "upper_gap": upper,
            "limit_gap": under_limit,
            "min_increment": increasing,
            "min_second_difference": float(np.min(second)),
            "sup_deviation": self.sup_deviation(n),
            "plateau_left_exact": float(self.rho(np.asarray(-0.5)) - self.eps),
            "plateau_right_exact": float(self.rho(np.asarray(3.0 * self.eps)) - 3.0 * self.eps),
        }
        # dividing second differences by h^2 amplifies value roundoff by 1/h^2,
        # so the convexity gate must scale with it.
        curv_floor = tol + 64.0 * np.finfo(float).eps / (s[1] - s[0]) ** 2
        bad = below < -tol or upper < -tol or under_limit < -tol or increasing <= 0.0
        if bad or out["min_second_difference"] < -curv_floor:
            raise HypothesisError(f"barrier validation failed: {out}")
        return out


def build_phi(eps: float) -> PhiBarrier:
    return PhiBarrier(eps=float(eps))


def _require_gl(p: Potential, u: np.ndarray, tol: float = 1e-10) -> None:
    q = np.sum(np.atleast_2d(u) ** 2, axis=-1)
    ref = 0.25 * (q - 1.0) ** 2
    dev = float(np.max(np.abs(np.asarray(p.w(u)) - ref)))
    if dev > tol:
        raise HypothesisError(f"potential does not match the GL form on the trajectory (dev {dev:.3e})")


def ode_bound_check(traj: Trajectory, p: Potential, tol: float = 1e-7) -> DefectReport:
    """Hamiltonian bounds for the GL ODE: pointwise
    0.5|u'|^2 <= |u|^2 sqrt(W) when |u|^2 >= 2/3 and <= W + 1/12 otherwise;
    globally H <= 1/12, refined to (1/4)(1-S)(3S-1) when S = sup|u|^2 > 2/3."""
    u, v = traj.u, traj.v
    _require_gl(p, u)
    unorm2 = np.sum(u**2, axis=-1)
    kin = 0.5 * np.sum(v**2, axis=-1)
    w = np.asarray(p.w(u))
    sqrt_w = np.sqrt(np.maximum(w, 0.0))
    upper = np.where(unorm2 >= 2.0 / 3.0, unorm2 * sqrt_w, w + 1.0 / 12.0)
    margins = upper - kin
    H = float(np.max(kin - w))
    S = float(np.max(unorm2))
    constants = {"H": H, "S": S, "H_bound": 1.0 / 12.0}
    h_margins = [1.0 / 12.0 - H]
    if S > 2.0 / 3.0:
        refined = 0.25 * (1.0 - S) * (3.0 * S - 1.0)
        constants["refined_bound"] = refined
        h_margins.append(refined - H)
    all_margins = np.concatenate([margins, np.asarray(h_margins)])
    pts = np.concatenate([traj.times[:, None], np.zeros((len(h_margins), 1))])
    return DefectReport.from_margins("ode-hamiltonian", all_margins, pts, tol, constants)


def speed_envelope_check(R_grid=None, dt: float = 1e-3, tol: float = 5e-7) -> DefectReport:
    """Attainment of the kinetic-energy lower envelope for the scalar/planar
    GL ODE: max(circular-orbit speed, heteroclinic speed) at modulus r equals
    r^2 sqrt(W) for r^2 >= 1/3 and W for r^2 <= 1/3.

    Circular orbits contribute 0.5 r^2 (1 - r^2) at their own modulus
    (measured from integrated trajectories); the heteroclinic contributes
    its equipartition speed W at every modulus it crosses.
    """
    from .dynamics import orbit_family

    R_grid = np.sqrt(np.linspace(0.05, 0.95, 19)) if R_grid is None else np.asarray(R_grid, float)
    gl = make_potential("ginzburg_landau", m=2)
    dw = make_potential("double_well")
    het = shoot_heteroclinic(dw, -1.0, 1.0, dt=dt)
    het_u = het.u[:, 0]
    het_kin = 0.5 * het.v[:, 0] ** 2
    order = np.argsort(np.abs(het_u))
    het_mod = np.abs(het_u)[order]
    het_kin = het_kin[order]

    margins = []
    points = []
    for R in R_grid:
        fam = orbit_family(float(R))
        # Circular orbits with R^2 > 2/3 are radially unstable (the linearized
        # growth rate is sqrt(6R^2 - 4)), so roundoff escapes over a full slow
        # period.  The orbit speed is constant in time, so a short window
        # measures the kinetic maximum just as well.
        span = min(fam.period, 6.0)
        steps = int(round(span / dt))
        traj = integrate(gl, fam.start_state(), dt, steps, drift_tol=1e-6)
        measured_orbit = float(np.max(0.5 * np.sum(traj.v**2, axis=-1)))
        measured_het = float(np.interp(R, het_mod, het_kin))
        envelope = max(measured_orbit, measured_het)
        w = 0.25 * (R * R - 1.0) ** 2
        bound = R * R * math.sqrt(w) if R * R >= 1.0 / 3.0 else w
        margins.append(envelope - bound)
        points.append([R])
    constants = {"R_grid": [float(r) for r in R_grid]}
    report = DefectReport.from_margins("speed-envelope", np.asarray(margins), np.asarray(points), tol, constants)
    # attainment: the envelope not only dominates but matches the bound
    worst_match = float(np.max(np.abs(np.asarray(margins))))
    constants["worst_attainment_gap"] = worst_match
    if worst_match > 1e-4:
        return DefectReport(report.check_id, report.samples, -worst_match, None, "violated", tol, constants)
    return DefectReport(report.check_id, report.samples, report.worst_margin, report.worst_point,
                        report.verdict, tol, constants)
