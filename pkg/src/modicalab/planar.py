"""Planar stress-energy machinery.

For a solution of Lap u = grad W(u) on a plane domain, the stress-energy
tensor T is divergence-free, and its two divergence identities are exactly
the compatibility conditions for a scalar function U with prescribed Hessian

    D2U = [[ |u_x1|^2 - |u_x2|^2 + 2W ,  2 u_x1 . u_x2              ],
           [ 2 u_x1 . u_x2            ,  |u_x2|^2 - |u_x1|^2 + 2W ]]

so that Lap U = 4 W(u).  This module computes T and D2U from jets,
reconstructs U on grids by path integration, classifies its convexity
(equivalent to det D2U >= 0), and evaluates the Green boundary identity and
the radial monotonicity profiles that follow.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .estimates import HypothesisError
from .fields import ClosedFormField, GridField, Jet2, grid_jets, jet as field_jet
from .potentials import Potential

__all__ = [
    "UField",
    "MonotoneProfile",
    "stress_tensor",
    "stress_decomposition",
    "divergence_residual",
    "divergence_pair",
    "hessian_U",
    "compatibility_residual",
    "reconstruct_U",
    "convexity_status",
    "green_boundary_identity",
    "monotonicity_profile",
    "disk_integral",
]


# ---------------------------------------------------------------------------
# tensor algebra at a jet


def stress_tensor(jet: Jet2, p: Potential) -> np.ndarray:
    """The n x n stress-energy tensor at a jet:
    T = -(0.5|grad u|^2 + W) I + (u_xi . u_xj)."""
    du = jet.du  # (m, n)
    gram = du.T @ du
    scalar = 0.5 * jet.grad_sq() + float(p.w(jet.u))
    return gram - scalar * np.eye(jet.n)


def stress_decomposition(jet: Jet2, p: Potential) -> tuple[float, np.ndarray]:
    """The scalar and Gram-matrix parts whose sum is the stress tensor."""
    du = jet.du
    return -(0.5 * jet.grad_sq() + float(p.w(jet.u))), du.T @ du


def _tensor_fields(g: GridField, p: Potential):
    """Stress tensor entries over the interior nodes, as (ni, nj, 2, 2)."""
    jets = grid_jets(g, order=2)
    du = jets.du  # (ni, nj, m, 2)
    gram = np.einsum("...mi,...mj->...ij", du, du)
    w = np.asarray(p.w(jets.u))
    scalar = 0.5 * jets.grad_sq() + w
    T = gram - scalar[..., None, None] * np.eye(2)
    return jets, T


def divergence_residual(g: GridField, p: Potential, gate: float = 1e-5,
                        margin: float = 0.0) -> float:
    """sup-norm of the finite-difference divergence of the stress tensor over
    the deep interior.  The field must solve the system within `gate`.

    `margin` excludes nodes within that physical distance of the grid
    boundary: Dirichlet data that is not the trace of a globally smooth
    solution puts corner singularities into the field, and interior elliptic
    regularity only controls derivatives a fixed distance away from them.
    """
    if g.n != 2:
        raise ValueError("divergence_residual requires a planar grid")
    jets, T = _tensor_fields(g, p)
    resid = jets.laplacian() - np.asarray(p.grad(jets.u))
    worst = float(np.max(np.abs(resid)))
    if worst > gate:
        raise HypothesisError(f"field does not solve the system: residual {worst:.3e} > {gate:g}")
    h1, h2 = g.spacing
    div1 = (T[2:, 1:-1, 0, 0] - T[:-2, 1:-1, 0, 0]) / (2 * h1) + (
        T[1:-1, 2:, 0, 1] - T[1:-1, :-2, 0, 1]
    ) / (2 * h2)
    div2 = (T[2:, 1:-1, 1, 0] - T[:-2, 1:-1, 1, 0]) / (2 * h1) + (
        T[1:-1, 2:, 1, 1] - T[1:-1, :-2, 1, 1]
    ) / (2 * h2)
    if margin > 0.0:
        axes = g.axes()
        lo = [ax[0] + margin for ax in axes]
        hi = [ax[-1] - margin for ax in axes]
        xs = axes[0][2:-2]
        ys = axes[1][2:-2]
        keep = ((xs >= lo[0]) & (xs <= hi[0]))[:, None] & ((ys >= lo[1]) & (ys <= hi[1]))[None, :]
        if not np.any(keep):
            raise ValueError("margin leaves no measurement nodes")
        div1 = div1[keep]
        div2 = div2[keep]
    return float(max(np.max(np.abs(div1)), np.max(np.abs(div2))))


def divergence_pair(make_grid, p: Potential, h: float, gate: float = 1e-5,
                    margin: float = 0.0) -> dict:
    """Divergence residual at spacings h and h/2 plus their ratio; `make_grid`
    maps a spacing to a solution GridField (sampled or relaxed)."""
    r_h = divergence_residual(make_grid(h), p, gate, margin)
    r_h2 = divergence_residual(make_grid(h / 2.0), p, gate, margin)
    return {"h": h, "margin": margin, "residual_h": r_h, "residual_h2": r_h2,
            "ratio": r_h / r_h2 if r_h2 else math.inf}


# ---------------------------------------------------------------------------
# the auxiliary function U


def hessian_U(jet: Jet2, p: Potential) -> np.ndarray:
    """Prescribed Hessian of the auxiliary function U at a planar jet."""
    if jet.n != 2:
        raise ValueError("hessian_U requires a planar jet (n=2)")
    du = jet.du
    a = float(np.sum(du[:, 0] ** 2))
    b = float(np.sum(du[:, 1] ** 2))
    cross = 2.0 * float(np.sum(du[:, 0] * du[:, 1]))
    two_w = 2.0 * float(p.w(jet.u))
    return np.array([[a - b + two_w, cross], [cross, b - a + two_w]])


def _hessian_entry_fields(g: GridField, p: Potential):
    jets = grid_jets(g, order=2)
    du = jets.du
    a = np.sum(du[..., 0] ** 2, axis=-1)
    b = np.sum(du[..., 1] ** 2, axis=-1)
    cross = 2.0 * np.sum(du[..., 0] * du[..., 1], axis=-1)
    two_w = 2.0 * np.asarray(p.w(jets.u))
    return jets, a - b + two_w, cross, b - a + two_w


def compatibility_residual(g: GridField, p: Potential) -> float:
    """sup-norm of the two cross-derivative compatibility conditions
    (equivalently div T = 0) evaluated by finite differences."""
    jets, h11, h12, h22 = _hessian_entry_fields(g, p)
    h1, h2 = g.spacing
    r1 = (h11[1:-1, 2:] - h11[1:-1, :-2]) / (2 * h2) - (h12[2:, 1:-1] - h12[:-2, 1:-1]) / (2 * h1)
    r2 = (h22[2:, 1:-1] - h22[:-2, 1:-1]) / (2 * h1) - (h12[1:-1, 2:] - h12[1:-1, :-2]) / (2 * h2)
    return float(max(np.max(np.abs(r1)), np.max(np.abs(r2))))


def _cumtrapz(values: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Cumulative trapezoid along an axis, starting at zero."""
    v = np.moveaxis(values, axis, 0)
    out = np.zeros_like(v)
    out[1:] = np.cumsum(0.5 * (v[1:] + v[:-1]) * h, axis=0)
    return np.moveaxis(out, 0, axis)


@dataclass(frozen=True)
class UField:
    """Reconstructed auxiliary function on the interior nodes of a grid."""

    grid: GridField  # scalar field of U values
    gauge_index: tuple
    path_defect: float  # sup difference between the two integration orders
    laplacian_defect: float  # sup |Lap_h U - 4 W(u)| on the deep interior

    @property
    def values(self) -> np.ndarray:
        return self.grid.values[..., 0]


def reconstruct_U(g: GridField, p: Potential, gauge: tuple | None = None,
                  gate: float = 1e-4) -> UField:
    """Integrate the prescribed Hessian twice along axis paths to recover U
    on the interior nodes, gauged so U and grad U vanish at the gauge node.

    Path independence of the reconstruction (x1-then-x2 versus x2-then-x1) is
    the discrete form of the compatibility conditions; its defect is measured
    and reported rather than assumed.
    """
    jets, h11, h12, h22 = _hessian_entry_fields(g, p)
    resid = jets.laplacian() - np.asarray(p.grad(jets.u))
    worst = float(np.max(np.abs(resid)))
    if worst > gate:
        raise HypothesisError(f"field does not solve the system: residual {worst:.3e} > {gate:g}")
    h1, h2 = g.spacing
    ni, nj = h11.shape
    i0, j0 = (ni // 2, nj // 2) if gauge is None else gauge

    def integrate_from_gauge(d1, d2):
        """Potential field with gradient (d1, d2), zero at the gauge node,
        averaged over the two L-shaped path orders; returns (field, defect)."""
        p1 = _cumtrapz(d1, h1, axis=0)
        p1 -= p1[i0 : i0 + 1, :]
        p2 = _cumtrapz(d2, h2, axis=1)
        p2 -= p2[:, j0 : j0 + 1]
        path_a = p1[:, j0 : j0 + 1] + p2  # x1 first, then x2
        path_b = p2[i0 : i0 + 1, :] + p1  # x2 first, then x1
        return 0.5 * (path_a + path_b), float(np.max(np.abs(path_a - path_b)))

    ux1, defect1 = integrate_from_gauge(h11, h12)
    ux2, defect2 = integrate_from_gauge(h12, h22)
    u_field, defect3 = integrate_from_gauge(ux1, ux2)
    path_defect = max(defect1, defect2, defect3)

    lap = (u_field[2:, 1:-1] - 2 * u_field[1:-1, 1:-1] + u_field[:-2, 1:-1]) / h1**2 + (
        u_field[1:-1, 2:] - 2 * u_field[1:-1, 1:-1] + u_field[1:-1, :-2]
    ) / h2**2
    w_interior = np.asarray(p.w(jets.u))[1:-1, 1:-1]
    lap_defect = float(np.max(np.abs(lap - 4.0 * w_interior)))

    origin = g.node_position((1,) * g.n)
    grid = GridField(
        origin=origin,
        spacing=g.spacing,
        values=u_field[..., None],
        meta={"gauge_index": [int(i0), int(j0)], "content": "auxiliary-U"},
    )
    return UField(grid=grid, gauge_index=(int(i0), int(j0)),
                  path_defect=path_defect, laplacian_defect=lap_defect)


def convexity_status(jet: Jet2, p: Potential, tol: float = 1e-12) -> dict:
    """Convexity classification of U at a jet.

    Returns both det D2U and the margin 4W^2 - (|u_x1|^2-|u_x2|^2)^2
    - 4(u_x1.u_x2)^2 of the convexity inequality; they are the same quantity
    written two ways, and the verdict is convex iff nonnegative.
    """
    H = hessian_U(jet, p)
    det = float(np.linalg.det(H))
    du = jet.du
    d = float(np.sum(du[:, 0] ** 2) - np.sum(du[:, 1] ** 2))
    c = 2.0 * float(np.sum(du[:, 0] * du[:, 1]))
    w = float(p.w(jet.u))
    margin = 4.0 * w * w - d * d - c * c
    return {
        "det": det,
        "margin": margin,
        "convex": bool(margin >= -tol),
        "conformal_vacuum": bool(abs(w) <= tol and abs(d) <= tol and abs(c) <= tol),
    }


# ---------------------------------------------------------------------------
# quadrature, the Green identity, monotonicity profiles


def disk_integral(fn, center, r: float, n_r: int = 64, n_theta: int = 256) -> float:
    """Integral of a scalar density over the disk B(center, r): Gauss-Legendre
    in radius (weighted by radius) times a uniform trapezoid rule in angle."""
    if r <= 0.0:
        raise ValueError("radius must be positive")
    center = np.asarray(center, float)
    nodes, weights = np.polynomial.legendre.leggauss(n_r)
    radii = 0.5 * r * (nodes + 1.0)
    ang = np.linspace(0.0, 2.0 * math.pi, n_theta, endpoint=False)
    dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)  # (n_theta, 2)
    pts = center + radii[:, None, None] * dirs[None, :, :]  # (n_r, n_theta, 2)
    vals = np.asarray(fn(pts), float)
    angular = vals.mean(axis=1) * 2.0 * math.pi
    return float(0.5 * r * np.sum(weights * radii * angular))


def green_boundary_identity(f: ClosedFormField, p: Potential, center, R: float,
                            n_theta: int = 256, n_r: int = 64,
                            gate: float = 1e-5) -> dict:
    """Both sides of the Green identity for the auxiliary function:
    integral over B of 4W(u) equals R times the boundary integral of
    |u_tau|^2 - |u_nu|^2 + 2W(u)."""
    center = np.asarray(center, float)
    if f.n != 2:
        raise ValueError("green_boundary_identity requires a planar field")

    def density(pts):
        shape = pts.shape[:-1]
        flat = pts.reshape(-1, 2)
        return 4.0 * np.asarray(p.w(f.values(flat))).reshape(shape)

    lhs = disk_integral(density, center, R, n_r=n_r, n_theta=n_theta)

    ang = np.linspace(0.0, 2.0 * math.pi, n_theta, endpoint=False)
    worst_resid = 0.0
    integrand = np.empty(n_theta)
    for k, t in enumerate(ang):
        nu = np.array([math.cos(t), math.sin(t)])
        tau = np.array([-math.sin(t), math.cos(t)])
        jet = f.jet(center + R * nu)
        u_tau = jet.du @ tau
        u_nu = jet.du @ nu
        resid = np.max(np.abs(jet.laplacian() - np.asarray(p.grad(jet.u))))
        worst_resid = max(worst_resid, float(resid))
        integrand[k] = float(np.sum(u_tau**2) - np.sum(u_nu**2) + 2.0 * p.w(jet.u))
    if worst_resid > gate:
        raise HypothesisError(f"field does not solve the system on the boundary: {worst_resid:.3e}")
    rhs = R * R * float(integrand.mean() * 2.0 * math.pi)
    return {
        "lhs": lhs,
        "rhs": rhs,
        "defect": abs(lhs - rhs),
        "rule_order": n_r,
        "boundary_nodes": n_theta,
    }


@dataclass(frozen=True)
class MonotoneProfile:
    center: tuple
    radii: tuple
    values: tuple
    errors: tuple  # per-radius quadrature error estimates
    density: str

    def is_monotone(self, slack: float = 2.0) -> bool:
        v = np.asarray(self.values)
        e = np.asarray(self.errors)
        tol = slack * (e[1:] + e[:-1])
        return bool(np.all(np.diff(v) >= -tol))

    def to_csv(self, path) -> None:
        lines = ["r,M,quad_error_estimate"]
        for r, m, e in zip(self.radii, self.values, self.errors):
            lines.append(f"{r!r},{m!r},{e!r}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


_DENSITIES = ("potential", "laplacian_quadratic", "grad_sq")


def monotonicity_profile(density: str, f: ClosedFormField | None, p: Potential | None,
                         center, radii, n_r: int = 64, n_theta: int = 256) -> MonotoneProfile:
    """Radial profile M(r) = r^{-(n-1)} integral_{B(r)} density, n = 2.

    Densities: "potential" is W(u(x)) (monotone for solutions whose U is
    convex); "laplacian_quadratic" is Lap|x|^2 = 4 (profile exactly 4 pi r);
    "grad_sq" is |grad u|^2 for harmonic fields (monotone when |u|^2 is
    convex).
    """
    center = np.asarray(center, float)
    radii = tuple(float(r) for r in radii)
    if any(r <= 0 for r in radii) or list(radii) != sorted(set(radii)):
        raise ValueError("radii must be positive and strictly increasing")

    if density == "potential":
        if f is None or p is None:
            raise ValueError("density 'potential' needs a field and a potential")

        def fn(pts):
            shape = pts.shape[:-1]
            return np.asarray(p.w(f.values(pts.reshape(-1, 2)))).reshape(shape)

    elif density == "laplacian_quadratic":
        def fn(pts):
            return np.full(pts.shape[:-1], 4.0)

    elif density == "grad_sq":
        if f is None:
            raise ValueError("density 'grad_sq' needs a field")

        def fn(pts):
            shape = pts.shape[:-1]
            flat = pts.reshape(-1, 2)
            out = np.empty(len(flat))
            for i, x in enumerate(flat):
                out[i] = f.jet(x).grad_sq()
            return out.reshape(shape)

    else:
        raise ValueError(f"unknown density {density!r}; known: {', '.join(_DENSITIES)}")

    values, errors = [], []
    for r in radii:
        full = disk_integral(fn, center, r, n_r=n_r, n_theta=n_theta)
        coarse = disk_integral(fn, center, r, n_r=max(4, n_r // 2), n_theta=max(8, n_theta // 2))
        values.append(full / r)
        errors.append(abs(full - coarse) / r)
    return MonotoneProfile(
        center=tuple(float(c) for c in center),
        radii=radii,
        values=tuple(values),
        errors=tuple(errors),
        density=density,
    )


def identity_json(result: dict) -> str:
    return json.dumps(result, sort_keys=True)
