"""Potential catalog: W together with analytic gradient and Hessian.

All evaluators are vectorized over a trailing value axis of length m, so a
single call can score 10^4 sample points.  Consistency between the three
returned objects is enforced by `fd_consistency`, which every catalog entry
must pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "Potential",
    "RadialParams",
    "NotRadial",
    "make_potential",
    "fd_consistency",
    "radial_parameters",
    "convexity_region_probe",
    "POTENTIAL_IDS",
]


@dataclass(frozen=True)
class Potential:
    """A smooth potential W: R^m -> R with its first two derivatives.

    w, grad, hess accept arrays of shape (..., m) and return shapes (...),
    (..., m) and (..., m, m) respectively.
    """

    name: str
    m: int
    params: dict
    zeros: tuple
    _w: Callable
    _grad: Callable
    _hess: Callable

    def w(self, u):
        return self._w(self._check(u))

    def grad(self, u):
        return self._grad(self._check(u))

    def hess(self, u):
        return self._hess(self._check(u))

    def eval(self, u):
        """(W, grad W, D2 W) at a single point."""
        u = self._check(u)
        if u.shape != (self.m,):
            raise ValueError(f"eval expects a single point of R^{self.m}")
        return float(self._w(u)), self._grad(u), self._hess(u)

    def _check(self, u):
        u = np.asarray(u, float)
        if u.ndim == 0 and self.m == 1:
            u = u[None]
        if u.shape[-1] != self.m:
            raise ValueError(f"{self.name}: expected trailing axis of length {self.m}")
        return u


def _make_double_well():
    def w(u):
        return 0.25 * (u[..., 0] ** 2 - 1.0) ** 2

    def grad(u):
        return (u[..., :1] ** 2 - 1.0) * u[..., :1]

    def hess(u):
        return (3.0 * u[..., 0] ** 2 - 1.0)[..., None, None]

    return Potential(
        "double_well", 1, {}, (np.array([-1.0]), np.array([1.0])), w, grad, hess
    )


def _make_ginzburg_landau(m=2):
    m = int(m)
    if m < 1:
        raise ValueError("ginzburg_landau needs m >= 1")

    def w(u):
        return 0.25 * (np.sum(u**2, axis=-1) - 1.0) ** 2

    def grad(u):
        q = np.sum(u**2, axis=-1) - 1.0
        return q[..., None] * u

    def hess(u):
        q = np.sum(u**2, axis=-1) - 1.0
        eye = np.eye(m)
        return q[..., None, None] * eye + 2.0 * u[..., :, None] * u[..., None, :]

    zeros = tuple(np.eye(m)[i] for i in range(m)) + (np.eye(m)[0] * -1.0,)
    return Potential("ginzburg_landau", m, {"m": m}, zeros, w, grad, hess)


def _make_n_well(N=3):
    N = int(N)
    if N < 1:
        raise ValueError("n_well needs N >= 1")

    def _z(u):
        return u[..., 0] + 1j * u[..., 1]

    def w(u):
        z = _z(u)
        return np.abs(z**N - 1.0) ** 2

    def grad(u):
        z = _z(u)
        # Wirtinger: dW/dz = N z^(N-1) (conj(z)^N - 1); real gradient = (2 Re, -2 Im)
        g = N * z ** (N - 1) * (np.conj(z) ** N - 1.0)
        return np.stack([2.0 * g.real, -2.0 * g.imag], axis=-1)

    def hess(u):
        z = _z(u)
        h = N * (N - 1) * z ** (N - 2) * (np.conj(z) ** N - 1.0) if N >= 2 else np.zeros_like(z)
        k = N**2 * np.abs(z) ** (2 * (N - 1))
        wxx = 2.0 * k + 2.0 * h.real
        wyy = 2.0 * k - 2.0 * h.real
        wxy = -2.0 * h.imag
        out = np.empty(u.shape[:-1] + (2, 2))
        out[..., 0, 0] = wxx
        out[..., 1, 1] = wyy
        out[..., 0, 1] = wxy
        out[..., 1, 0] = wxy
        return out

    zeros = tuple(
        np.array([math.cos(2 * math.pi * k / N), math.sin(2 * math.pi * k / N)])
        for k in range(N)
    )
    return Potential("n_well", 2, {"N": N}, zeros, w, grad, hess)


def _regular_polygon(N, radius=1.0):
    return np.array(
        [[radius * math.cos(2 * math.pi * k / N), radius * math.sin(2 * math.pi * k / N)] for k in range(N)]
    )


def _make_polygon_product(vertices=None):
    verts = _regular_polygon(3) if vertices is None else np.atleast_2d(np.asarray(vertices, float))
    if verts.shape[1] != 2 or len(verts) < 2:
        raise ValueError("polygon_product needs >= 2 planar vertices")
    N = len(verts)

    def _pieces(u):
        d = u[..., None, :] - verts  # (..., N, 2)
        p = np.sum(d**2, axis=-1)  # (..., N)
        return d, p

    def w(u):
        _, p = _pieces(u)
        return np.prod(p, axis=-1)

    def _partials(p):
        # prod over j != i, computed stably without dividing by zero factors
        full = np.ones(p.shape[:-1] + (N,))
        for i in range(N):
            others = [j for j in range(N) if j != i]
            full[..., i] = np.prod(p[..., others], axis=-1)
        return full

    def grad(u):
        d, p = _pieces(u)
        pr = _partials(p)  # (..., N)
        return np.sum(2.0 * d * pr[..., None], axis=-2)

    def hess(u):
        d, p = _pieces(u)
        pr = _partials(p)
        out = 2.0 * np.sum(pr, axis=-1)[..., None, None] * np.eye(2)
        for i in range(N):
            for k in range(N):
                if i == k:
                    continue
                others = [j for j in range(N) if j != i and j != k]
                pik = np.prod(p[..., others], axis=-1) if others else np.ones(p.shape[:-1])
                out = out + 4.0 * pik[..., None, None] * d[..., i, :, None] * d[..., k, None, :]
        return out

    zeros = tuple(verts[i].copy() for i in range(N))
    return Potential("polygon_product", 2, {"vertices": verts.tolist()}, zeros, w, grad, hess)


def _make_quadratic(m=2):
    m = int(m)

    def w(u):
        return 0.5 * np.sum(u**2, axis=-1)

    def grad(u):
        return u.copy()

    def hess(u):
        return np.broadcast_to(np.eye(m), u.shape[:-1] + (m, m)).copy()

    return Potential("quadratic", m, {"m": m}, (np.zeros(m),), w, grad, hess)


def _make_zero(m=2):
    """W = 0: solutions are harmonic maps, the vacuum case of every identity."""
    m = int(m)

    def w(u):
        return np.zeros(u.shape[:-1])

    def grad(u):
        return np.zeros_like(u)

    def hess(u):
        return np.zeros(u.shape[:-1] + (m, m))

    return Potential("zero", m, {"m": m}, (), w, grad, hess)


POTENTIAL_IDS = ("double_well", "ginzburg_landau", "n_well", "polygon_product", "quadratic", "zero")


def make_potential(name: str, **params) -> Potential:
    if name == "double_well":
        return _make_double_well()
    if name == "ginzburg_landau":
        return _make_ginzburg_landau(**params)
    if name == "n_well":
        return _make_n_well(**params)
    if name == "polygon_product":
        return _make_polygon_product(**params)
    if name == "quadratic":
        return _make_quadratic(**params)
    if name == "zero":
        return _make_zero(**params)
    raise ValueError(f"unknown potential id {name!r}; known ids: {', '.join(POTENTIAL_IDS)}")


def fd_consistency(p: Potential, u, h: float = 1e-5) -> float:
    """Worst relative error between analytic derivatives and central differences.

    Gradient is checked against differences of W, the Hessian against
    differences of the gradient.  Relative to the larger of the two scales,
    floored at 1 so that zero derivatives do not blow up the quotient.
    """
    u = np.atleast_1d(np.asarray(u, float))
    m = p.m
    g_fd = np.empty(m)
    h_fd = np.empty((m, m))
    for i in range(m):
        e = np.zeros(m)
        e[i] = h
        g_fd[i] = (p.w(u + e) - p.w(u - e)) / (2 * h)
        h_fd[:, i] = (p.grad(u + e) - p.grad(u - e)) / (2 * h)
    g = p.grad(u)
    H = p.hess(u)
    scale_g = max(1.0, float(np.max(np.abs(g))), float(np.max(np.abs(g_fd))))
    scale_h = max(1.0, float(np.max(np.abs(H))), float(np.max(np.abs(h_fd))))
    err_g = float(np.max(np.abs(g - g_fd))) / scale_g
    err_h = float(np.max(np.abs(H - h_fd))) / scale_h
    return max(err_g, err_h)


@dataclass(frozen=True)
class RadialParams:
    """Constants of a potential that is radial about the origin on a sphere
    |u| = R: the level lambda = W, and mu with grad W = -mu u there."""

    R: float
    lam: float
    mu: float
    degenerate: bool
    worst_deviation: float


@dataclass(frozen=True)
class NotRadial:
    R: float
    worst_deviation: float
    reason: str


def radial_parameters(p: Potential, R: float, tol: float = 1e-9, n_dirs: int = 64):
    """Probe radial structure of W on the sphere |u| = R.

    Samples directions in the plane of the first two coordinates (just +-R
    when m = 1), checks that W is constant and grad W is antiparallel to u
    with a constant ratio, and returns the fitted (lambda, mu) or a NotRadial
    verdict carrying the worst deviation seen.
    """
    if p.m == 1:
        dirs = np.array([[1.0], [-1.0]])
    else:
        ang = 2 * math.pi * np.arange(n_dirs) / n_dirs
        dirs = np.zeros((n_dirs, p.m))
        dirs[:, 0] = np.cos(ang)
        dirs[:, 1] = np.sin(ang)
    U = R * dirs
    Wv = p.w(U)
    G = p.grad(U)
    lam = float(np.mean(Wv))
    mu_samples = -np.sum(G * U, axis=-1) / R**2
    mu = float(np.mean(mu_samples))
    # deviation: W spread, mu spread, and non-radial gradient component
    resid = G + mu_samples[:, None] * U
    scale = max(1.0, abs(lam), float(np.max(np.abs(G))))
    dev = max(
        float(np.max(np.abs(Wv - lam))),
        float(np.max(np.abs(mu_samples - mu))) * R**2,
        float(np.max(np.abs(resid))) * R,
    ) / scale
    if dev > tol:
        return NotRadial(R=R, worst_deviation=dev, reason="W or grad W is not radial on this sphere")
    return RadialParams(R=R, lam=lam, mu=mu, degenerate=abs(mu) <= tol, worst_deviation=dev)


def convexity_region_probe(p: Potential, samples) -> np.ndarray:
    """Smallest Hessian eigenvalue of W at each sample point."""
    U = np.asarray(samples, float)
    if U.ndim == 1:
        U = U[:, None] if p.m == 1 else U[None, :]
    H = p.hess(U)
    return np.linalg.eigvalsh(H)[..., 0]
