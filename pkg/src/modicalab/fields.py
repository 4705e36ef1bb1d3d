"""Fields and their second-order jets.

Two flavours of field live here: closed-form catalog entries (with analytic
jets) and rectangular grid samples (with central-difference jets).  The jet is
the common currency every pointwise check downstream consumes: value, first
derivatives and second derivatives of a map u: R^n -> R^m at one point.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "Jet2",
    "ClosedFormField",
    "GridField",
    "make_field",
    "jet",
    "fd_jet",
    "grid_jets",
    "sample_field",
    "save_gridfield",
    "load_gridfield",
    "CATALOG_IDS",
]


@dataclass(frozen=True)
class Jet2:
    """Second-order jet of a field at a point.

    Attributes
    ----------
    x : (n,) evaluation point
    u : (m,) field value
    du : (m, n) first derivatives, du[j, i] = d u^j / d x_i
    d2u : (m, n, n) second derivatives
    """

    x: np.ndarray
    u: np.ndarray
    du: np.ndarray
    d2u: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.atleast_1d(np.asarray(self.x, float)))
        object.__setattr__(self, "u", np.atleast_1d(np.asarray(self.u, float)))
        object.__setattr__(self, "du", np.asarray(self.du, float))
        object.__setattr__(self, "d2u", np.asarray(self.d2u, float))
        m, n = self.m, self.n
        if self.du.shape != (m, n) or self.d2u.shape != (m, n, n):
            raise ValueError(
                f"jet shapes inconsistent: u {self.u.shape}, du {self.du.shape}, d2u {self.d2u.shape}"
            )

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def m(self) -> int:
        return self.u.size

    def grad_sq(self) -> float:
        """|grad u|^2 summed over all components and directions."""
        return float(np.sum(self.du**2))

    def laplacian(self) -> np.ndarray:
        """(m,) componentwise Laplacian, the trace of d2u over space axes."""
        return np.trace(self.d2u, axis1=1, axis2=2)

    def symmetry_defect(self) -> float:
        return float(np.max(np.abs(self.d2u - np.swapaxes(self.d2u, 1, 2))))


@dataclass(frozen=True)
class ClosedFormField:
    """A catalog field with analytic jets and vectorized point evaluation."""

    name: str
    n: int
    m: int
    params: dict
    _jet: Callable[[np.ndarray], tuple]
    _values: Callable[[np.ndarray], np.ndarray]

    def jet(self, x) -> Jet2:
        x = np.atleast_1d(np.asarray(x, float))
        if x.shape != (self.n,):
            raise ValueError(f"{self.name}: expected point in R^{self.n}, got shape {x.shape}")
        u, du, d2u = self._jet(x)
        return Jet2(x=x, u=u, du=du, d2u=d2u)

    def values(self, X) -> np.ndarray:
        """Evaluate at an array of points, shape (..., n) -> (..., m)."""
        X = np.asarray(X, float)
        if X.shape[-1] != self.n:
            raise ValueError(f"{self.name}: trailing axis must have length {self.n}")
        return self._values(X)


def _omega(R: float) -> float:
    return math.sqrt(1.0 - R * R)


def _make_constant(value, n=1):
    value = np.atleast_1d(np.asarray(value, float))
    m = value.size

    def jet_fn(x):
        return value.copy(), np.zeros((m, n)), np.zeros((m, n, n))

    def values(X):
        return np.broadcast_to(value, X.shape[:-1] + (m,)).copy()

    return ClosedFormField("constant", n, m, {"value": value.tolist(), "n": n}, jet_fn, values)


def _make_linear(A, b=None, n=None):
    A = np.atleast_2d(np.asarray(A, float))
    m, n_ = A.shape
    if n is not None and n != n_:
        raise ValueError("linear: n inconsistent with matrix shape")
    n = n_
    b = np.zeros(m) if b is None else np.atleast_1d(np.asarray(b, float))

    def jet_fn(x):
        return A @ x + b, A.copy(), np.zeros((m, n, n))

    def values(X):
        return X @ A.T + b

    return ClosedFormField("linear", n, m, {"A": A.tolist(), "b": b.tolist()}, jet_fn, values)


def _gl_circle_jet(R, omega, x1):
    c, s = math.cos(omega * x1), math.sin(omega * x1)
    u = np.array([R * c, R * s])
    du1 = np.array([-R * omega * s, R * omega * c])
    d2u11 = np.array([-R * omega**2 * c, -R * omega**2 * s])
    return u, du1, d2u11


def _make_gl_circle(R=0.5, planar=False):
    R = float(R)
    if not 0.0 < R < 1.0:
        raise ValueError(f"gl_circle requires 0 < R < 1, got R = {R}")
    omega = _omega(R)
    n = 2 if planar else 1
    name = "gl_circle_planar" if planar else "gl_circle"

    def jet_fn(x):
        u, du1, d2u11 = _gl_circle_jet(R, omega, x[0])
        du = np.zeros((2, n))
        d2u = np.zeros((2, n, n))
        du[:, 0] = du1
        d2u[:, 0, 0] = d2u11
        return u, du, d2u

    def values(X):
        phase = omega * X[..., 0]
        return np.stack([R * np.cos(phase), R * np.sin(phase)], axis=-1)

    return ClosedFormField(name, n, 2, {"R": R}, jet_fn, values)


def _make_tanh(planar=False):
    n = 2 if planar else 1
    name = "tanh_planar" if planar else "tanh_profile"
    rt2 = math.sqrt(2.0)

    def jet_fn(x):
        t = math.tanh(x[0] / rt2)
        sech2 = 1.0 - t * t
        u = np.array([t])
        du = np.zeros((1, n))
        d2u = np.zeros((1, n, n))
        du[0, 0] = sech2 / rt2
        d2u[0, 0, 0] = -t * sech2  # (1/2) * d/dx sech^2(x/rt2) etc.
        return u, du, d2u

    def values(X):
        return np.tanh(X[..., :1] / rt2)

    return ClosedFormField(name, n, 1, {}, jet_fn, values)


def _make_harmonic_linear_map(A=None):
    A = np.eye(2) if A is None else np.atleast_2d(np.asarray(A, float))
    if A.shape != (2, 2):
        raise ValueError("harmonic_linear_map expects a 2x2 matrix")
    f = _make_linear(A)
    return ClosedFormField("harmonic_linear_map", 2, 2, {"A": A.tolist()}, f._jet, f._values)


def _make_product_saddle():
    def jet_fn(x):
        u = np.array([x[0] * x[1]])
        du = np.array([[x[1], x[0]]])
        d2u = np.array([[[0.0, 1.0], [1.0, 0.0]]])
        return u, du, d2u

    def values(X):
        return (X[..., 0] * X[..., 1])[..., None]

    return ClosedFormField("product_saddle", 2, 1, {}, jet_fn, values)


CATALOG_IDS = (
    "constant",
    "linear",
    "gl_circle",
    "gl_circle_planar",
    "tanh_profile",
    "tanh_planar",
    "harmonic_linear_map",
    "product_saddle",
)


def make_field(name: str, **params) -> ClosedFormField:
    """Construct a catalog field by id.  The id set is closed; parameters are
    validated here so that downstream code can trust the object."""
    if name == "constant":
        return _make_constant(**params)
    if name == "linear":
        return _make_linear(**params)
    if name == "gl_circle":
        return _make_gl_circle(planar=False, **params)
    if name == "gl_circle_planar":
        return _make_gl_circle(planar=True, **params)
    if name == "tanh_profile":
        return _make_tanh(planar=False)
    if name == "tanh_planar":
        return _make_tanh(planar=True)
    if name == "harmonic_linear_map":
        return _make_harmonic_linear_map(**params)
    if name == "product_saddle":
        return _make_product_saddle()
    raise ValueError(f"unknown field id {name!r}; known ids: {', '.join(CATALOG_IDS)}")


@dataclass(frozen=True)
class GridField:
    """Uniform rectangular grid of field values, n in {1, 2}.

    values has shape extents + (m,); node (i, j) sits at
    origin + (i h_1, j h_2).  Points between nodes are never interpolated.
    """

    origin: np.ndarray
    spacing: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "origin", np.atleast_1d(np.asarray(self.origin, float)))
        object.__setattr__(self, "spacing", np.atleast_1d(np.asarray(self.spacing, float)))
        object.__setattr__(self, "values", np.asarray(self.values, float))
        n = self.origin.size
        if n not in (1, 2):
            raise ValueError("GridField supports n in {1, 2}")
        if self.spacing.shape != (n,) or np.any(self.spacing <= 0) or not np.all(np.isfinite(self.spacing)):
            raise ValueError("spacing must be positive finite, one entry per axis")
        if self.values.ndim != n + 1:
            raise ValueError(f"values must have shape extents + (m,), got {self.values.shape}")
        if any(e < 5 for e in self.values.shape[:-1]):
            raise ValueError("grid needs at least 5 nodes per axis")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid values must be finite")

    @property
    def n(self) -> int:
        return self.origin.size

    @property
    def m(self) -> int:
        return self.values.shape[-1]

    @property
    def extents(self) -> tuple:
        return self.values.shape[:-1]

    def axes(self) -> list:
        return [self.origin[i] + self.spacing[i] * np.arange(self.extents[i]) for i in range(self.n)]

    def node_position(self, idx) -> np.ndarray:
        idx = np.atleast_1d(np.asarray(idx, int))
        return self.origin + self.spacing * idx

    def locate(self, x, snap=1e-9) -> tuple:
        """Map a point to its node index; errors if x is not (close to) a node."""
        x = np.atleast_1d(np.asarray(x, float))
        rel = (x - self.origin) / self.spacing
        idx = np.rint(rel).astype(int)
        if np.any(np.abs(rel - idx) > snap / np.min(self.spacing)):
            raise ValueError(f"point {x} is not a grid node; grid jets are node-only")
        if np.any(idx < 0) or np.any(idx >= np.array(self.extents)):
            raise ValueError(f"point {x} outside the grid")
        return tuple(int(i) for i in idx)


def sample_field(cf: ClosedFormField, origin, spacing, extents, meta=None) -> GridField:
    """Sample a closed-form field on a uniform grid."""
    origin = np.atleast_1d(np.asarray(origin, float))
    spacing = np.atleast_1d(np.asarray(spacing, float))
    extents = tuple(int(e) for e in np.atleast_1d(extents))
    axes = [origin[i] + spacing[i] * np.arange(extents[i]) for i in range(len(extents))]
    mesh = np.meshgrid(*axes, indexing="ij")
    X = np.stack(mesh, axis=-1)
    vals = cf.values(X)
    return GridField(origin, spacing, vals, meta or {"sampled_from": cf.name, "params": cf.params})


def fd_jet(g: GridField, idx, order: int = 2) -> Jet2:
    """Central-difference jet at an interior node of a grid field.

    order=2 uses the classical 3-point second derivative and 4-point cross
    stencils (exact on quadratics); order=4 upgrades both to fourth order and
    needs two layers of support.
    """
    if order not in (2, 4):
        raise ValueError("order must be 2 or 4")
    idx = tuple(int(i) for i in np.atleast_1d(idx))
    margin = 1 if order == 2 else 2
    for i, e in zip(idx, g.extents):
        if i < margin or i > e - 1 - margin:
            raise ValueError(f"node {idx} lacks stencil support (order {order})")

    v = g.values
    h = g.spacing
    n, m = g.n, g.m
    x = g.node_position(idx)
    u = v[idx].copy()
    du = np.zeros((m, n))
    d2u = np.zeros((m, n, n))

    def at(*offsets):
        return v[tuple(idx[k] + offsets[k] for k in range(n))]

    for i in range(n):
        off_p = tuple(1 if k == i else 0 for k in range(n))
        off_m = tuple(-1 if k == i else 0 for k in range(n))
        if order == 2:
            du[:, i] = (at(*off_p) - at(*off_m)) / (2 * h[i])
            d2u[:, i, i] = (at(*off_p) - 2 * u + at(*off_m)) / h[i] ** 2
        else:
            off_p2 = tuple(2 if k == i else 0 for k in range(n))
            off_m2 = tuple(-2 if k == i else 0 for k in range(n))
            du[:, i] = (-at(*off_p2) + 8 * at(*off_p) - 8 * at(*off_m) + at(*off_m2)) / (12 * h[i])
            d2u[:, i, i] = (
                -at(*off_p2) + 16 * at(*off_p) - 30 * u + 16 * at(*off_m) - at(*off_m2)
            ) / (12 * h[i] ** 2)

    if n == 2:
        if order == 2:
            mixed = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * h[0] * h[1])
        else:
            mixed = (
                64 * (at(1, 1) + at(-1, -1) - at(1, -1) - at(-1, 1))
                + 8 * (at(1, -2) + at(2, -1) + at(-2, 1) + at(-1, 2))
                - 8 * (at(-1, -2) + at(-2, -1) + at(1, 2) + at(2, 1))
                + (at(2, -2) + at(-2, 2) - at(-2, -2) - at(2, 2))
            ) / (144 * h[0] * h[1])
        d2u[:, 0, 1] = mixed
        d2u[:, 1, 0] = mixed

    return Jet2(x=x, u=u, du=du, d2u=d2u)


def jet(f, x) -> Jet2:
    """Second-order jet of a field at a point: analytic for closed forms,
    node-snapped central differences for grids."""
    if isinstance(f, ClosedFormField):
        return f.jet(x)
    if isinstance(f, GridField):
        return fd_jet(f, f.locate(x))
    raise TypeError(f"cannot take a jet of {type(f).__name__}")


class InteriorJets:
    """Vectorized jets at every interior node of a 2-d grid field."""

    def __init__(self, g: GridField, order: int = 2):
        if g.n != 2:
            raise ValueError("InteriorJets requires n = 2")
        margin = 1 if order == 2 else 2
        v = g.values
        h = g.spacing
        c = (slice(margin, v.shape[0] - margin), slice(margin, v.shape[1] - margin))

        def sh(di, dj):
            return v[c[0].start + di : v.shape[0] - margin + di, c[1].start + dj : v.shape[1] - margin + dj]

        u = sh(0, 0)
        ux = (sh(1, 0) - sh(-1, 0)) / (2 * h[0])
        uy = (sh(0, 1) - sh(0, -1)) / (2 * h[1])
        uxx = (sh(1, 0) - 2 * u + sh(-1, 0)) / h[0] ** 2
        uyy = (sh(0, 1) - 2 * u + sh(0, -1)) / h[1] ** 2
        uxy = (sh(1, 1) - sh(1, -1) - sh(-1, 1) + sh(-1, -1)) / (4 * h[0] * h[1])

        axes = g.axes()
        X, Y = np.meshgrid(axes[0][margin:-margin], axes[1][margin:-margin], indexing="ij")
        self.x = np.stack([X, Y], axis=-1)  # (ni, nj, 2)
        self.u = u  # (ni, nj, m)
        self.du = np.stack([ux, uy], axis=-1)  # (ni, nj, m, 2)
        d2 = np.empty(u.shape + (2, 2))
        d2[..., 0, 0] = uxx
        d2[..., 1, 1] = uyy
        d2[..., 0, 1] = uxy
        d2[..., 1, 0] = uxy
        self.d2u = d2  # (ni, nj, m, 2, 2)
        self.margin = margin

    def grad_sq(self):
        return np.sum(self.du**2, axis=(-2, -1))

    def laplacian(self):
        return self.d2u[..., 0, 0] + self.d2u[..., 1, 1]


def grid_jets(g: GridField, order: int = 2) -> InteriorJets:
    return InteriorJets(g, order)


# ---------------------------------------------------------------------------
# persistence: plain text payload plus a JSON sidecar with the origin


def save_gridfield(g: GridField, path: str) -> None:
    """Write `gridfield n m h... extents...` header plus node lines (row-major)."""
    header = (
        "gridfield "
        + f"{g.n} {g.m} "
        + " ".join(repr(float(h)) for h in g.spacing)
        + " "
        + " ".join(str(e) for e in g.extents)
    )
    flat = g.values.reshape(-1, g.m)
    lines = [header] + [" ".join(repr(float(x)) for x in row) for row in flat]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    sidecar = {"format": "gridfield-v1", "origin": list(map(float, g.origin)), "meta": g.meta}
    with open(f"{path}.json", "w") as fh:
        json.dump(sidecar, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_gridfield(path: str) -> GridField:
    with open(path) as fh:
        header = fh.readline().split()
        if not header or header[0] != "gridfield":
            raise ValueError(f"{path}: not a gridfield file")
        n, m = int(header[1]), int(header[2])
        spacing = np.array([float(t) for t in header[3 : 3 + n]])
        extents = tuple(int(t) for t in header[3 + n : 3 + 2 * n])
        data = np.loadtxt(fh, ndmin=2)
    if data.shape != (int(np.prod(extents)), m):
        raise ValueError(f"{path}: payload shape {data.shape} inconsistent with header")
    try:
        with open(f"{path}.json") as fh:
            sidecar = json.load(fh)
        origin = np.array(sidecar.get("origin", [0.0] * n), float)
        meta = sidecar.get("meta", {})
    except FileNotFoundError:
        origin, meta = np.zeros(n), {}
    return GridField(origin, spacing, data.reshape(extents + (m,)), meta)
