"""Hyperquadrics {<x,x>_J = r} and their affine tangent spaces.

Both geometries expose the same small interface (``contains``,
``tangent_project``, ``normal_project``, ``projector``, ``transport_generator``)
so that rolling partners, parallel frames and covariant derivatives can be
written once.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import GridError, MembershipError, NormalizationError, OrthogonalityError
from .linalg import Signature, expm, indefinite_orthonormalize, j_inner

MEMBER_TOL = 1e-9


@dataclass(frozen=True)
class Hyperquadric:
    sig: Signature
    level: float = 1.0

    def __post_init__(self):
        if self.level == 0:
            raise ValueError("level r = 0 is the light cone, not a hyperquadric")

    @property
    def dim(self) -> int:
        return self.sig.n - 1

    def residual(self, x) -> np.ndarray:
        return np.abs(j_inner(x, x, self.sig) - self.level)

    def contains(self, x, tol: float = MEMBER_TOL) -> bool:
        return bool(np.all(self.residual(x) <= tol * max(1.0, abs(self.level))))

    def require(self, x, tol: float = MEMBER_TOL) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.contains(x, tol):
            raise MembershipError(f"point not on <x,x>_J = {self.level}: residual {np.max(self.residual(x)):.3e}")
        return x

    def tangent_project(self, x, v) -> np.ndarray:
        """v - (<v,x>/r) x, broadcasting over leading axes."""
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        return v - (j_inner(v, x, self.sig) / self.level)[..., None] * x

    def normal_project(self, x, v) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        return (j_inner(v, x, self.sig) / self.level)[..., None] * x

    def projector(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.eye(self.sig.n) - np.outer(x, x * self.sig.eps) / self.level

    def transport_generator(self, x, xdot) -> np.ndarray:
        """Algebra element K with d/dt f = K f for parallel tangent and normal fields."""
        return (np.outer(xdot, x) - np.outer(x, xdot)) @ self.sig.J / self.level

    def tangent_basis(self, x):
        """Orthonormal basis of T_x, timelike-first, as ``(frame, signs)``."""
        x = self.require(x)
        vs = [self.tangent_project(x, e) for e in np.eye(self.sig.n)]
        return indefinite_orthonormalize(vs, self.sig)


@dataclass(frozen=True)
class AffineTangentSpace:
    """The affine plane x0 + T_{x0} inside the ambient space of ``hq``."""

    hq: Hyperquadric
    x0: np.ndarray = field(compare=False)

    def __post_init__(self):
        object.__setattr__(self, "x0", self.hq.require(self.x0))

    @property
    def sig(self) -> Signature:
        return self.hq.sig

    def residual(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.abs(j_inner(x - self.x0, self.x0, self.sig))

    def contains(self, x, tol: float = MEMBER_TOL) -> bool:
        return bool(np.all(self.residual(x) <= tol))

    def require(self, x, tol: float = MEMBER_TOL) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.contains(x, tol):
            raise MembershipError("point not on the affine tangent space")
        return x

    def tangent_project(self, x, v) -> np.ndarray:
        return self.hq.tangent_project(np.broadcast_to(self.x0, np.shape(v)), v)

    def normal_project(self, x, v) -> np.ndarray:
        return self.hq.normal_project(np.broadcast_to(self.x0, np.shape(v)), v)

    def projector(self, x) -> np.ndarray:
        return self.hq.projector(self.x0)

    def transport_generator(self, x, xdot) -> np.ndarray:
        return np.zeros((self.sig.n, self.sig.n))

    def tangent_basis(self, x=None):
        return self.hq.tangent_basis(self.x0)


@dataclass(frozen=True)
class CurveSamples:
    times: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        p = np.asarray(self.points, dtype=float)
        check_grid(t)
        if p.shape[0] != t.shape[0]:
            raise GridError(f"{t.shape[0]} times but {p.shape[0]} points")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "points", p)

    def __len__(self) -> int:
        return len(self.times)

    def velocity(self) -> np.ndarray:
        return time_derivative(self.times, self.points)

    def to_csv(self, path, prefix: str = "x") -> None:
        n = self.points.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + [f"{prefix}{k + 1}" for k in range(n)])
            for t, p in zip(self.times, self.points):
                w.writerow([fmt(t)] + [fmt(v) for v in p])

    @classmethod
    def from_csv(cls, path: str | Path) -> "CurveSamples":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1:])


def fmt(v: float) -> str:
    """Fixed 17-significant-digit formatting used by every CSV writer."""
    return format(float(v), ".17g")


def check_grid(times, min_len: int = 1) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or len(t) < min_len:
        raise GridError(f"need a 1-d grid with at least {min_len} samples")
    if len(t) > 1:
        d = np.diff(t)
        if np.any(d <= 0):
            raise GridError("time grid must be strictly increasing")
        if np.min(d) < 1e-12 * max(1.0, float(np.max(np.abs(t)))):
            raise GridError("grid spacing too small")
    return t


def time_derivative(times, values) -> np.ndarray:
    """d/dt of sampled values along axis 0.

    Uniform grids: 4th-order central stencil inside, 2nd-order central next
    to the ends and 2nd-order one-sided at the ends. Non-uniform grids fall
    back to second-order ``np.gradient``.
    """
    t = check_grid(times, 3)
    y = np.asarray(values, dtype=float)
    if y.shape[0] != len(t):
        raise GridError("values do not match the grid")
    d = np.diff(t)
    h = (t[-1] - t[0]) / (len(t) - 1)
    if np.max(np.abs(d - h)) > 1e-9 * h:
        return np.gradient(y, t, axis=0, edge_order=2)
    out = np.empty_like(y)
    out[0] = (-3 * y[0] + 4 * y[1] - y[2]) / (2 * h)
    out[-1] = (3 * y[-1] - 4 * y[-2] + y[-3]) / (2 * h)
    out[1:-1] = (y[2:] - y[:-2]) / (2 * h)
    if len(t) >= 5:
        out[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * h)
    return out


def second_time_derivative(times, values) -> np.ndarray:
    """d^2/dt^2 on a uniform grid: 4th-order central inside, 2nd-order elsewhere.

    The ends use the one-sided stencil (2, -5, 4, -1) / h^2.
    """
    t = check_grid(times, 4)
    y = np.asarray(values, dtype=float)
    if y.shape[0] != len(t):
        raise GridError("values do not match the grid")
    h = (t[-1] - t[0]) / (len(t) - 1)
    if np.max(np.abs(np.diff(t) - h)) > 1e-9 * h:
        return time_derivative(t, time_derivative(t, y))
    out = np.empty_like(y)
    out[0] = (2 * y[0] - 5 * y[1] + 4 * y[2] - y[3]) / h**2
    out[-1] = (2 * y[-1] - 5 * y[-2] + 4 * y[-3] - y[-4]) / h**2
    out[1:-1] = (y[2:] - 2 * y[1:-1] + y[:-2]) / h**2
    if len(t) >= 5:
        out[2:-2] = (-y[:-4] + 16 * y[1:-3] - 30 * y[2:-2] + 16 * y[3:-1] - y[4:]) / (12 * h**2)
    return out


def covariant_derivative(geom, curve: CurveSamples, field) -> np.ndarray:
    """D/dt of a tangent field: tangent part of the difference-quotient derivative."""
    if len(curve) < 3:
        raise GridError("covariant derivative needs at least 3 samples")
    dZ = time_derivative(curve.times, field)
    return geom.tangent_project(curve.points, dZ)


def normal_derivative(geom, curve: CurveSamples, field) -> np.ndarray:
    """D^perp/dt of a normal field: normal part of the difference-quotient derivative."""
    if len(curve) < 3:
        raise GridError("normal derivative needs at least 3 samples")
    dZ = time_derivative(curve.times, field)
    return geom.normal_project(curve.points, dZ)


def geodesic(hq: Hyperquadric, x0, u, t, tol: float = 1e-9) -> np.ndarray:
    """Point at parameter ``t`` on the geodesic through ``x0`` with velocity ``u``.

    ``u`` must be J-orthogonal to ``x0`` with <u,u>_J in {+1, -1, 0}. For
    r = 1 the closed forms are used; otherwise exp(t Omega) x0 with
    Omega = (u x0^t - x0 u^t) J / r. ``t`` may be an array.
    """
    sig = hq.sig
    x0 = hq.require(x0)
    u = np.asarray(u, dtype=float)
    if abs(j_inner(u, x0, sig)) > tol:
        raise OrthogonalityError("geodesic velocity must be J-orthogonal to the base point")
    uu = float(j_inner(u, u, sig))
    if abs(uu) > tol and abs(abs(uu) - 1.0) > tol:
        raise NormalizationError(f"velocity must be unit or null, <u,u>_J = {uu:.6g}")
    t_arr = np.asarray(t, dtype=float)
    if hq.level == 1.0:
        tt = t_arr[..., None]
        if uu > tol:
            return x0 * np.cos(tt) + u * np.sin(tt)
        if uu < -tol:
            return x0 * np.cosh(tt) + u * np.sinh(tt)
        return x0 + u * tt
    omega = (np.outer(u, x0) - np.outer(x0, u)) @ sig.J / hq.level
    flat = np.atleast_1d(t_arr).ravel()
    pts = np.array([expm(s * omega) @ x0 for s in flat])
    return pts.reshape(t_arr.shape + (sig.n,))
