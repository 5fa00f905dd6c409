"""Rolling a hyperquadric over its affine tangent space.

The kinematic equations are

    s' = u,    R' = R Omega(u),    Omega(u) = (u x0^t - x0 u^t) J / r,

with s(0) = 0, R(0) = I and a control u(t) that stays J-orthogonal to x0.
The rolling curve is x(t) = R(t) x0 and its development is x^(t) = s(t) + x0.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import FlavorError, GridError, OrthogonalityError
from .hyperquadric import (
    AffineTangentSpace,
    CurveSamples,
    Hyperquadric,
    check_grid,
    fmt,
    time_derivative,
)
from .linalg import (
    ORIENTATION_GROUPS,
    Signature,
    expm,
    j_adjoint,
    j_inner,
    matrix_j_inner,
    orientation_component,
)

ORTHO_TOL = 1e-9


class Control:
    """Control u(t) for the kinematic equations.

    Build one with :meth:`constant`, :meth:`sampled` or :meth:`expression`,
    or wrap any callable ``t -> vector``.
    """

    def __init__(self, func: Callable[[float], np.ndarray], kind: str = "callable", spec=None):
        self._func = func
        self.kind = kind
        self.spec = spec

    def __call__(self, t: float) -> np.ndarray:
        return np.asarray(self._func(float(t)), dtype=float)

    def samples(self, times) -> np.ndarray:
        return np.array([self(t) for t in np.asarray(times, dtype=float)])

    @classmethod
    def constant(cls, u) -> "Control":
        u = np.array(u, dtype=float)
        u.setflags(write=False)
        return cls(lambda t: u, "constant", u)

    @classmethod
    def sampled(cls, times, values) -> "Control":
        """Piecewise-linear interpolation of samples; clamped outside the range."""
        t = check_grid(times, 2)
        v = np.asarray(values, dtype=float)
        if v.shape[0] != len(t):
            raise GridError("control samples do not match their time grid")

        def f(s):
            return np.array([np.interp(s, t, v[:, k]) for k in range(v.shape[1])])

        return cls(f, "sampled", (t, v))

    @classmethod
    def expression(cls, components) -> "Control":
        """Per-component arithmetic expressions in ``t`` (see :mod:`pseudoroll.expr`)."""
        from .expr import compile_expr

        fs = [compile_expr(c) for c in components]
        return cls(lambda s: np.array([f(s) for f in fs]), "expr", list(components))


def omega(u, x0, sig: Signature, level: float = 1.0) -> np.ndarray:
    """Omega(u) = (u x0^t - x0 u^t) J / r, an element of o_nu(n)."""
    u = np.asarray(u, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    return (np.outer(u, x0) - np.outer(x0, u)) * sig.eps[None, :] / level


@dataclass(frozen=True)
class RollingTrajectory:
    times: np.ndarray
    s: np.ndarray
    R: np.ndarray
    x0: np.ndarray
    hq: Hyperquadric
    control: Control | None = field(default=None, compare=False)

    @property
    def sig(self) -> Signature:
        return self.hq.sig

    @property
    def plane(self) -> AffineTangentSpace:
        return AffineTangentSpace(self.hq, self.x0)

    @property
    def x(self) -> np.ndarray:
        return self.R @ self.x0

    @property
    def xhat(self) -> np.ndarray:
        return self.s + self.x0

    @property
    def R_inv(self) -> np.ndarray:
        return j_adjoint(self.R, self.sig)

    def drift(self) -> np.ndarray:
        """Per-sample max |R^t J R - J|."""
        J = self.sig.J
        res = np.swapaxes(self.R, 1, 2) @ J @ self.R - J
        return np.max(np.abs(res), axis=(1, 2))

    def to_csv(self, path, extra: dict[str, np.ndarray] | None = None) -> None:
        n = self.sig.n
        extra = extra or {}
        header = (
            ["t"]
            + [f"s{k + 1}" for k in range(n)]
            + [f"R{i + 1}{j + 1}" for i in range(n) for j in range(n)]
            + [f"x{k + 1}" for k in range(n)]
            + [f"xhat{k + 1}" for k in range(n)]
            + ["drift"]
            + list(extra)
        )
        x, xh, drift = self.x, self.xhat, self.drift()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for k, t in enumerate(self.times):
                row = [t, *self.s[k], *self.R[k].ravel(), *x[k], *xh[k], drift[k]]
                row += [col[k] for col in extra.values()]
                w.writerow([fmt(v) for v in row])


def integrate_kinematics(
    hq: Hyperquadric,
    x0,
    control: Control,
    times,
    R0=None,
    tol: float = ORTHO_TOL,
) -> RollingTrajectory:
    """Integrate the kinematic equations with exponential midpoint steps.

    R_{k+1} = R_k exp(h Omega(u(t_mid))), s_{k+1} = s_k + h u(t_mid).

    ``R0`` defaults to the identity. Passing another element of the group
    yields the rolling that differs by that fixed isometry of T_{x0}.

    While the midpoint generator stays identical (constant controls), the
    product of the step factors is exp((t - t_j) Omega) exactly; it is
    evaluated in that form from the start t_j of the run so that rounding
    does not accumulate over many steps.
    """
    sig = hq.sig
    x0 = hq.require(x0)
    t = check_grid(times, 1)
    mids = 0.5 * (t[1:] + t[:-1])
    for tk in np.concatenate([t, mids]):
        u = control(tk)
        if u.shape != (sig.n,):
            raise OrthogonalityError(f"control has shape {u.shape}, expected ({sig.n},)")
        if abs(j_inner(u, x0, sig)) > tol * max(1.0, float(np.max(np.abs(u)))):
            raise OrthogonalityError(f"control not J-orthogonal to x0 at t={tk:g}")
    N = len(t)
    s = np.zeros((N, sig.n))
    R = np.zeros((N, sig.n, sig.n))
    R[0] = np.eye(sig.n) if R0 is None else np.asarray(R0, dtype=float)
    run_start, run_gen = 0, None
    for k in range(N - 1):
        h = t[k + 1] - t[k]
        u = control(mids[k])
        gen = omega(u, x0, sig, hq.level)
        if run_gen is not None and np.array_equal(gen, run_gen):
            R[k + 1] = R[run_start] @ expm((t[k + 1] - t[run_start]) * gen)
        else:
            run_start, run_gen = k, gen
            R[k + 1] = R[k] @ expm(h * gen)
        s[k + 1] = s[k] + h * u
    return RollingTrajectory(t, s, R, x0, hq, control)


def curves(traj: RollingTrajectory) -> tuple[CurveSamples, CurveSamples]:
    """Rolling curve x(t) = R(t) x0 and development x^(t) = s(t) + x0."""
    return CurveSamples(traj.times, traj.x), CurveSamples(traj.times, traj.xhat)


CONDITIONS = ("i", "ii", "iii", "iv", "v", "vi")
CONDITION_NAMES = {
    "i": "contact: x on M, x^ on the affine plane",
    "ii": "tangent spaces mapped onto each other",
    "iii": "G-orientation preserved",
    "iv": "no slip",
    "v": "no twist (tangential)",
    "vi": "no twist (normal)",
}


@dataclass(frozen=True)
class VerificationReport:
    residuals: dict
    tol: float

    @property
    def passed(self) -> bool:
        return all(v <= self.tol for v in self.residuals.values())

    @property
    def failures(self) -> list[str]:
        return [c for c, v in self.residuals.items() if not v <= self.tol]

    def lines(self) -> list[str]:
        return [
            f"({c:>3}) {CONDITION_NAMES[c]:<40} residual={self.residuals[c]:.3e} "
            f"{'PASS' if self.residuals[c] <= self.tol else 'FAIL'}"
            for c in CONDITIONS
        ]


def noslip_residual(traj: RollingTrajectory) -> np.ndarray:
    """Per-sample |x^' - R^{-1} x'|_max with finite-difference derivatives."""
    x, xh = traj.x, traj.xhat
    dx = time_derivative(traj.times, x)
    dxh = time_derivative(traj.times, xh)
    mapped = np.einsum("kij,kj->ki", traj.R_inv, dx)
    return np.max(np.abs(dxh - mapped), axis=1)


def verify_rolling(traj: RollingTrajectory, tol: float = 1e-6, group: str = "identity", anchored: bool = True) -> VerificationReport:
    """Check the six rolling conditions numerically and report max residuals.

    ``group`` picks the G-orientation: ``identity`` (the component O^{++}),
    ``orientation``, ``time`` or ``space``. With ``anchored`` the identity
    group also requires R(0) = I; trajectories started at another isometry
    of T_{x0} pass ``anchored=False``.
    """
    if len(traj.times) < 3:
        raise GridError("verification needs at least 3 samples")
    hq, sig, plane = traj.hq, traj.sig, traj.plane
    x, xh, Rinv = traj.x, traj.xhat, traj.R_inv
    t = traj.times
    n = sig.n
    res = {}

    # (i) contact
    res["i"] = float(max(np.max(hq.residual(x)), np.max(plane.residual(xh))))

    # (ii) R^{-1} maps sampled tangent vectors at x(t) into T_{x0}
    basis = np.eye(n)
    tang = hq.tangent_project(x[:, None, :], basis[None, :, :])  # (N, n, n)
    mapped = np.einsum("kij,kbj->kbi", Rinv, tang)
    res["ii"] = float(np.max(np.abs(j_inner(mapped, traj.x0, sig))))

    # (iii) the path stays in one allowed component of O_nu(n)
    allowed = ORIENTATION_GROUPS[group]
    comps = [orientation_component(Rk, sig) for Rk in traj.R]
    bad = sum(1 for c in comps if c not in allowed or c != comps[0])
    anchor = float(np.max(np.abs(traj.R[0] - np.eye(n)))) if anchored and group == "identity" else 0.0
    res["iii"] = float(bad) + anchor

    # (iv) no slip
    res["iv"] = float(np.max(noslip_residual(traj)))

    # (v) R^{-1} D/dt Z = D/dt (R^{-1} Z) on the projected coordinate frame.
    # d/dt (R^{-1} Z) is taken by the product rule so that both sides share Z'.
    dRinv = time_derivative(t, Rinv)
    worst = 0.0
    for b in basis:
        Z = hq.tangent_project(x, b)
        dZ = time_derivative(t, Z)
        lhs = np.einsum("kij,kj->ki", Rinv, hq.tangent_project(x, dZ))
        d_mapped = np.einsum("kij,kj->ki", dRinv, Z) + np.einsum("kij,kj->ki", Rinv, dZ)
        rhs = plane.tangent_project(xh, d_mapped)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    res["v"] = worst

    # (vi) normal bundle of a hypersurface is a line: no normal twist possible
    res["vi"] = 0.0
    return VerificationReport(res, tol)


class Flavor(str, enum.Enum):
    TANGENT = "tangent"
    NORMAL = "normal"


def parallel_transport(traj: RollingTrajectory, Y0, flavor: str | Flavor = Flavor.TANGENT, tol: float = 1e-9) -> np.ndarray:
    """Parallel field along x(t) with value Y0 at t=0, realized as R(t) Y0."""
    flavor = Flavor(flavor)
    Y0 = np.asarray(Y0, dtype=float)
    hq, x0 = traj.hq, traj.x0
    scale = max(1.0, float(np.max(np.abs(Y0))))
    if flavor is Flavor.TANGENT:
        if abs(j_inner(Y0, x0, traj.sig)) > tol * scale:
            raise FlavorError("tangent transport needs <Y0, x0>_J = 0")
    elif np.max(np.abs(hq.tangent_project(x0, Y0))) > tol * scale:
        raise FlavorError("normal transport needs Y0 proportional to x0")
    return traj.R @ Y0


@dataclass(frozen=True)
class CausalReport:
    times: np.ndarray
    xdot_sq: np.ndarray
    xhatdot_sq: np.ndarray
    u_sq: np.ndarray
    rdot_sq: np.ndarray
    level: float
    tol: float

    @property
    def max_error(self) -> float:
        e1 = np.abs(self.xdot_sq - self.u_sq)
        e2 = np.abs(self.xhatdot_sq - self.u_sq)
        e3 = np.abs(self.rdot_sq - 2.0 * self.u_sq / self.level)
        return float(max(e1.max(), e2.max(), e3.max()))

    @property
    def consistent(self) -> bool:
        return self.max_error <= self.tol


def causal_report(traj: RollingTrajectory, tol: float = 1e-6, velocities: str = "kinematic") -> CausalReport:
    """<x',x'>, <x^',x^'>, <u,u> and <<R',R'>> per sample.

    With ``velocities="kinematic"`` the velocities come from the kinematic
    equations along the integrated R(t) (needs the control); with
    ``"difference"`` all of them are finite differences of the samples.
    The expected relations are the first three equal and
    <<R',R'>> = 2 <u,u> / r.
    """
    sig, x0, t = traj.sig, traj.x0, traj.times
    if velocities == "kinematic":
        if traj.control is None:
            raise ValueError("kinematic velocities need the trajectory's control")
        u = traj.control.samples(t)
        Rdot = np.array([Rk @ omega(uk, x0, sig, traj.hq.level) for Rk, uk in zip(traj.R, u)])
        xdot = Rdot @ x0
        xhdot = u
    elif velocities == "difference":
        Rdot = time_derivative(t, traj.R)
        xdot = time_derivative(t, traj.x)
        xhdot = time_derivative(t, traj.s)
        u = xhdot if traj.control is None else traj.control.samples(t)
    else:
        raise ValueError(f"unknown velocities mode {velocities!r}")
    return CausalReport(
        times=t,
        xdot_sq=j_inner(xdot, xdot, sig),
        xhatdot_sq=j_inner(xhdot, xhdot, sig),
        u_sq=j_inner(u, u, sig),
        rdot_sq=np.array([matrix_j_inner(D, D, sig) for D in Rdot]),
        level=traj.hq.level,
        tol=tol,
    )
