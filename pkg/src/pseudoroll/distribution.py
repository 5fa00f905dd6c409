"""Chart-level description of rollings: lifts, horizontality and causal traces.

A rolling (q, p) is read in a chart U of M, a chart U^ of M^ and orthonormal
frame fields {e_j}, {e^_i} (tangent) and {xi_l}, {xi^_k} (normal) on them:

    a_ij = <e^_i, q e_j>_J,    b_kl = <xi^_k, p xi_l>_J.

Writing C(v)[s, l] = <nabla_v e_l, e_s> for the frame connection, E and E^
for the sign patterns and c for the frame coordinates of x', a curve
(x, x^, A, B) is a rolling exactly when

    x^' = E^ A c              (no slip)
    A'  = A E w,  w = C(x') - A^t E^ C^(x^') E^ A      (no twist)

and the analogous equation with the normal connections holds for B.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import FrameError, GroupConstraintError, MetricDegeneracyError
from .hyperquadric import check_grid, fmt, time_derivative
from .linalg import (
    Signature,
    classify_value,
    indefinite_orthonormalize,
    j_inner,
    orthonormal_complement,
)

EPS_STEP = np.finfo(float).eps ** (1.0 / 3.0)
FRAME_TOL = 1e-8


class MetricChart:
    """Chart of an m-dimensional manifold with a metric of index ``index``.

    ``metric(p)`` returns the m x m Gram matrix of coordinate vectors.
    ``christoffel_fn(p)`` optionally returns Gamma[i, k, h] in closed form and
    ``frame_fn(p)`` optionally returns frame coefficients F (columns are the
    frame vectors in coordinates). Without it the coordinate vectors are
    orthonormalized in order.
    """

    def __init__(
        self,
        dim: int,
        index: int,
        metric: Callable,
        christoffel_fn: Callable | None = None,
        frame_fn: Callable | None = None,
        scale: float = 1.0,
        name: str = "chart",
    ):
        self.dim = dim
        self.index = index
        self._metric = metric
        self.christoffel_fn = christoffel_fn
        self.frame_fn = frame_fn
        self.scale = scale
        self.name = name

    def metric(self, p) -> np.ndarray:
        g = np.asarray(self._metric(np.asarray(p, dtype=float)), dtype=float)
        if g.shape != (self.dim, self.dim):
            raise MetricDegeneracyError(f"metric has shape {g.shape}")
        diagonal = not np.any(g - np.diag(np.diag(g)))
        ev = np.diag(g) if diagonal else np.linalg.eigvalsh(0.5 * (g + g.T))
        if np.min(np.abs(ev)) <= 1e-12 * max(1.0, float(np.max(np.abs(ev)))):
            raise MetricDegeneracyError(f"metric is singular at {np.asarray(p).tolist()}")
        if int(np.sum(ev < 0)) != self.index:
            raise MetricDegeneracyError(f"metric index changed to {int(np.sum(ev < 0))} at {np.asarray(p).tolist()}")
        return g

    def frame(self, p):
        """``(F, signs)``: orthonormal frame coefficients and their sign pattern."""
        g = self.metric(p)
        if self.frame_fn is not None:
            F = np.asarray(self.frame_fn(np.asarray(p, dtype=float)), dtype=float)
            G = F.T @ g @ F
            d = np.diag(G)
            if np.max(np.abs(G - np.diag(np.sign(d)))) > FRAME_TOL:
                raise FrameError(f"chart frame of {self.name} is not orthonormal")
            return F, np.sign(d)
        d = np.diag(g)
        if not np.any(g - np.diag(d)) and np.all(np.diff(np.sign(d)) >= 0):
            # Gram-Schmidt in order only rescales an orthogonal, timelike-first basis
            return np.diag(1.0 / np.sqrt(np.abs(d))), np.sign(d)
        rows, signs = indefinite_orthonormalize(list(np.eye(self.dim)), g, pivot=False)
        return rows.T, signs

    def signs(self, p) -> np.ndarray:
        return self.frame(p)[1]

    def normals(self, p) -> np.ndarray:
        """Ambient normal frame rows; charts without an embedding have none."""
        return np.zeros((0, 0))


class EmbeddedChart(MetricChart):
    """Chart given by an embedding into (R^n, <,>_J).

    ``embed(p)`` maps parameters to ambient points, ``inverse(x)`` goes back
    and ``normal_fn(p)`` returns an orthonormal frame of the normal space
    (rows). The metric is the pullback unless given explicitly.
    """

    def __init__(
        self,
        sig: Signature,
        dim: int,
        index: int,
        embed: Callable,
        inverse: Callable,
        jacobian: Callable | None = None,
        metric: Callable | None = None,
        normal_fn: Callable | None = None,
        **kw,
    ):
        self.sig = sig
        self.embed = embed
        self.inverse = inverse
        self._jacobian = jacobian
        self.normal_fn = normal_fn
        super().__init__(dim, index, metric if metric is not None else self._pullback, **kw)

    def jacobian(self, p) -> np.ndarray:
        """n x m matrix of coordinate vectors."""
        p = np.asarray(p, dtype=float)
        if self._jacobian is not None:
            return np.asarray(self._jacobian(p), dtype=float)
        h = EPS_STEP * self.scale
        cols = [(self.embed(p + h * e) - self.embed(p - h * e)) / (2 * h) for e in np.eye(self.dim)]
        return np.stack(cols, axis=1)

    def _pullback(self, p):
        D = self.jacobian(p)
        return D.T @ self.sig.J @ D

    def ambient_frame(self, p):
        """Frame rows in ambient coordinates and their signs."""
        F, s = self.frame(p)
        return (self.jacobian(p) @ F).T, s

    def normals(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self.normal_fn is not None:
            return np.atleast_2d(np.asarray(self.normal_fn(p), dtype=float))
        N, _ = orthonormal_complement(list(self.jacobian(p).T), self.sig)
        return N

    def normal_signs(self, p) -> np.ndarray:
        N = self.normals(p)
        return np.sign(j_inner(N, N, self.sig))


def christoffel(chart: MetricChart, p) -> np.ndarray:
    """Gamma[i, k, h] = 1/2 g^{il} (d_k g_lh + d_h g_lk - d_l g_kh).

    Uses the chart's closed form when present, otherwise central differences
    of the metric with step cbrt(machine eps) * scale.
    """
    p = np.asarray(p, dtype=float)
    if chart.christoffel_fn is not None:
        chart.metric(p)
        return np.asarray(chart.christoffel_fn(p), dtype=float)
    m = chart.dim
    ginv = np.linalg.inv(chart.metric(p))
    h = EPS_STEP * chart.scale
    dg = np.stack([(chart.metric(p + h * e) - chart.metric(p - h * e)) / (2 * h) for e in np.eye(m)])
    # dg[l, i, j] = d_l g_ij
    t = np.einsum("klh->lkh", dg) + np.einsum("hlk->lkh", dg) - dg
    return 0.5 * np.einsum("il,lkh->ikh", ginv, t)


def _frame_partials(chart: MetricChart, p) -> np.ndarray:
    """dF[i] = d F / d p_i by central differences."""
    h = EPS_STEP * chart.scale
    return np.stack([(chart.frame(p + h * e)[0] - chart.frame(p - h * e)[0]) / (2 * h) for e in np.eye(chart.dim)])


def frame_connection(chart: MetricChart, p, v) -> np.ndarray:
    """C[s, l] = <nabla_v e_l, e_s> for the chart frame; v in coordinates."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    F, _ = chart.frame(p)
    if not np.any(v):
        return np.zeros((chart.dim, chart.dim))
    G = christoffel(chart, p)
    dF = np.einsum("i,ikl->kl", v, _frame_partials(chart, p))
    nabla = dF + np.einsum("kih,i,hl->kl", G, v, F)
    return F.T @ chart.metric(p) @ nabla


def normal_connection(chart: MetricChart, p, v) -> np.ndarray:
    """N[k, l] = <D_v xi_l, xi_k>_J for the chart normal frame."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    N0 = chart.normals(p)
    if N0.size == 0:
        return np.zeros((0, 0))
    h = EPS_STEP * chart.scale
    dN = sum(vi * (chart.normals(p + h * e) - chart.normals(p - h * e)) / (2 * h) for vi, e in zip(v, np.eye(chart.dim)))
    return np.einsum("ka,a,la->kl", N0, chart.sig.eps, dN)


def frame_coordinates(chart: MetricChart, p, v) -> np.ndarray:
    """c_j = eps_j <e_j, v> for a coordinate vector v."""
    F, s = chart.frame(p)
    return s * (F.T @ chart.metric(p) @ np.asarray(v, dtype=float))


@dataclass(frozen=True)
class Lift:
    w: np.ndarray
    w_normal: np.ndarray
    vhat: np.ndarray
    Adot: np.ndarray
    Bdot: np.ndarray

    def coefficients(self) -> dict:
        """w_ij for i < j, the coefficients of eps_i A W_ij."""
        m = self.w.shape[0]
        return {(i, j): float(self.w[i, j]) for i in range(m) for j in range(i + 1, m)}


def lift(chart: MetricChart, hat_chart: MetricChart, p, phat, A, v, B=None) -> Lift:
    """Non-twisted lift of the coordinate vector v at the state (p, phat, A, B).

    Returns the algebra coefficients w (antisymmetric), the hat velocity
    v^ = F^ E^ A c in hat coordinates and the predicted A', B'.
    """
    A = np.asarray(A, dtype=float)
    F, E = chart.frame(p)
    Fh, Eh = hat_chart.frame(phat)
    if not np.array_equal(E, Eh):
        raise FrameError("frame sign patterns of the two charts differ")
    c = frame_coordinates(chart, p, v)
    vhat = Fh @ (Eh * (A @ c))
    C = frame_connection(chart, p, v)
    Ch = frame_connection(hat_chart, phat, vhat)
    Ed, Ehd = np.diag(E), np.diag(Eh)
    w = C - A.T @ Ehd @ Ch @ Ehd @ A
    Adot = A @ Ed @ w
    if B is None or np.size(B) == 0:
        return Lift(w, np.zeros((0, 0)), vhat, Adot, np.zeros((0, 0)))
    B = np.asarray(B, dtype=float)
    N = normal_connection(chart, p, v)
    Nh = normal_connection(hat_chart, phat, vhat)
    S = np.diag(chart.normal_signs(p))
    Sh = np.diag(hat_chart.normal_signs(phat))
    wn = N - B.T @ Sh @ Nh @ Sh @ B
    return Lift(w, wn, vhat, Adot, B @ S @ wn)


@dataclass(frozen=True)
class TrivializedCurve:
    times: np.ndarray
    x: np.ndarray
    xhat: np.ndarray
    A: np.ndarray
    B: np.ndarray

    def frozen(self) -> "TrivializedCurve":
        """Same base curves with A and B held at their initial values."""
        return TrivializedCurve(
            self.times, self.x, self.xhat, np.broadcast_to(self.A[0], self.A.shape).copy(), np.broadcast_to(self.B[0], self.B.shape).copy()
        )

    def to_csv(self, path) -> None:
        m, mh = self.x.shape[1], self.xhat.shape[1]
        M = self.B.shape[1] if self.B.ndim == 3 else 0
        header = (
            ["t"]
            + [f"x{k + 1}" for k in range(m)]
            + [f"xhat{k + 1}" for k in range(mh)]
            + [f"A{i + 1}{j + 1}" for i in range(m) for j in range(m)]
            + [f"B{i + 1}{j + 1}" for i in range(M) for j in range(M)]
        )
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for k, t in enumerate(self.times):
                row = [t, *self.x[k], *self.xhat[k], *self.A[k].ravel(), *(self.B[k].ravel() if M else [])]
                w.writerow([fmt(v) for v in row])

    @classmethod
    def from_csv(cls, path) -> "TrivializedCurve":
        with open(path, newline="") as fh:
            header = next(csv.reader(fh))
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        cols = {name: k for k, name in enumerate(header)}
        pick = lambda prefix: [k for name, k in cols.items() if name.startswith(prefix) and name[len(prefix):].isdigit()]
        xi, xhi = pick("x"), pick("xhat")
        m = len(xi)
        ai = [cols[f"A{i + 1}{j + 1}"] for i in range(m) for j in range(m)]
        bi = [k for name, k in cols.items() if name.startswith("B")]
        M = int(round(math.sqrt(len(bi))))
        N = data.shape[0]
        return cls(data[:, 0], data[:, xi], data[:, xhi], data[:, ai].reshape(N, m, m), data[:, bi].reshape(N, M, M))


def trivialize(times, x, xhat, maps, chart: EmbeddedChart, hat_chart: EmbeddedChart, tol: float = 1e-8) -> TrivializedCurve:
    """Read ambient data (x, x^, ambient isometries q = p) in a pair of charts."""
    t = check_grid(times, 1)
    sig = chart.sig
    P = np.array([chart.inverse(xk) for xk in np.asarray(x, dtype=float)])
    Ph = np.array([hat_chart.inverse(xk) for xk in np.asarray(xhat, dtype=float)])
    A, B = [], []
    for p, ph, Q in zip(P, Ph, np.asarray(maps, dtype=float)):
        e, E = chart.ambient_frame(p)
        eh, Eh = hat_chart.ambient_frame(ph)
        if not np.array_equal(E, Eh):
            raise FrameError("frame sign patterns of the two charts differ")
        a = (eh * sig.eps) @ Q @ e.T
        n, nh = chart.normals(p), hat_chart.normals(ph)
        b = (nh * sig.eps) @ Q @ n.T if n.size else np.zeros((0, 0))
        for mat, S, Sh in ((a, E, Eh), (b, chart.normal_signs(p) if n.size else None, hat_chart.normal_signs(ph) if n.size else None)):
            if mat.size and np.max(np.abs(mat.T @ np.diag(Sh) @ mat - np.diag(S))) > tol * max(1.0, float(np.max(np.abs(mat))) ** 2):
                raise GroupConstraintError("configuration matrix violates its group constraint")
        A.append(a)
        B.append(b)
    return TrivializedCurve(t, P, Ph, np.array(A), np.array(B))


def trivialize_rolling(traj, chart: EmbeddedChart, hat_chart: EmbeddedChart) -> TrivializedCurve:
    """Trivialize a hyperquadric rolling, where q and p are both R(t)^{-1}."""
    return trivialize(traj.times, traj.x, traj.xhat, traj.R_inv, chart, hat_chart)


@dataclass(frozen=True)
class HorizontalityReport:
    slip: np.ndarray
    twist: np.ndarray
    normal_twist: np.ndarray

    @property
    def residual(self) -> np.ndarray:
        return np.maximum(self.slip, np.maximum(self.twist, self.normal_twist))


def horizontality_residual(curve: TrivializedCurve, chart: MetricChart, hat_chart: MetricChart) -> HorizontalityReport:
    """Per-sample distance of (x^', A', B') from the lift of x'."""
    t = curve.times
    xd = time_derivative(t, curve.x)
    xhd = time_derivative(t, curve.xhat)
    Ad = time_derivative(t, curve.A)
    has_b = curve.B.ndim == 3 and curve.B.shape[1] > 0
    Bd = time_derivative(t, curve.B) if has_b else None
    slip, twist, ntwist = [], [], []
    for k in range(len(t)):
        L = lift(chart, hat_chart, curve.x[k], curve.xhat[k], curve.A[k], xd[k], curve.B[k] if has_b else None)
        slip.append(np.max(np.abs(xhd[k] - L.vhat)))
        twist.append(np.max(np.abs(Ad[k] - L.Adot)))
        ntwist.append(np.max(np.abs(Bd[k] - L.Bdot)) if has_b else 0.0)
    return HorizontalityReport(np.array(slip), np.array(twist), np.array(ntwist))


@dataclass(frozen=True)
class CausalTrace:
    values: np.ndarray
    gram: np.ndarray
    classes: list
    U: np.ndarray


def causal_trace(A_curve, times, signs, tol: float = 1e-8, zero_tol: float = 1e-8) -> CausalTrace:
    """-tr U^2 with U = A^{-1} A' for a sampled curve in the group of ``signs``.

    A' comes from central differences and A^{-1} = E A^t E. ``gram`` holds
    <<A', A'>> = tr(E A'^t E A') for comparison. A value within ``tol`` of
    zero is Null, unless A' itself vanishes (then Spacelike).
    """
    A = np.asarray(A_curve, dtype=float)
    E = np.diag(np.asarray(signs, dtype=float))
    scale = max(1.0, float(np.max(np.abs(A)))) ** 2
    res = np.max(np.abs(np.swapaxes(A, 1, 2) @ E @ A - E))
    if res > tol * scale:
        raise GroupConstraintError(f"curve leaves the group: residual {res:.3e}")
    Ad = time_derivative(times, A)
    U = E @ np.swapaxes(A, 1, 2) @ E @ Ad
    values = -np.trace(U @ U, axis1=1, axis2=2)
    gram = np.trace(E @ np.swapaxes(Ad, 1, 2) @ E @ Ad, axis1=1, axis2=2)
    classes = [classify_value(v, tol, is_zero=bool(np.max(np.abs(d)) <= zero_tol)) for v, d in zip(values, Ad)]
    return CausalTrace(values, gram, classes, U)


@dataclass(frozen=True)
class TraceFormula:
    tangent: np.ndarray
    normal: np.ndarray
    exact_tangent: np.ndarray
    exact_normal: np.ndarray


def _weighted_sum(E, D):
    return float(np.einsum("i,h,ih->", E, E, D * D))


def causal_trace_formula(curve: TrivializedCurve, chart: MetricChart, hat_chart: MetricChart) -> TraceFormula:
    """Explicit trace expressions built from chart connections.

    ``tangent`` is sum_{i,h} eps_i eps_h (C[i,h] - c_ih C^[i,h])^2 with
    c_ih = sum_{r,s} eps_r eps_s a_rh a_si, where C and C^ are the frame
    connections along x' and x^'. ``normal`` is the same with B and the
    normal connections. ``exact_*`` use w = C - A^t E^ C^ E^ A instead of the
    entrywise weights; the two agree whenever C^ vanishes.
    """
    t = curve.times
    xd = time_derivative(t, curve.x)
    xhd = time_derivative(t, curve.xhat)
    has_b = curve.B.ndim == 3 and curve.B.shape[1] > 0
    out = {k: [] for k in ("t", "n", "et", "en")}
    for k in range(len(t)):
        p, ph, A = curve.x[k], curve.xhat[k], curve.A[k]
        E, Eh = chart.signs(p), hat_chart.signs(ph)
        C = frame_connection(chart, p, xd[k])
        Ch = frame_connection(hat_chart, ph, xhd[k])
        sigma = Eh @ A
        out["t"].append(_weighted_sum(E, C - np.outer(sigma, sigma).T * Ch))
        w = C - A.T @ np.diag(Eh) @ Ch @ np.diag(Eh) @ A
        out["et"].append(_weighted_sum(E, w))
        if has_b:
            B = curve.B[k]
            S, Sh = chart.normal_signs(p), hat_chart.normal_signs(ph)
            N = normal_connection(chart, p, xd[k])
            Nh = normal_connection(hat_chart, ph, xhd[k])
            tau = Sh @ B
            out["n"].append(_weighted_sum(S, N - np.outer(tau, tau).T * Nh))
            wn = N - B.T @ np.diag(Sh) @ Nh @ np.diag(Sh) @ B
            out["en"].append(_weighted_sum(S, wn))
        else:
            out["n"].append(0.0)
            out["en"].append(0.0)
    return TraceFormula(*(np.array(out[k]) for k in ("t", "n", "et", "en")))


# Built-in charts


def lorentz_sphere_chart() -> EmbeddedChart:
    """(a, b) -> (sinh a, cosh a sin b, cosh a cos b) on S_1^2, metric diag(-1, cosh^2 a)."""

    def embed(p):
        a, b = p
        return np.array([math.sinh(a), math.cosh(a) * math.sin(b), math.cosh(a) * math.cos(b)])

    def inverse(x):
        return np.array([math.asinh(x[0]), math.atan2(x[1], x[2])])

    def jac(p):
        a, b = p
        ch, sh = math.cosh(a), math.sinh(a)
        return np.array([[ch, 0.0], [sh * math.sin(b), ch * math.cos(b)], [sh * math.cos(b), -ch * math.sin(b)]])

    def metric(p):
        return np.diag([-1.0, math.cosh(p[0]) ** 2])

    def gamma(p):
        a = p[0]
        G = np.zeros((2, 2, 2))
        G[0, 1, 1] = math.cosh(a) * math.sinh(a)
        G[1, 0, 1] = G[1, 1, 0] = math.tanh(a)
        return G

    return EmbeddedChart(
        Signature(3, 1), 2, 1, embed, inverse, jacobian=jac, metric=metric, christoffel_fn=gamma,
        normal_fn=lambda p: embed(p)[None, :], name="lorentz_sphere",
    )


def affine_chart(sig: Signature, origin, tangent, normals=None, name: str = "affine") -> EmbeddedChart:
    """Flat chart p -> origin + sum_k p_k f_k with orthonormal rows f_k."""
    origin = np.asarray(origin, dtype=float)
    T = np.atleast_2d(np.asarray(tangent, dtype=float))
    s = np.sign(j_inner(T, T, sig))
    if np.max(np.abs((T * sig.eps) @ T.T - np.diag(s))) > FRAME_TOL:
        raise FrameError("affine chart basis is not orthonormal")
    if normals is None:
        Nrm, _ = orthonormal_complement(list(T), sig)
    else:
        Nrm = np.atleast_2d(np.asarray(normals, dtype=float))
    m = T.shape[0]
    g = np.diag(s)
    return EmbeddedChart(
        sig, m, int(np.sum(s < 0)),
        embed=lambda p: origin + np.asarray(p) @ T,
        inverse=lambda x: s * ((T * sig.eps) @ (np.asarray(x) - origin)),
        jacobian=lambda p: T.T,
        metric=lambda p: g,
        christoffel_fn=lambda p: np.zeros((m, m, m)),
        normal_fn=lambda p: Nrm,
        name=name,
    )


def tangent_plane_chart(hq, x0) -> EmbeddedChart:
    """Affine chart of T^aff_{x0} with the hyperquadric's tangent basis and normal x0."""
    x0 = hq.require(x0)
    basis, _ = hq.tangent_basis(x0)
    return affine_chart(hq.sig, x0, basis, [x0 / math.sqrt(abs(hq.level))], name="tangent_plane")


def cylinder_chart(alpha: float = 0.0, beta: float = 0.0) -> EmbeddedChart:
    """Flat Lorentzian cylinder (a, b) -> (sinh a, cosh a, cos b, sin b) in R^4_1.

    Its natural normals (sinh a, cosh a, 0, 0) and (0, 0, cos b, sin b) are
    parallel; the chart uses them rotated by the angle alpha a + beta b so
    that the normal connection is nonzero.
    """

    def embed(p):
        a, b = p
        return np.array([math.sinh(a), math.cosh(a), math.cos(b), math.sin(b)])

    def inverse(x):
        return np.array([math.asinh(x[0]), math.atan2(x[3], x[2])])

    def jac(p):
        a, b = p
        return np.array([[math.cosh(a), 0.0], [math.sinh(a), 0.0], [0.0, -math.sin(b)], [0.0, math.cos(b)]])

    def normals(p):
        a, b = p
        n1 = np.array([math.sinh(a), math.cosh(a), 0.0, 0.0])
        n2 = np.array([0.0, 0.0, math.cos(b), math.sin(b)])
        th = alpha * a + beta * b
        return np.array([math.cos(th) * n1 + math.sin(th) * n2, -math.sin(th) * n1 + math.cos(th) * n2])

    return EmbeddedChart(
        Signature(4, 1), 2, 1, embed, inverse, jacobian=jac, metric=lambda p: np.diag([-1.0, 1.0]),
        christoffel_fn=lambda p: np.zeros((2, 2, 2)), normal_fn=normals, name="cylinder",
    )


def cylinder_partner_chart(alpha: float = 0.0) -> EmbeddedChart:
    """Flat plane (p1, 1, p2, 0) in R^4_1 with normals rotated by alpha p1."""
    sig = Signature(4, 1)
    T = np.array([[1.0, 0, 0, 0], [0, 0, 1.0, 0]])
    base = affine_chart(sig, [0, 1.0, 0, 0], T, name="cylinder_partner")
    if alpha == 0.0:
        return base

    def normals(p):
        th = alpha * p[0]
        n1, n2 = np.array([0, 1.0, 0, 0]), np.array([0, 0, 0, 1.0])
        return np.array([math.cos(th) * n1 + math.sin(th) * n2, -math.sin(th) * n1 + math.cos(th) * n2])

    base.normal_fn = normals
    return base


CHARTS = {
    "lorentz_sphere": lorentz_sphere_chart,
    "cylinder": cylinder_chart,
    "cylinder_partner": cylinder_partner_chart,
}


class ChartGeometry:
    """Geometry interface (projections, transport generator) of an embedded chart.

    Lets :func:`pseudoroll.intrinsic.parallel_frame_along` run on manifolds
    other than hyperquadrics.
    """

    def __init__(self, chart: EmbeddedChart):
        self.chart = chart
        self.sig = chart.sig

    def projector(self, x) -> np.ndarray:
        e, s = self.chart.ambient_frame(self.chart.inverse(np.asarray(x, dtype=float)))
        return np.einsum("k,ka,kb->ab", s, e, e) @ self.sig.J

    def tangent_project(self, x, v) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        if x.ndim == 1 and v.ndim == 1:
            return self.projector(x) @ v
        xb, vb = np.broadcast_arrays(x, v)
        out = np.empty_like(vb)
        for idx in np.ndindex(xb.shape[:-1]):
            out[idx] = self.projector(xb[idx]) @ vb[idx]
        return out

    def normal_project(self, x, v) -> np.ndarray:
        return np.asarray(v, dtype=float) - self.tangent_project(x, v)

    def transport_generator(self, x, xdot) -> np.ndarray:
        """K = P' P - P P' with P' the derivative of the projector along x'."""
        x = np.asarray(x, dtype=float)
        xdot = np.asarray(xdot, dtype=float)
        h = EPS_STEP * self.chart.scale
        P = self.projector(x)
        dP = (self.projector(x + h * xdot) - self.projector(x - h * xdot)) / (2 * h)
        return dP @ P - P @ dP
