"""Parallel frames, constant configuration matrices and the freedom of intrinsic rollings.

Along a rolling, the tangent isometry q(t) and the normal isometry p(t)
read in parallel orthonormal frames give matrices

    a_ij = <e^_i, q e_j>_J,    b_kl = <eps^_k, p eps_l>_J,

which stay constant in time. When the velocity of the rolling curve spans
fewer than m directions of a parallel frame, the rolling is not unique; the
freedom is an isometry of the parallel fields normal to the curve.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import FrameError, GridError, NormalizationError, SignatureError
from .hyperquadric import CurveSamples, fmt, second_time_derivative, time_derivative
from .linalg import (
    ORIENTATION_GROUPS,
    Signature,
    expm,
    indefinite_orthonormalize,
    j_inner,
    orientation_component,
)

FRAME_TOL = 1e-8
PARALLEL_TOL = 1e-5


class Flavor(str, enum.Enum):
    TANGENT = "tangent"
    NORMAL = "normal"


@dataclass(frozen=True)
class ParallelFrame:
    """Frame vectors ``vectors[k, i]`` at time ``times[k]`` with ``<f_i, f_j> = signs[i] delta_ij``."""

    times: np.ndarray
    vectors: np.ndarray
    signs: np.ndarray
    flavor: Flavor

    def __len__(self) -> int:
        return self.vectors.shape[1]

    def at(self, k: int) -> np.ndarray:
        return self.vectors[k]

    def gram_residual(self, sig: Signature) -> float:
        G = np.einsum("kai,i,kbi->kab", self.vectors, sig.eps, self.vectors)
        return float(np.max(np.abs(G - np.diag(self.signs))))

    def derivative_residual(self, geom, curve: CurveSamples) -> float:
        """Max norm of the covariant (or normal) derivative of each field."""
        project = geom.tangent_project if self.flavor is Flavor.TANGENT else geom.normal_project
        worst = 0.0
        for i in range(len(self)):
            d = project(curve.points, time_derivative(self.times, self.vectors[:, i]))
            worst = max(worst, float(np.max(np.abs(d))))
        return worst

    def combine(self, C) -> "ParallelFrame":
        """New frame f'_b = sum_a C[a, b] f_a (constant coefficients keep parallelness)."""
        C = np.asarray(C, dtype=float)
        vecs = np.einsum("kai,ab->kbi", self.vectors, C)
        signs = np.einsum("ab,a,ab->b", C, self.signs, C)
        return ParallelFrame(self.times, vecs, np.round(signs), self.flavor)

    def to_csv(self, path, deviation=None) -> None:
        N, k, n = self.vectors.shape
        header = ["t"] + [f"f{i + 1}_{c + 1}" for i in range(k) for c in range(n)]
        if deviation is not None:
            header.append("deviation")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for j in range(N):
                row = [fmt(self.times[j])] + [fmt(v) for v in self.vectors[j].ravel()]
                if deviation is not None:
                    row.append(fmt(deviation[j]))
                w.writerow(row)


def frame_signs(frame, sig: Signature, tol: float = FRAME_TOL) -> np.ndarray:
    """Sign pattern of an orthonormal frame; raises FrameError otherwise."""
    F = np.atleast_2d(np.asarray(frame, dtype=float))
    if F.shape[1] != sig.n:
        raise FrameError(f"frame vectors must have length {sig.n}")
    G = (F * sig.eps) @ F.T
    d = np.diag(G)
    if np.any(np.abs(np.abs(d) - 1.0) > tol):
        raise FrameError("frame vectors are not unit")
    if np.max(np.abs(G - np.diag(d))) > tol:
        raise FrameError("frame vectors are not mutually orthogonal")
    return np.sign(d)


def _cubic(times, values, tau):
    """Cubic Lagrange interpolation of samples and its derivative at ``tau``."""
    N = len(times)
    k = int(np.clip(np.searchsorted(times, tau) - 2, 0, max(0, N - 4)))
    idx = range(k, min(k + 4, N))
    val = np.zeros(values.shape[1:])
    der = np.zeros(values.shape[1:])
    for i in idx:
        others = [j for j in idx if j != i]
        denom = np.prod([times[i] - times[j] for j in others])
        num = np.prod([tau - times[j] for j in others])
        dnum = sum(np.prod([tau - times[j] for j in others if j != l]) for l in others)
        val = val + values[i] * (num / denom)
        der = der + values[i] * (dnum / denom)
    return val, der


_G1 = 0.5 - math.sqrt(3) / 6
_G2 = 0.5 + math.sqrt(3) / 6


def parallel_frame_along(geom, curve: CurveSamples, frame0, flavor: str | Flavor = Flavor.TANGENT, tol: float = FRAME_TOL) -> ParallelFrame:
    """Transport ``frame0`` (rows) along the sampled curve.

    Parallel fields of either flavor solve f' = K(t) f with the algebra
    element K = geom.transport_generator(x, x'). The ODE is integrated by a
    fourth-order Magnus step with Gauss nodes; x and x' at the nodes come
    from cubic interpolation of the samples.
    """
    flavor = Flavor(flavor)
    sig = geom.sig
    F0 = np.atleast_2d(np.asarray(frame0, dtype=float))
    signs = frame_signs(F0, sig, tol)
    x_start = curve.points[0]
    wrong = geom.normal_project if flavor is Flavor.TANGENT else geom.tangent_project
    if np.max(np.abs(wrong(np.broadcast_to(x_start, F0.shape), F0))) > tol:
        raise FrameError(f"initial frame is not {flavor.value} at the curve start")
    t, pts = curve.times, curve.points
    N = len(t)
    out = np.empty((N,) + F0.shape)
    out[0] = F0
    F = F0.T.copy()
    for k in range(N - 1):
        h = t[k + 1] - t[k]
        if N >= 4:
            xa, va = _cubic(t, pts, t[k] + _G1 * h)
            xb, vb = _cubic(t, pts, t[k] + _G2 * h)
        else:
            v = (pts[k + 1] - pts[k]) / h
            xa, xb = pts[k] + _G1 * h * v, pts[k] + _G2 * h * v
            va = vb = v
        K1 = geom.transport_generator(xa, va)
        K2 = geom.transport_generator(xb, vb)
        step = 0.5 * h * (K1 + K2) + (math.sqrt(3) / 12) * h * h * (K2 @ K1 - K1 @ K2)
        if np.any(step):
            F = expm(step) @ F
        out[k + 1] = F.T
    return ParallelFrame(t, out, signs, flavor)


@dataclass(frozen=True)
class ConfigurationCurve:
    times: np.ndarray
    A: np.ndarray
    B: np.ndarray
    x: np.ndarray
    xhat: np.ndarray

    def deviation(self) -> np.ndarray:
        """Per-sample max distance of A(t), B(t) from their values at t=0."""
        dA = np.max(np.abs(self.A - self.A[0]), axis=(1, 2))
        dB = np.max(np.abs(self.B - self.B[0]), axis=(1, 2)) if self.B.size else np.zeros_like(dA)
        return np.maximum(dA, dB)


@dataclass(frozen=True)
class ConfigurationResult:
    A: np.ndarray
    B: np.ndarray
    deviation: float
    curve: ConfigurationCurve


def frame_matrix(hat_frame: ParallelFrame, maps: np.ndarray, frame: ParallelFrame, sig: Signature) -> np.ndarray:
    """Per-sample matrix <hat_i, Q e_j>_J for linear maps Q(t)."""
    img = np.einsum("kab,kjb->kja", maps, frame.vectors)
    return np.einsum("kia,a,kja->kij", hat_frame.vectors, sig.eps, img)


def configuration_matrices(
    traj,
    frame: ParallelFrame,
    hat_frame: ParallelFrame,
    normal_frame: ParallelFrame | None = None,
    hat_normal_frame: ParallelFrame | None = None,
    parallel_tol: float = PARALLEL_TOL,
) -> ConfigurationResult:
    """A and B of a rolling trajectory, where q = p = R^{-1}.

    Frames along x are checked against the hyperquadric and frames along
    x^ against the affine plane; a derivative residual above
    ``parallel_tol`` raises FrameError. Without normal frames, the normal
    line is spanned by x(t) and x0, which gives the codimension-one B.
    """
    sig = traj.sig
    xc = CurveSamples(traj.times, traj.x)
    xhc = CurveSamples(traj.times, traj.xhat)
    if normal_frame is None:
        r = traj.hq.level
        scale = 1.0 / math.sqrt(abs(r))
        normal_frame = ParallelFrame(traj.times, traj.x[:, None, :] * scale, np.array([np.sign(r)]), Flavor.NORMAL)
        hat_normal_frame = ParallelFrame(
            traj.times, np.broadcast_to(traj.x0 * scale, (len(traj.times), 1, sig.n)), np.array([np.sign(r)]), Flavor.NORMAL
        )
    checks = [
        (frame, traj.hq, xc),
        (hat_frame, traj.plane, xhc),
        (normal_frame, traj.hq, xc),
        (hat_normal_frame, traj.plane, xhc),
    ]
    for fr, geom, cv in checks:
        res = fr.derivative_residual(geom, cv)
        if res > parallel_tol:
            raise FrameError(f"{fr.flavor.value} frame is not parallel (residual {res:.2e})")
    Rinv = traj.R_inv
    A = frame_matrix(hat_frame, Rinv, frame, sig)
    B = frame_matrix(hat_normal_frame, Rinv, normal_frame, sig)
    cc = ConfigurationCurve(traj.times, A, B, traj.x, traj.xhat)
    return ConfigurationResult(A.mean(axis=0), B.mean(axis=0), float(cc.deviation().max()), cc)


def freedom_dimension(curve: CurveSamples, frame: ParallelFrame, sig: Signature, tol: float = 1e-6) -> int:
    """k = m - rank of the sampled velocity coordinates in a parallel frame.

    The rank uses singular values above ``tol * sigma_max``. A curve that
    never moves has k = m.
    """
    if len(curve) < 3:
        raise GridError("freedom_dimension needs at least 3 samples")
    C = velocity_coords(curve, frame, sig)
    m = C.shape[1]
    s = np.linalg.svd(C, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return m
    return int(m - np.sum(s > tol * s[0]))


def velocity_coords(curve: CurveSamples, frame: ParallelFrame, sig: Signature) -> np.ndarray:
    """c_j(t) = eps_j <e_j(t), x'(t)>_J, so that x' = sum_j c_j e_j."""
    v = curve.velocity()
    return np.einsum("kji,i,ki->kj", frame.vectors, sig.eps, v) * frame.signs


def freedom_subspace(curve: CurveSamples, frame: ParallelFrame, sig: Signature, tol: float = 1e-6):
    """Adapted coefficient matrix C and the induced sign pattern xi of V.

    Columns of C are frame coordinates; the first k span V, the parallel
    fields normal to the curve, and the rest complete an orthonormal basis.
    ``frame.combine(C)`` is the adapted parallel frame.
    """
    Cv = velocity_coords(curve, frame, sig)
    E = np.diag(frame.signs)
    m = Cv.shape[1]
    k = freedom_dimension(curve, frame, sig, tol)
    # V = {y : y^t E c(t) = 0 for all t}: null space of the sampled rows c^t E
    _, s, Vt = np.linalg.svd(Cv @ E)
    null = Vt[m - k :] if k else np.zeros((0, m))
    if k:
        basis_v, xi = indefinite_orthonormalize(list(null), E, pivot=False)
    else:
        basis_v, xi = np.zeros((0, m)), np.zeros(0)
    rest = np.zeros((0, m))
    if k < m:
        # E-orthogonal complement of V
        Q = np.eye(m)
        if k:
            Q = Q - basis_v.T @ np.diag(xi) @ basis_v @ E
        rest, _ = indefinite_orthonormalize(list(Q.T), E)
    cols = np.vstack([basis_v, np.asarray(rest).reshape(-1, m)]).T
    return cols, np.asarray(xi), k


def freedom_action(A, k: int, A_prime, signs=None, group: str = "identity", tol: float = 1e-9) -> np.ndarray:
    """A composed with the block isometry diag(A', I_{m-k}) in an adapted frame.

    ``signs`` is the sign pattern xi of V (Euclidean by default). A' has to
    satisfy A'^t E_xi A' = E_xi and lie in the chosen G-component; for
    k <= 1 that forces A' = I.
    """
    A = np.asarray(A, dtype=float)
    m = A.shape[0]
    if not 0 <= k <= m:
        raise SignatureError(f"k={k} outside 0..{m}")
    Ap = np.asarray(A_prime, dtype=float).reshape(k, k)
    xi = np.ones(k) if signs is None else np.asarray(signs, dtype=float)
    if xi.shape != (k,) or np.any(np.abs(np.abs(xi) - 1) > 0):
        raise SignatureError("sign pattern of V must have k entries equal to +-1")
    if k:
        E = np.diag(xi)
        if np.max(np.abs(Ap.T @ E @ Ap - E)) > tol:
            raise SignatureError("A' is not an isometry of the induced signature")
        order = np.argsort(xi, kind="stable")
        P = Ap[np.ix_(order, order)]
        comp = orientation_component(P, Signature(k, int(np.sum(xi < 0))), tol=1e-12)
        if comp not in ORIENTATION_GROUPS[group]:
            raise SignatureError(f"A' lies in component {comp.name}, outside the {group} group")
    block = np.eye(m)
    block[:k, :k] = Ap
    return A @ block


def freedom_isometry(V_vectors, A_prime, sig: Signature) -> np.ndarray:
    """Ambient isometry acting as A' on span(V_vectors) and as the identity on its complement.

    ``V_vectors`` are orthonormal rows f_1..f_k; the map sends
    f_j to sum_l A'[l, j] f_l. Starting the kinematic equations at
    R(0) = G^{-1} realizes :func:`freedom_action` as a rolling along the same curves.
    """
    F = np.atleast_2d(np.asarray(V_vectors, dtype=float))
    xi = frame_signs(F, sig)
    Ap = np.asarray(A_prime, dtype=float)
    images = Ap.T @ F  # row j = sum_l A'[l, j] f_l
    return np.eye(sig.n) + np.einsum("ja,j,jb->ab", images - F, xi, F * sig.eps)


@dataclass(frozen=True)
class ExtrinsicExtension:
    times: np.ndarray
    P: np.ndarray
    B0: np.ndarray
    p: np.ndarray

    def B(self, normal_frame: ParallelFrame, hat_normal_frame: ParallelFrame, sig: Signature) -> np.ndarray:
        return frame_matrix(hat_normal_frame, self.p, normal_frame, sig)


def extend_to_extrinsic(normal_frame: ParallelFrame, hat_normal_frame: ParallelFrame, p0, sig: Signature, tol: float = 1e-9) -> ExtrinsicExtension:
    """Unique normal part p(t) of the rolling with initial normal map ``p0``.

    ``p0`` is given in frame coordinates, p0 eps_l(0) = sum_k P[k, l] eps^_k(0),
    and must map the sign pattern of one frame onto the other. In parallel
    frames the coordinates stay fixed, B0 = E^ P, and p(t) is rebuilt from
    the frames at each sample.
    """
    P = np.atleast_2d(np.asarray(p0, dtype=float))
    E = np.diag(normal_frame.signs)
    Eh = np.diag(hat_normal_frame.signs)
    if P.shape != E.shape or np.max(np.abs(P.T @ Eh @ P - E)) > tol:
        raise SignatureError("p0 is not an isometry between the normal frames")
    eps_l = normal_frame.vectors  # (N, M, n)
    eps_h = hat_normal_frame.vectors
    # p(t) v = sum_l eps_l <eps_l(t), v> sum_k P[k, l] eps^_k(t)
    img = np.einsum("kl,tkn->tln", P, eps_h)
    p = np.einsum("tla,l,tlb,b->tab", img, normal_frame.signs, eps_l, sig.eps)
    return ExtrinsicExtension(normal_frame.times, P, Eh @ P, p)


def covariant_acceleration(geom, curve: CurveSamples) -> np.ndarray:
    return geom.tangent_project(curve.points, second_time_derivative(curve.times, curve.points))


def geodesic_pair_check(geom, x: CurveSamples, hat_geom, xhat: CurveSamples, tol: float = 1e-5) -> bool:
    """Both curves geodesic and <x', x'> = <x^', x^'> sample-wise."""
    if len(x) < 3 or len(xhat) < 3:
        raise GridError("geodesic_pair_check needs at least 3 samples")
    if not np.array_equal(x.times, xhat.times):
        raise GridError("curves must share a time grid")
    if np.max(np.abs(covariant_acceleration(geom, x))) > tol:
        return False
    if np.max(np.abs(covariant_acceleration(hat_geom, xhat))) > tol:
        return False
    v, vh = x.velocity(), xhat.velocity()
    return bool(np.max(np.abs(j_inner(v, v, geom.sig) - j_inner(vh, vh, hat_geom.sig))) <= tol)


def geodesic_adapted_frame(hq, x0, u, tol: float = 1e-9):
    """Orthonormal tangent frame at x0 whose last vector is the unit velocity u.

    Null velocities cannot be normalized and raise NormalizationError.
    """
    sig = hq.sig
    u = np.asarray(u, dtype=float)
    uu = float(j_inner(u, u, sig))
    if abs(uu) <= tol:
        raise NormalizationError("null velocity has no unit normalization")
    u = u / math.sqrt(abs(uu))
    basis, signs = hq.tangent_basis(x0)
    rest = [b - (j_inner(b, u, sig) / np.sign(uu)) * u for b in basis]
    others, osigns = indefinite_orthonormalize(rest, sig)
    return np.vstack([others, u]), np.concatenate([osigns, [np.sign(uu)]])
