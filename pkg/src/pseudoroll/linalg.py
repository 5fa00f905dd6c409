"""Signature-aware linear algebra on R^n_nu.

Everything here works on plain numpy arrays. The scalar product is
<x, y>_J = x^t J y with J = diag(-I_nu, I_{n-nu}); the pseudo-orthogonal
group O_nu(n) is {X : X^t J X = J} and its Lie algebra o_nu(n) is
{A : A^t J = -J A}.

Indices passed to :func:`lie_basis`, :func:`commutator_W` and
:func:`left_right_convert` are 0-based.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    AlgebraConstraintError,
    DegenerateBlockError,
    DegenerateSubspaceError,
    DimensionError,
    GroupConstraintError,
    IndexOrderError,
)

NULL_TOL = 1e-9
GROUP_TOL = 1e-9


@dataclass(frozen=True)
class Signature:
    """Ambient dimension ``n`` and index ``nu`` (number of timelike axes)."""

    n: int
    nu: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DimensionError(f"dimension must be a positive integer, got {self.n}")
        if int(self.nu) != self.nu or not 0 <= self.nu <= self.n:
            raise DimensionError(f"index must lie in [0, {self.n}], got {self.nu}")

    @cached_property
    def eps(self) -> np.ndarray:
        """Sign pattern: -1 for the first ``nu`` axes, +1 for the rest."""
        e = np.ones(self.n)
        e[: self.nu] = -1.0
        return e

    @cached_property
    def J(self) -> np.ndarray:
        return np.diag(self.eps)

    @classmethod
    def from_signs(cls, signs) -> "Signature":
        signs = np.asarray(signs)
        nu = int(np.sum(signs < 0))
        if not np.all(signs[:nu] < 0) or not np.all(signs[nu:] > 0):
            raise DimensionError(f"signs must be timelike-first, got {signs.tolist()}")
        return cls(len(signs), nu)


class CausalClass(str, enum.Enum):
    TIMELIKE = "Timelike"
    SPACELIKE = "Spacelike"
    NULL = "Null"


class OrientationComponent(str, enum.Enum):
    """Connected component of O_nu(n), labelled by signs of det(A_T), det(A_S)."""

    PP = "PP"
    PM = "PM"
    MP = "MP"
    MM = "MM"

    @property
    def signs(self) -> tuple[int, int]:
        return (1 if self.value[0] == "P" else -1, 1 if self.value[1] == "P" else -1)

    @classmethod
    def from_signs(cls, time_sign: int, space_sign: int) -> "OrientationComponent":
        return cls(("P" if time_sign > 0 else "M") + ("P" if space_sign > 0 else "M"))

    def __mul__(self, other: "OrientationComponent") -> "OrientationComponent":
        a, b = self.signs
        c, d = other.signs
        return OrientationComponent.from_signs(a * c, b * d)


# Groups G of the three orientation notions, plus the identity component alone.
ORIENTATION_GROUPS = {
    "identity": frozenset({OrientationComponent.PP}),
    "orientation": frozenset({OrientationComponent.PP, OrientationComponent.MM}),
    "time": frozenset({OrientationComponent.PP, OrientationComponent.PM}),
    "space": frozenset({OrientationComponent.PP, OrientationComponent.MP}),
}


def _gram(metric) -> np.ndarray:
    if isinstance(metric, Signature):
        return metric.J
    return np.asarray(metric, dtype=float)


def _check_vec(x, sig: Signature) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != sig.n:
        raise DimensionError(f"expected vectors of length {sig.n}, got shape {x.shape}")
    return x


def _check_square(A, sig: Signature) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.shape[-2:] != (sig.n, sig.n):
        raise DimensionError(f"expected {sig.n}x{sig.n} matrices, got shape {A.shape}")
    return A


def j_inner(x, y, sig: Signature):
    """<x, y>_J. Broadcasts over leading axes."""
    x = _check_vec(x, sig)
    y = _check_vec(y, sig)
    return np.einsum("...i,i,...i->...", x, sig.eps, y)


def j_norm_sq(x, sig: Signature):
    return j_inner(x, x, sig)


def classify_value(value: float, tol: float = NULL_TOL, is_zero: bool = False) -> CausalClass:
    """Causal class of a squared norm; the zero element counts as spacelike."""
    if is_zero:
        return CausalClass.SPACELIKE
    if value < -tol:
        return CausalClass.TIMELIKE
    if value > tol:
        return CausalClass.SPACELIKE
    return CausalClass.NULL


def causal_class(x, sig: Signature, tol: float = NULL_TOL) -> CausalClass:
    x = _check_vec(x, sig)
    return classify_value(float(j_inner(x, x, sig)), tol, is_zero=not np.any(x))


def j_adjoint(A, sig: Signature) -> np.ndarray:
    """A^J = J A^t J; equals A^{-1} on the group."""
    A = _check_square(A, sig)
    e = sig.eps
    return e[:, None] * np.swapaxes(A, -1, -2) * e[None, :]


def group_residual(A, sig: Signature) -> float:
    """max |A^t J A - J| entrywise (over all leading axes)."""
    A = _check_square(A, sig)
    R = np.swapaxes(A, -1, -2) @ (sig.eps[:, None] * A) - sig.J
    return float(np.max(np.abs(R)))


def algebra_residual(A, sig: Signature) -> float:
    A = _check_square(A, sig)
    R = np.swapaxes(A, -1, -2) @ sig.J + sig.J @ A
    return float(np.max(np.abs(R)))


def is_group_element(A, sig: Signature, tol: float = GROUP_TOL) -> bool:
    return group_residual(A, sig) <= tol


def is_algebra_element(A, sig: Signature, tol: float = GROUP_TOL) -> bool:
    return algebra_residual(A, sig) <= tol


def matrix_j_inner(A, B, sig: Signature) -> float:
    """<<A, B>>_J = tr(A^J B)."""
    A = _check_square(A, sig)
    B = _check_square(B, sig)
    return float(np.trace(j_adjoint(A, sig) @ B))


def orientation_component(A, sig: Signature, tol: float = 1e-12) -> OrientationComponent:
    """Component of O_nu(n) containing ``A``.

    A missing block (nu = 0 or nu = n) contributes determinant +1.
    """
    A = _check_square(A, sig)
    nu = sig.nu
    det_t = np.linalg.det(A[:nu, :nu]) if nu > 0 else 1.0
    det_s = np.linalg.det(A[nu:, nu:]) if nu < sig.n else 1.0
    if abs(det_t) <= tol or abs(det_s) <= tol:
        raise DegenerateBlockError(f"block determinants too small: {det_t:.3e}, {det_s:.3e}")
    return OrientationComponent.from_signs(np.sign(det_t), np.sign(det_s))


# Pade(13) coefficients and the matching scaling threshold (Higham 2005).
_PADE13 = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
)
_THETA13 = 5.371920351148152


def expm(A: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a fixed [13/13] Pade approximant."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    norm = np.linalg.norm(A, 1)
    s = 0
    if norm > _THETA13:
        s = int(np.ceil(np.log2(norm / _THETA13)))
        A = A / 2.0**s
    b = [c / _PADE13[0] for c in _PADE13]  # unit constant term: exp(0) = I exactly
    ident = np.eye(n)
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A4 @ A2
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
    V = A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident
    X = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        X = X @ X
    return X


def matrix_exp(A, sig: Signature, tol: float = GROUP_TOL) -> np.ndarray:
    """exp of an element of o_nu(n); raises if ``A`` is not in the algebra."""
    A = _check_square(A, sig)
    scale = max(1.0, float(np.max(np.abs(A))))
    if algebra_residual(A, sig) > tol * scale:
        raise AlgebraConstraintError("matrix is not in o_nu(n): A^t J + J A != 0")
    return expm(A)


def _check_pair(i: int, j: int, n: int):
    if not (0 <= i < j < n):
        raise IndexOrderError(f"need 0 <= i < j < {n}, got ({i}, {j})")


def lie_basis(i: int, j: int, sig: Signature, dtype=float) -> np.ndarray:
    """W_ij = E_ij - eps_i eps_j E_ji for i < j."""
    _check_pair(i, j, sig.n)
    W = np.zeros((sig.n, sig.n), dtype=dtype)
    W[i, j] = 1
    W[j, i] = -int(sig.eps[i] * sig.eps[j])
    return W


def _unit(n: int, a: int, b: int) -> np.ndarray:
    E = np.zeros((n, n), dtype=np.int64)
    E[a, b] = 1
    return E


def commutator_W(i: int, j: int, k: int, l: int, sig: Signature) -> np.ndarray:
    """Closed-form [W_ij, W_kl] as an integer matrix."""
    n = sig.n
    _check_pair(i, j, n)
    _check_pair(k, l, n)
    e = sig.eps.astype(np.int64)
    p = e[i] * e[j] * e[k] * e[l]
    E = lambda a, b: _unit(n, a, b)  # noqa: E731
    out = np.zeros((n, n), dtype=np.int64)
    if j == k:
        out += E(i, l) - p * E(l, i)
    if i == l:
        out -= E(k, j) - p * E(j, k)
    if i == k:
        out += -e[i] * e[j] * E(j, l) + e[k] * e[l] * E(l, j)
    if j == l:
        out -= -e[i] * e[j] * E(k, i) + e[k] * e[l] * E(i, k)
    return out


def left_right_convert(A, i: int, j: int, sig: Signature, tol: float = GROUP_TOL) -> dict:
    """Coefficients c_rs with W_ij A = sum_{r<s} c_rs A W_rs.

    c_rs = eps_i eps_r (a_js a_ir - a_is a_jr).
    """
    A = _check_square(A, sig)
    _check_pair(i, j, sig.n)
    if group_residual(A, sig) > tol * max(1.0, float(np.max(np.abs(A)))) ** 2:
        raise GroupConstraintError("left_right_convert needs a group element")
    e = sig.eps
    return {
        (r, s): float(e[i] * e[r] * (A[j, s] * A[i, r] - A[i, s] * A[j, r]))
        for r, s in itertools.combinations(range(sig.n), 2)
    }


def indefinite_orthonormalize(vectors, metric, tol: float = NULL_TOL, pivot: bool = True):
    """Gram-Schmidt for an indefinite scalar product.

    Args:
        vectors: sequence of k vectors (rows).
        metric: a :class:`Signature` or an explicit symmetric Gram matrix.
        tol: pivots with ``|<v,v>| <= tol`` are treated as null.
        pivot: pick the remaining vector of largest ``|<v,v>|`` at every step.
            With ``pivot=False`` the input order is kept, which makes the result
            depend smoothly on the inputs (used for chart frames).

    Returns:
        ``(frame, signs)``: orthonormal rows ordered timelike-first and the
        sign pattern ``<f_i, f_i>``. Residual vectors that vanish (linear
        dependence) are dropped.

    Raises:
        DegenerateSubspaceError: the span contains a nonzero null direction
            orthogonal to everything else, i.e. the induced form is degenerate.
    """
    G = _gram(metric)
    V = [np.array(v, dtype=float) for v in vectors]
    if not V:
        return np.zeros((0, G.shape[0])), np.zeros(0)
    if any(v.shape != (G.shape[0],) for v in V):
        raise DimensionError("vector length does not match the metric")
    scale = max(1.0, max(float(np.max(np.abs(v))) for v in V))
    drop = 1e-12 * scale
    out, signs = [], []
    while V:
        V = [v for v in V if np.max(np.abs(v)) > drop]
        if not V:
            break
        norms = np.array([v @ G @ v for v in V])
        if pivot:
            idx = int(np.argmax(np.abs(norms)))
        else:
            idx = 0
        if abs(norms[idx]) <= tol:
            # Null pivot: try a sum with a partner it pairs nontrivially with.
            cross = np.array([[a @ G @ b for b in V] for a in V])
            np.fill_diagonal(cross, 0.0)
            if pivot:
                a, b = np.unravel_index(int(np.argmax(np.abs(cross))), cross.shape)
            else:
                a, b = idx, int(np.argmax(np.abs(cross[idx])))
            if abs(cross[a, b]) <= tol:
                raise DegenerateSubspaceError("vectors span a degenerate subspace")
            V[a] = V[a] + np.sign(cross[a, b]) * V[b]
            continue
        v = V.pop(idx)
        sgn = 1.0 if norms[idx] > 0 else -1.0
        f = v / np.sqrt(abs(norms[idx]))
        out.append(f)
        signs.append(sgn)
        V = [w - sgn * (f @ G @ w) * f for w in V]
    order = sorted(range(len(out)), key=lambda k: signs[k] > 0)
    return np.array([out[k] for k in order]), np.array([signs[k] for k in order])


def orthonormal_complement(vectors, sig: Signature, tol: float = NULL_TOL):
    """Orthonormal basis of the J-orthogonal complement of span(vectors).

    The span must be nondegenerate. Returns ``(frame, signs)``, timelike-first.
    """
    F, s = indefinite_orthonormalize(vectors, sig, tol)
    rest = []
    for k in range(sig.n):
        w = np.zeros(sig.n)
        w[k] = 1.0
        for f, sg in zip(F, s):
            w = w - sg * j_inner(f, w, sig) * f
        rest.append(w)
    return indefinite_orthonormalize(rest, sig, tol)


def random_group_element(sig: Signature, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """exp of a random algebra element with standard normal coordinates times ``scale``."""
    X = np.zeros((sig.n, sig.n))
    for i, j in itertools.combinations(range(sig.n), 2):
        X += scale * rng.standard_normal() * lie_basis(i, j, sig)
    return expm(X)
