"""Which points of S_1^m can be reached from x0 by rolling along one geodesic.

Everything is decided by the scalar product inner = <x0, x1>_J:

    inner > 1        timelike geodesic  x0 cosh t + u sinh t
    inner = 1        null geodesic      x0 + t u
    -1 < inner < 1   spacelike geodesic x0 cos t + u sin t
    x1 = -x0         spacelike, t1 = pi
    otherwise        not reachable along a single geodesic
"""

from __future__ import annotations

import csv
import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTargetError, MembershipError
from .hyperquadric import Hyperquadric, fmt, geodesic
from .linalg import Signature, j_inner

BOUNDARY_TOL = 1e-9
CLAMP = 1e-12


class Kind(str, enum.Enum):
    TIMELIKE = "TimelikeGeodesic"
    NULL = "NullGeodesic"
    SPACELIKE = "SpacelikeGeodesic"
    ANTIPODAL = "Antipodal"
    NOT_SINGLE = "NotSingleGeodesic"


class Region(str, enum.Enum):
    ON_TANGENT = "OnAffineTangent"
    BEYOND_TANGENT = "BeyondAffineTangent"
    BETWEEN = "BetweenPlanes"
    ANTIPODAL_SIDE = "AtOrBeyondAntipodalPlane"


@dataclass(frozen=True)
class ReachabilityResult:
    kind: Kind
    inner: float
    u: np.ndarray | None = None
    t1: float | None = None

    @property
    def reachable(self) -> bool:
        return self.kind is not Kind.NOT_SINGLE

    def endpoint(self, hq: Hyperquadric, x0) -> np.ndarray:
        if self.u is None:
            raise ValueError("no geodesic for this target")
        return geodesic(hq, x0, self.u, self.t1)


def _sphere(n: int) -> Hyperquadric:
    return Hyperquadric(Signature(n, 1), 1.0)


def _check_pair(hq: Hyperquadric, x0, x1, tol):
    if hq.level != 1.0:
        raise ValueError("reachability is stated for the level r = 1")
    x0 = hq.require(x0)
    x1 = hq.require(x1)
    if x0.shape != x1.shape:
        raise MembershipError("points live in different dimensions")
    return x0, x1


def _antipodal_u(hq: Hyperquadric, x0) -> np.ndarray:
    """First unit spacelike tangent vector obtained from the standard basis."""
    sig = hq.sig
    for e in np.eye(sig.n):
        v = hq.tangent_project(x0, e)
        vv = j_inner(v, v, sig)
        if vv > 1e-6:
            return v / math.sqrt(vv)
    raise ValueError("no spacelike tangent direction at x0")


def classify(hq: Hyperquadric, x0, x1, tol: float = BOUNDARY_TOL) -> ReachabilityResult:
    """Classify x1 as seen from x0 and construct the witnessing geodesic."""
    x0, x1 = _check_pair(hq, x0, x1, tol)
    if np.max(np.abs(x1 - x0)) <= tol:
        raise DegenerateTargetError("target coincides with the base point")
    inner = float(j_inner(x0, x1, hq.sig))
    if abs(inner - 1.0) <= tol:
        return ReachabilityResult(Kind.NULL, inner, x1 - x0, 1.0)
    if inner > 1.0:
        theta = math.acosh(inner)
        return ReachabilityResult(Kind.TIMELIKE, inner, (x1 - x0 * inner) / math.sinh(theta), theta)
    if np.max(np.abs(x1 + x0)) <= tol:
        return ReachabilityResult(Kind.ANTIPODAL, inner, _antipodal_u(hq, x0), math.pi)
    if inner > -1.0 + tol:
        c = min(1.0, max(-1.0, inner)) if abs(inner) - 1.0 <= CLAMP else inner
        theta = math.acos(c)
        return ReachabilityResult(Kind.SPACELIKE, inner, (x1 - x0 * c) / math.sin(theta), theta)
    return ReachabilityResult(Kind.NOT_SINGLE, inner)


def region_from_inner(inner, tol: float = BOUNDARY_TOL):
    """Vectorized region labels for scalar products with x0."""
    inner = np.asarray(inner, dtype=float)
    out = np.full(inner.shape, Region.BETWEEN.value, dtype=object)
    out[inner > 1.0] = Region.BEYOND_TANGENT.value
    out[np.abs(inner - 1.0) <= tol] = Region.ON_TANGENT.value
    out[inner <= -1.0 + tol] = Region.ANTIPODAL_SIDE.value
    return out


def hyperplane_test(x0, x1, tol: float = BOUNDARY_TOL) -> Region:
    """Position of x1 relative to T^aff_{x0} and the parallel plane through -x0."""
    x0 = np.asarray(x0, dtype=float)
    hq = _sphere(len(x0))
    x0, x1 = _check_pair(hq, x0, x1, tol)
    return Region(region_from_inner(j_inner(x0, x1, hq.sig), tol)[()])


def kinds_from_inner(inner, antipodal, tol: float = BOUNDARY_TOL):
    """Vectorized version of the kind logic of :func:`classify`."""
    inner = np.asarray(inner, dtype=float)
    out = np.full(inner.shape, Kind.NOT_SINGLE.value, dtype=object)
    out[inner > -1.0 + tol] = Kind.SPACELIKE.value
    out[inner > 1.0] = Kind.TIMELIKE.value
    out[np.abs(inner - 1.0) <= tol] = Kind.NULL.value
    out[np.asarray(antipodal) & (inner <= -1.0 + tol)] = Kind.ANTIPODAL.value
    return out


def chart_point(a, b) -> np.ndarray:
    """(a, b) -> (sinh a, cosh a sin b, cosh a cos b) on S_1^2."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.stack([np.sinh(a), np.cosh(a) * np.sin(b), np.cosh(a) * np.cos(b)], axis=-1)


@dataclass(frozen=True)
class Partition:
    a: np.ndarray
    b: np.ndarray
    points: np.ndarray
    inner: np.ndarray
    kind: np.ndarray

    def fraction(self, label: str) -> float:
        labels = self.kind if label in {k.value for k in Kind} else region_from_inner(self.inner)
        return float(np.mean(labels == label))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["a", "b", "x1", "x2", "x3", "inner", "kind"])
            for a, b, p, ip, k in zip(self.a, self.b, self.points, self.inner, self.kind):
                w.writerow([fmt(a), fmt(b), *(fmt(v) for v in p), fmt(ip), k])


def default_grid(size: int = 101):
    a = np.linspace(-2.0, 2.0, size)
    b = np.linspace(-math.pi, math.pi, size, endpoint=False)
    return a, b


def _label_rows(x0, a_rows, b, tol):
    A, B = np.meshgrid(a_rows, b, indexing="ij")
    pts = chart_point(A, B).reshape(-1, 3)
    inner = j_inner(pts, x0, Signature(3, 1))
    antipodal = np.max(np.abs(pts + x0), axis=1) <= tol
    keep = np.max(np.abs(pts - x0), axis=1) > tol
    return A.ravel()[keep], B.ravel()[keep], pts[keep], inner[keep], kinds_from_inner(inner[keep], antipodal[keep], tol)


def sample_partition(x0, a=None, b=None, tol: float = BOUNDARY_TOL, threads: int | None = None) -> Partition:
    """Label a chart grid on S_1^2 by reachability kind; the point x0 itself is dropped.

    ``threads`` defaults to the PSEUDOROLL_THREADS environment variable (1 if unset).
    """
    x0 = _sphere(3).require(x0)
    if a is None or b is None:
        da, db = default_grid()
        a = da if a is None else a
        b = db if b is None else b
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if threads is None:
        threads = int(os.environ.get("PSEUDOROLL_THREADS", "1") or 1)
    chunks = np.array_split(a, max(1, min(threads, len(a))))
    if len(chunks) == 1:
        parts = [_label_rows(x0, a, b, tol)]
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(lambda c: _label_rows(x0, c, b, tol), chunks))
    cols = [np.concatenate([p[k] for p in parts]) for k in range(5)]
    return Partition(*cols)


def broken_geodesic(hq: Hyperquadric, x0, x1, tol: float = BOUNDARY_TOL) -> list[tuple[np.ndarray, ReachabilityResult]]:
    """Two-segment route x0 -> -x1 -> x1 for targets with inner <= -1.

    <x0, -x1> >= 1, so the first leg is timelike or null; the second leg is
    the antipodal half-turn. Informational only: nothing is integrated and
    no optimality is claimed.
    """
    x0, x1 = _check_pair(hq, x0, x1, tol)
    first = classify(hq, x0, -x1, tol)
    second = classify(hq, -x1, x1, tol)
    return [(x0, first), (-x1, second)]
