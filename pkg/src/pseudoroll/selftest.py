"""Quick built-in checks of the trivial cases, used by ``pseudoroll selftest``."""

from __future__ import annotations

import math

import numpy as np

from .distribution import MetricChart, christoffel
from .errors import DegenerateTargetError
from .hyperquadric import AffineTangentSpace, CurveSamples, Hyperquadric, covariant_derivative, normal_derivative
from .intrinsic import parallel_frame_along
from .kinematics import Control, integrate_kinematics, verify_rolling
from .linalg import CausalClass, Signature, causal_class, expm
from .reachability import classify


def _checks():
    sig = Signature(3, 1)
    hq = Hyperquadric(sig)
    x0 = np.array([0.0, 0.0, 1.0])
    t = np.linspace(0.0, 1.0, 11)
    still = integrate_kinematics(hq, x0, Control.constant([0.0, 0.0, 0.0]), t)

    def raises(fn, exc):
        try:
            fn()
        except exc:
            return True
        return False

    yield "zero vector is spacelike", causal_class(np.zeros(3), sig) is CausalClass.SPACELIKE
    yield "exp(0) = I", np.array_equal(expm(np.zeros((3, 3))), np.eye(3))
    yield "x0 on the Lorentzian sphere", hq.contains(x0)
    yield "(0,0,2) off the sphere", not hq.contains([0.0, 0.0, 2.0])
    yield "normal direction projects to 0", not np.any(hq.tangent_project(x0, x0))
    yield "u = 0 keeps s = 0 and R = I", not np.any(still.s) and np.array_equal(still.R, np.broadcast_to(np.eye(3), still.R.shape))
    yield "u = 0 gives zero residuals", all(v == 0.0 for v in verify_rolling(still).residuals.values())
    plane = AffineTangentSpace(hq, x0)
    const = CurveSamples(t, np.broadcast_to(x0, (len(t), 3)))
    yield "constant field on the plane", not np.any(covariant_derivative(plane, const, np.broadcast_to([1.0, 0, 0], (len(t), 3))))
    yield "constant normal on the plane", not np.any(normal_derivative(plane, const, np.broadcast_to(x0, (len(t), 3))))
    fr = parallel_frame_along(hq, const, [[1.0, 0, 0], [0, 1.0, 0]])
    yield "constant curve keeps its frame", np.array_equal(fr.vectors[-1], fr.vectors[0])
    yield "target x1 = x0 rejected", raises(lambda: classify(hq, x0, x0), DegenerateTargetError)
    flat = MetricChart(2, 1, lambda p: np.diag([-1.0, 1.0]))
    yield "flat chart has no Christoffels", not np.any(christoffel(flat, [0.3, -0.2]))
    scaled = MetricChart(2, 1, lambda p: 3.0 * np.diag([-1.0, 1.0]))
    yield "scaled flat chart has no Christoffels", not np.any(christoffel(scaled, [math.pi, 1.0]))


def run_selftest(verbose: bool = True) -> bool:
    ok = True
    for name, passed in _checks():
        ok &= bool(passed)
        if verbose:
            print(f"{'PASS' if passed else 'FAIL'} {name}")
    return ok
