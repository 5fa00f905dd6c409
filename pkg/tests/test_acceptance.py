"""Acceptance criteria 1-10, each reporting a PASS or FAIL line."""

import contextlib
import csv
import itertools
import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from pseudoroll.cli import main
from pseudoroll.distribution import causal_trace, causal_trace_formula, lorentz_sphere_chart, tangent_plane_chart, trivialize_rolling
from pseudoroll.hyperquadric import CurveSamples, Hyperquadric
from pseudoroll.intrinsic import (
    configuration_matrices,
    extend_to_extrinsic,
    freedom_action,
    freedom_dimension,
    freedom_isometry,
    freedom_subspace,
    parallel_frame_along,
)
from pseudoroll.kinematics import Control, causal_report, integrate_kinematics, noslip_residual, verify_rolling
from pseudoroll.linalg import (
    Signature,
    commutator_W,
    is_group_element,
    j_adjoint,
    j_inner,
    left_right_convert,
    lie_basis,
    random_group_element,
)
from pseudoroll.reachability import chart_point, classify

from conftest import ACCEPTANCE_LINES, R2, boost

CONTROLS = {"timelike": (1.0, 0.0, 0.0), "spacelike": (0.0, 1.0, 0.0), "null": (1.0, 1.0, 0.0)}


@contextlib.contextmanager
def criterion(label, expect_fail=False):
    try:
        yield
    except BaseException as exc:
        note = " (expected)" if expect_fail else ""
        line = f"FAIL {label}{note}: {type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        raise
    line = f"PASS {label}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def long_run(hq, x0, u):
    return integrate_kinematics(hq, x0, Control.constant(u), np.arange(10001) * 1e-3)


def test_1_benchmark_reproduction(hq3, x0):
    with criterion("1 benchmark reproduction"):
        tr = integrate_kinematics(hq3, x0, Control.constant([1.0, 0, 0]), np.arange(2001) * 1e-3)
        for T in (0.5, 1.0, 2.0):
            k = int(round(T * 1000))
            assert np.max(np.abs(tr.R[k] - boost(T))) <= 1e-9
            assert np.max(np.abs(tr.x[k] - [math.sinh(T), 0, math.cosh(T)])) <= 1e-9


def test_2_configuration_matrices(benchmark, hq3):
    with criterion("2 configuration matrices"):
        xc, xh = CurveSamples(benchmark.times, benchmark.x), CurveSamples(benchmark.times, benchmark.xhat)
        fr = parallel_frame_along(hq3, xc, [[1.0, 0, 0], [0, 1.0, 0]])
        hf = parallel_frame_along(benchmark.plane, xh, [[R2, 1.0, 0], [1.0, R2, 0]])
        nf = parallel_frame_along(hq3, xc, [[0, 0, 1.0]], "normal")
        hnf = parallel_frame_along(benchmark.plane, xh, [[0, 0, 1.0]], "normal")
        res = configuration_matrices(benchmark, fr, hf, nf, hnf)
        assert np.max(np.abs(res.A - [[-R2, 1.0], [-1.0, R2]])) <= 1e-6
        assert np.max(np.abs(res.B - [[1.0]])) <= 1e-6
        assert res.deviation <= 1e-6


def test_3_six_conditions(benchmark, hq3, x0):
    with criterion("3 six-condition verification"):
        rep = verify_rolling(benchmark)
        assert set(rep.residuals) == {"i", "ii", "iii", "iv", "v", "vi"}
        assert max(rep.residuals.values()) <= 1e-6
        ctl = Control.constant([1.0, 0, 0])
        coarse = noslip_residual(integrate_kinematics(hq3, x0, ctl, np.arange(1001) * 1e-3)).max()
        fine = noslip_residual(integrate_kinematics(hq3, x0, ctl, np.arange(2001) * 5e-4)).max()
        assert coarse / fine >= 3.5


@pytest.mark.parametrize("name", ["spacelike", "null"])
def test_4_drift(hq3, x0, name):
    with criterion(f"4 group drift over [0, 10], {name}"):
        assert long_run(hq3, x0, CONTROLS[name]).drift().max() <= 1e-9


@pytest.mark.xfail(strict=True, reason="float64 rounding of the exact boost at t = 10 already drifts by ~4e-8")
def test_4_drift_timelike_absolute(hq3, x0):
    with criterion("4 group drift over [0, 10], timelike, absolute 1e-9", expect_fail=True):
        assert long_run(hq3, x0, CONTROLS["timelike"]).drift().max() <= 1e-9


def test_4_drift_timelike_relative(hq3, x0, sig3):
    with criterion("4 group drift over [0, 10], timelike, relative to |R|^2"):
        tr = long_run(hq3, x0, CONTROLS["timelike"])
        norms = np.linalg.norm(tr.R, 2, axis=(1, 2))
        assert np.max(tr.drift() / norms**2) <= 1e-12
        # the exact boost, rounded to float64, sits at the same absolute level
        B = boost(10.0)
        floor = np.max(np.abs(B.T @ np.diag(sig3.eps) @ B - np.diag(sig3.eps)))
        assert tr.drift().max() <= 10 * floor


def test_5_causality_chain(rollings):
    with criterion("5 causality chain"):
        for tr in rollings.values():
            rep = causal_report(tr)
            assert np.max(np.abs(rep.xdot_sq - rep.u_sq)) <= 1e-6
            assert np.max(np.abs(rep.xhatdot_sq - rep.u_sq)) <= 1e-6
            assert np.max(np.abs(rep.rdot_sq - 2 * rep.u_sq)) <= 1e-6


def test_6_reachability_oracle(hq3, sig3):
    with criterion("6 reachability oracle"):
        rng = np.random.default_rng(2024)
        P = chart_point(rng.uniform(-2, 2, 10_000), rng.uniform(-math.pi, math.pi, 10_000))
        Q = chart_point(rng.uniform(-2, 2, 10_000), rng.uniform(-math.pi, math.pi, 10_000))
        inner = j_inner(P, Q, sig3)
        roundtrip = 0
        for i, (p, q, ip) in enumerate(zip(P, Q, inner)):
            res = classify(hq3, p, q)
            if ip > 1 + 1e-9:
                expected = "TimelikeGeodesic"
            elif ip >= 1 - 1e-9:
                expected = "NullGeodesic"
            elif ip > -1 + 1e-9:
                expected = "SpacelikeGeodesic"
            else:
                expected = "Antipodal" if np.max(np.abs(p + q)) <= 1e-9 else "NotSingleGeodesic"
            assert res.kind.value == expected
            if res.u is None:
                continue
            assert np.max(np.abs(res.endpoint(hq3, p) - q)) <= 1e-9
            if roundtrip < 200 and i % 7 == 0:
                tr = integrate_kinematics(hq3, p, Control.constant(res.u), np.linspace(0, res.t1, 201))
                assert np.max(np.abs(tr.x[-1] - q)) <= 1e-6
                roundtrip += 1
        assert roundtrip == 200


def partition_rows(tmp_path, x0, name):
    sc = tmp_path / f"{name}.json"
    sc.write_text(json.dumps({"signature": {"n": 3, "nu": 1}, "level_r": 1.0, "x0": list(map(float, x0))}))
    out = tmp_path / name
    assert main(["partition", "--scenario", str(sc), "--out", str(out)]) == 0
    with open(out / "partition.csv") as fh:
        rows = list(csv.DictReader(fh))
    pts = np.array([[float(r["x1"]), float(r["x2"]), float(r["x3"])] for r in rows])
    inner = pts @ (np.array([-1.0, 1.0, 1.0]) * x0)
    return pts, inner, [r["kind"] for r in rows]


def test_7_partition(tmp_path):
    with criterion("7 partition figure"):
        x0 = np.array([0.0, 0.0, 1.0])
        pts, inner, kinds = partition_rows(tmp_path, x0, "base")
        for p, ip, kind in zip(pts, inner, kinds):
            if ip > 1 + 1e-9:
                assert kind == "TimelikeGeodesic"
            elif abs(ip - 1) <= 1e-9:
                assert kind == "NullGeodesic"
            elif ip > -1 + 1e-9:
                assert kind == "SpacelikeGeodesic"
            else:
                assert kind == ("Antipodal" if np.max(np.abs(p + x0)) <= 1e-9 else "NotSingleGeodesic")
        between = lambda ip: np.mean((ip > -1 + 1e-9) & (ip < 1 - 1e-9))
        _, far, _ = partition_rows(tmp_path, [2.0, 2.0, 1.0], "far")
        assert between(far) < between(inner)


def test_8_basis_algebra():
    with criterion("8 basis algebra"):
        for n in range(2, 7):
            for nu in range(n + 1):
                sig = Signature(n, nu)
                pairs = list(itertools.combinations(range(n), 2))
                W = {p: lie_basis(*p, sig, dtype=np.int64) for p in pairs}
                for p, q in itertools.product(pairs, repeat=2):
                    assert np.array_equal(commutator_W(*p, *q, sig), W[p] @ W[q] - W[q] @ W[p])
        rng = np.random.default_rng(11)
        worst = 0.0
        for k in range(100):
            n = 3 + k % 3
            sig = Signature(n, 1 + k % (n - 1))
            A = random_group_element(sig, rng, 0.3)
            for i, j in itertools.combinations(range(n), 2):
                coeffs = left_right_convert(A, i, j, sig)
                rebuilt = sum(c * A @ lie_basis(r, s, sig) for (r, s), c in coeffs.items())
                worst = max(worst, np.max(np.abs(rebuilt - lie_basis(i, j, sig) @ A)))
        assert worst <= 1e-12


def test_9_trace_formula(rollings):
    with criterion("9 causal trace formula"):
        chart, hat = lorentz_sphere_chart(), tangent_plane_chart(Hyperquadric(Signature(3, 1)), [0, 0, 1.0])
        for tr in rollings.values():
            curve = trivialize_rolling(tr, chart, hat)
            ct = causal_trace(curve.A, curve.times, [-1, 1])
            tf = causal_trace_formula(curve, chart, hat)
            assert np.max(np.abs(tf.tangent - ct.values)) <= 1e-5
            assert np.max(np.abs(tf.tangent - ct.gram)) <= 1e-5


def test_10_freedom(benchmark, hq3, sig3):
    with criterion("10 freedom theory"):
        # m = 2
        xc, xh = CurveSamples(benchmark.times, benchmark.x), CurveSamples(benchmark.times, benchmark.xhat)
        fr = parallel_frame_along(hq3, xc, [[1.0, 0, 0], [0, 1.0, 0]])
        assert freedom_dimension(xc, fr, sig3) == 1
        # m = 3
        sig = Signature(4, 1)
        hq = Hyperquadric(sig)
        x0 = np.array([0, 0, 0, 1.0])
        t = np.linspace(0, 1, 501)
        ctl = Control.constant([1.0, 0, 0, 0])
        tr = integrate_kinematics(hq, x0, ctl, t)
        xc4 = CurveSamples(t, tr.x)
        fr4 = parallel_frame_along(hq, xc4, np.eye(4)[:3])
        assert freedom_dimension(xc4, fr4, sig) == 2
        C, xi, k = freedom_subspace(xc4, fr4, sig)
        fa = fr4.combine(C)
        hf = parallel_frame_along(tr.plane, CurveSamples(t, tr.xhat), fa.vectors[0])
        A = configuration_matrices(tr, fa, hf).A
        Ap = np.array([[0, -1.0], [1.0, 0]])
        At = freedom_action(A, k, Ap, xi)
        assert not np.allclose(At, A)
        G = freedom_isometry(fa.vectors[0][:k], Ap, sig)
        assert is_group_element(G, sig, 1e-12)
        tr2 = integrate_kinematics(hq, x0, ctl, t, R0=j_adjoint(G, sig))
        assert np.max(np.abs(configuration_matrices(tr2, fa, hf).A - At)) <= 1e-8
        assert np.max(np.abs(tr2.xhat - tr.xhat)) == 0.0
        assert np.max(np.abs(tr2.R - tr.R)) > 0.5
        assert verify_rolling(tr2, tol=1e-5, anchored=False).passed
        # extension to the normal side keeps B constant
        nf = parallel_frame_along(hq3, xc, [[0, 0, 1.0]], "normal")
        hnf = parallel_frame_along(benchmark.plane, xh, [[0, 0, 1.0]], "normal")
        B = extend_to_extrinsic(nf, hnf, [[1.0]], sig3).B(nf, hnf, sig3)
        assert_allclose(B, np.ones_like(B), atol=1e-12)
