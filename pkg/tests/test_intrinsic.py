import csv
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from pseudoroll.distribution import ChartGeometry, cylinder_chart, cylinder_partner_chart
from pseudoroll.errors import FrameError, NormalizationError, SignatureError
from pseudoroll.hyperquadric import AffineTangentSpace, CurveSamples, Hyperquadric
from pseudoroll.intrinsic import (
    ParallelFrame,
    configuration_matrices,
    geodesic_adapted_frame,
    extend_to_extrinsic,
    freedom_action,
    freedom_dimension,
    freedom_isometry,
    freedom_subspace,
    geodesic_pair_check,
    parallel_frame_along,
    velocity_coords,
)
from pseudoroll.kinematics import Control, integrate_kinematics, verify_rolling
from pseudoroll.linalg import Signature, is_group_element, j_adjoint, j_inner

from conftest import R2

HAT_FRAME = [[R2, 1.0, 0.0], [1.0, R2, 0.0]]
BENCH_A = np.array([[-R2, 1.0], [-1.0, R2]])


@pytest.fixture(scope="module")
def bench_curves(benchmark):
    return CurveSamples(benchmark.times, benchmark.x), CurveSamples(benchmark.times, benchmark.xhat)


@pytest.fixture(scope="module")
def bench_frames(benchmark, bench_curves, hq3):
    xc, xh = bench_curves
    return (
        parallel_frame_along(hq3, xc, [[1.0, 0, 0], [0, 1.0, 0]]),
        parallel_frame_along(benchmark.plane, xh, HAT_FRAME),
    )


@pytest.fixture(scope="module")
def sphere3():
    """Geodesic rolling of S_1^3 with its adapted frames."""
    sig = Signature(4, 1)
    hq = Hyperquadric(sig)
    x0 = np.array([0, 0, 0, 1.0])
    t = np.linspace(0, 1, 501)
    ctl = Control.constant([1.0, 0, 0, 0])
    tr = integrate_kinematics(hq, x0, ctl, t)
    xc = CurveSamples(t, tr.x)
    fr = parallel_frame_along(hq, xc, np.eye(4)[:3])
    C, xi, k = freedom_subspace(xc, fr, sig)
    fa = fr.combine(C)
    hf = parallel_frame_along(tr.plane, CurveSamples(t, tr.xhat), fa.vectors[0])
    return dict(sig=sig, hq=hq, x0=x0, t=t, ctl=ctl, tr=tr, xc=xc, fa=fa, hf=hf, xi=xi, k=k)


class TestParallelFrame:
    def test_boost_curve(self, bench_frames, grid):
        fr, _ = bench_frames
        assert_allclose(fr.vectors[:, 0], np.stack([np.cosh(grid), 0 * grid, np.sinh(grid)], 1), atol=1e-10)
        assert_allclose(fr.vectors[:, 1], np.broadcast_to([0, 1.0, 0], (len(grid), 3)), atol=1e-12)
        assert_array_equal(fr.signs, [-1, 1])

    def test_normal_flavor(self, benchmark, bench_curves, hq3):
        nf = parallel_frame_along(hq3, bench_curves[0], [[0, 0, 1.0]], "normal")
        assert_allclose(nf.vectors[:, 0], benchmark.x, atol=1e-10)

    def test_constant_curve(self, hq3, x0):
        t = np.linspace(0, 1, 21)
        fr = parallel_frame_along(hq3, CurveSamples(t, np.broadcast_to(x0, (21, 3))), [[1.0, 0, 0], [0, 1.0, 0]])
        assert_array_equal(fr.vectors, np.broadcast_to([[1.0, 0, 0], [0, 1.0, 0]], fr.vectors.shape))

    def test_invariants_on_generic_curve(self, hq3, x0):
        t = np.linspace(0, 1, 1001)
        tr = integrate_kinematics(hq3, x0, Control.expression(["cos(2*t)", "sin(3*t)", "0"]), t)
        xc = CurveSamples(t, tr.x)
        fr = parallel_frame_along(hq3, xc, [[1.0, 0, 0], [0, 1.0, 0]])
        assert fr.gram_residual(hq3.sig) <= 1e-8
        assert fr.derivative_residual(hq3, xc) <= 1e-5
        # rolling realizes the same transport
        assert_allclose(fr.vectors[:, 0], tr.R @ [1.0, 0, 0], atol=1e-6)

    def test_bad_frames(self, hq3, bench_curves):
        with pytest.raises(FrameError):
            parallel_frame_along(hq3, bench_curves[0], [[1.0, 0, 0], [1.0, 1.0, 0]])
        with pytest.raises(FrameError):
            parallel_frame_along(hq3, bench_curves[0], [[0, 0, 1.0]], "tangent")
        with pytest.raises(FrameError):
            parallel_frame_along(hq3, bench_curves[0], [[0, 1.0, 0]], "normal")

    def test_csv(self, bench_frames, tmp_path):
        fr, _ = bench_frames
        fr.to_csv(tmp_path / "f.csv", deviation=np.zeros(len(fr.times)))
        with open(tmp_path / "f.csv") as fh:
            header = next(csv.reader(fh))
        assert header == ["t", "f1_1", "f1_2", "f1_3", "f2_1", "f2_2", "f2_3", "deviation"]


class TestConfigurationMatrices:
    def test_benchmark(self, benchmark, bench_frames, bench_curves, hq3):
        fr, hf = bench_frames
        nf = parallel_frame_along(hq3, bench_curves[0], [[0, 0, 1.0]], "normal")
        hnf = parallel_frame_along(benchmark.plane, bench_curves[1], [[0, 0, 1.0]], "normal")
        res = configuration_matrices(benchmark, fr, hf, nf, hnf)
        assert_allclose(res.A, BENCH_A, atol=1e-8)
        assert_allclose(res.B, [[1.0]], atol=1e-8)
        assert res.deviation <= 1e-8
        default = configuration_matrices(benchmark, fr, hf)
        assert_allclose(default.B, [[1.0]], atol=1e-12)

    def test_identity_rolling(self, hq3, x0):
        t = np.linspace(0, 1, 11)
        tr = integrate_kinematics(hq3, x0, Control.constant([0.0, 0, 0]), t)
        xc = CurveSamples(t, tr.x)
        fr = parallel_frame_along(hq3, xc, [[1.0, 0, 0], [0, 1.0, 0]])
        hf = parallel_frame_along(tr.plane, xc, [[1.0, 0, 0], [0, 1.0, 0]])
        assert_array_equal(configuration_matrices(tr, fr, hf).A, np.diag([-1.0, 1.0]))

    def test_rotated_hat_frame(self, benchmark, bench_frames, bench_curves):
        fr, _ = bench_frames
        c, s = math.cosh(0.8), math.sinh(0.8)
        L = np.array([[c, s], [s, c]])
        hf = parallel_frame_along(benchmark.plane, bench_curves[1], L @ np.array(HAT_FRAME))
        res = configuration_matrices(benchmark, fr, hf)
        assert res.deviation <= 1e-8
        assert_allclose(res.A, L @ BENCH_A, atol=1e-8)

    def test_group_constraint(self, rollings, hq3):
        for tr in rollings.values():
            xc, xh = CurveSamples(tr.times, tr.x), CurveSamples(tr.times, tr.xhat)
            fr = parallel_frame_along(hq3, xc, [[1.0, 0, 0], [0, 1.0, 0]])
            hf = parallel_frame_along(tr.plane, xh, HAT_FRAME)
            res = configuration_matrices(tr, fr, hf)
            assert res.deviation <= 1e-6
            E = np.diag([-1.0, 1.0])
            G = np.einsum("kji,jl,klm->kim", res.curve.A, E, res.curve.A)
            assert_allclose(G, np.broadcast_to(E, G.shape), atol=1e-8)

    def test_non_parallel_frame_rejected(self, benchmark, bench_frames, grid):
        fr, hf = bench_frames
        c, s = np.cosh(grid)[:, None], np.sinh(grid)[:, None]
        e1, e2 = fr.vectors[:, 0], fr.vectors[:, 1]
        spun = ParallelFrame(grid, np.stack([c * e1 + s * e2, s * e1 + c * e2], 1), fr.signs, fr.flavor)
        with pytest.raises(FrameError):
            configuration_matrices(benchmark, spun, hf)


class TestFreedom:
    def test_geodesic_on_sphere2(self, bench_curves, bench_frames, sig3):
        assert freedom_dimension(bench_curves[0], bench_frames[0], sig3) == 1

    def test_geodesic_on_sphere3(self, sphere3):
        assert sphere3["k"] == 2
        assert_array_equal(sphere3["xi"], [1, 1])
        # first k adapted velocity coordinates vanish
        c = velocity_coords(sphere3["xc"], sphere3["fa"], sphere3["sig"])
        assert np.max(np.abs(c[:, :2])) <= 1e-8

    def test_generic_curve_is_unique(self, hq3, x0):
        t = np.linspace(0, 1, 501)
        tr = integrate_kinematics(hq3, x0, Control.expression(["1", "t", "0"]), t)
        xc = CurveSamples(t, tr.x)
        assert freedom_dimension(xc, parallel_frame_along(hq3, xc, [[1.0, 0, 0], [0, 1.0, 0]]), hq3.sig) == 0

    def test_dimension_matches_development(self, sphere3, benchmark, bench_curves, bench_frames, sig3):
        assert freedom_dimension(CurveSamples(sphere3["t"], sphere3["tr"].xhat), sphere3["hf"], sphere3["sig"]) == sphere3["k"]
        assert freedom_dimension(bench_curves[1], bench_frames[1], sig3) == 1

    def test_small_k_forces_identity(self):
        assert_array_equal(freedom_action(BENCH_A, 0, np.zeros((0, 0))), BENCH_A)
        assert_array_equal(freedom_action(BENCH_A, 1, [[1.0]]), BENCH_A)
        with pytest.raises(SignatureError):
            freedom_action(BENCH_A, 1, [[-1.0]])

    def test_identity_action(self):
        A = np.diag([-1.0, 1.0, 1.0])
        assert_array_equal(freedom_action(A, 2, np.eye(2)), A)

    def test_wrong_signature(self):
        with pytest.raises(SignatureError):
            freedom_action(np.eye(3), 2, [[2.0, 0], [0, 0.5]])
        with pytest.raises(SignatureError):
            freedom_action(np.eye(3), 2, np.eye(2), signs=[1, 1, 1])

    def test_rotation_preserves_development_coordinates(self, sphere3):
        s = sphere3
        A = configuration_matrices(s["tr"], s["fa"], s["hf"]).A
        At = freedom_action(A, s["k"], [[0, -1.0], [1.0, 0]], s["xi"])
        assert not np.allclose(At, A)
        c = velocity_coords(s["xc"], s["fa"], s["sig"])
        assert_allclose(c @ At.T, c @ A.T, atol=1e-8)

    def test_realized_as_distinct_rolling(self, sphere3):
        s = sphere3
        sig = s["sig"]
        A = configuration_matrices(s["tr"], s["fa"], s["hf"]).A
        Ap = np.array([[0, -1.0], [1.0, 0]])
        At = freedom_action(A, s["k"], Ap, s["xi"])
        G = freedom_isometry(s["fa"].vectors[0][: s["k"]], Ap, sig)
        assert is_group_element(G, sig, 1e-12)
        tr2 = integrate_kinematics(s["hq"], s["x0"], s["ctl"], s["t"], R0=j_adjoint(G, sig))
        res = configuration_matrices(tr2, s["fa"], s["hf"])
        assert_allclose(res.A, At, atol=1e-8)
        assert res.deviation <= 1e-6
        assert_allclose(tr2.x, s["tr"].x, atol=1e-12)
        assert_allclose(tr2.xhat, s["tr"].xhat, atol=0)
        assert np.max(np.abs(tr2.R - s["tr"].R)) > 0.5
        # grid 2e-3, so the finite-difference no-slip residual is about 1e-6
        assert verify_rolling(tr2, tol=1e-5, anchored=False).passed


@pytest.fixture(scope="module")
def codim2():
    sig = Signature(4, 1)
    ch, hc = cylinder_chart(), cylinder_partner_chart()
    t = np.linspace(0, 1, 401)
    pts = np.stack([0.5 * t, np.sin(t)], 1)
    xc = CurveSamples(t, np.array([ch.embed(p) for p in pts]))
    xh = CurveSamples(t, np.array([hc.embed(p) for p in pts]))
    nf = parallel_frame_along(ChartGeometry(ch), xc, ch.normals(pts[0]), "normal")
    hnf = parallel_frame_along(ChartGeometry(hc), xh, hc.normals(pts[0]), "normal")
    return sig, ch, pts, nf, hnf


class TestExtrinsic:
    def test_codimension_one(self, benchmark, bench_curves, hq3, sig3):
        nf = parallel_frame_along(hq3, bench_curves[0], [[0, 0, 1.0]], "normal")
        hnf = parallel_frame_along(benchmark.plane, bench_curves[1], [[0, 0, 1.0]], "normal")
        ext = extend_to_extrinsic(nf, hnf, [[1.0]], sig3)
        assert_allclose(ext.B(nf, hnf, sig3), np.ones((len(benchmark.times), 1, 1)), atol=1e-12)
        # p(t) agrees with the rolling's R^{-1} on the normal line
        assert_allclose(np.einsum("kab,kb->ka", ext.p, benchmark.x), np.broadcast_to(benchmark.x0, benchmark.x.shape), atol=1e-9)

    def test_codimension_two_frames_parallel(self, codim2):
        sig, ch, pts, nf, _ = codim2
        # the natural cylinder normals are parallel, so transport reproduces them
        assert_allclose(nf.vectors, np.array([ch.normals(p) for p in pts]), atol=1e-8)

    def test_codimension_two_rotation(self, codim2):
        sig, _, _, nf, hnf = codim2
        c, s = math.cos(0.6), math.sin(0.6)
        P = np.array([[c, -s], [s, c]])
        ext = extend_to_extrinsic(nf, hnf, P, sig)
        B = ext.B(nf, hnf, sig)
        assert_allclose(B, np.broadcast_to(np.diag(hnf.signs) @ P, B.shape), atol=1e-8)
        # p(t) is an isometry between the normal spaces
        imgs = np.einsum("kab,klb->kla", ext.p, nf.vectors)
        gram = np.einsum("kla,a,kma->klm", imgs, sig.eps, imgs)
        assert_allclose(gram, np.broadcast_to(np.diag(nf.signs), gram.shape), atol=1e-8)

    def test_identity_maps_frame_to_frame(self, codim2):
        sig, _, _, nf, hnf = codim2
        ext = extend_to_extrinsic(nf, hnf, np.eye(2), sig)
        assert_allclose(np.einsum("kab,klb->kla", ext.p, nf.vectors), hnf.vectors, atol=1e-12)

    def test_rejects_non_isometry(self, codim2):
        sig, _, _, nf, hnf = codim2
        with pytest.raises(SignatureError):
            extend_to_extrinsic(nf, hnf, 2 * np.eye(2), sig)


class TestGeodesicPair:
    def test_benchmark(self, benchmark, bench_curves, hq3):
        assert geodesic_pair_check(hq3, bench_curves[0], benchmark.plane, bench_curves[1])

    def test_perturbed_development(self, benchmark, bench_curves, hq3, grid):
        bent = CurveSamples(grid, bench_curves[1].points + 0.01 * np.outer(np.sin(3 * grid), [0, 1.0, 0]))
        assert not geodesic_pair_check(hq3, bench_curves[0], benchmark.plane, bent)

    def test_speed_mismatch(self, benchmark, bench_curves, hq3, grid):
        fast = CurveSamples(grid, benchmark.x0 + np.outer(2 * grid, [1.0, 0, 0]))
        assert not geodesic_pair_check(hq3, bench_curves[0], benchmark.plane, fast)

    def test_constant_curves(self, hq3, x0):
        t = np.linspace(0, 1, 11)
        c = CurveSamples(t, np.broadcast_to(x0, (11, 3)))
        assert geodesic_pair_check(hq3, c, AffineTangentSpace(hq3, x0), c)


class TestGeodesicAdaptedFrame:
    def test_last_vector_is_velocity(self, hq3, x0, sig3):
        F, s = geodesic_adapted_frame(hq3, x0, [2.0, 0, 0])
        assert_allclose(F[-1], [1.0, 0, 0])
        assert_allclose((F * sig3.eps) @ F.T, np.diag(s), atol=1e-12)
        assert_allclose(j_inner(F, x0, sig3), 0.0, atol=1e-12)

    def test_null_velocity(self, hq3, x0):
        with pytest.raises(NormalizationError):
            geodesic_adapted_frame(hq3, x0, [1.0, 1.0, 0])
