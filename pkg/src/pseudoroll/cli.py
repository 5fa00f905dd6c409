"""Command-line front end.

    pseudoroll <command> --scenario scenario.json --out outdir [--tol T] [--step H] [--grid N]

Exit codes: 0 success, 1 a verification failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import PseudorollError, ScenarioError
from .expr import ExprError

COMMANDS = ("roll", "verify", "transport", "reach", "partition", "frames", "config-matrices", "lift-check", "selftest")


class VerificationFailed(Exception):
    pass


@dataclass
class Scenario:
    n: int
    nu: int
    level: float
    x0: list
    control: dict | None
    t_end: float
    step: float
    options: dict = field(default_factory=dict)
    base_dir: Path = Path(".")

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path = Path(".")) -> "Scenario":
        if not isinstance(data, dict):
            raise ScenarioError("scenario must be a JSON object")
        sig = _require(data, "signature", dict)
        n = _require(sig, "n", int, "signature.n")
        nu = _require(sig, "nu", int, "signature.nu")
        level = float(_require(data, "level_r", (int, float), default=1.0))
        x0 = _vector(_require(data, "x0", list), n, "x0")
        control = data.get("control")
        if control is not None:
            if not isinstance(control, dict) or control.get("type") not in ("constant", "sampled", "expr"):
                raise ScenarioError("control.type: expected one of constant, sampled, expr")
            if "data" not in control:
                raise ScenarioError("control.data: missing")
        t_end = float(_require(data, "t_end", (int, float), default=1.0))
        step = float(_require(data, "step", (int, float), default=1e-3))
        known = {"signature", "level_r", "x0", "control", "t_end", "step"}
        return cls(n, nu, level, x0, control, t_end, step, {k: v for k, v in data.items() if k not in known}, base_dir)

    @property
    def sig(self):
        from .linalg import Signature

        return Signature(self.n, self.nu)

    @property
    def hq(self):
        from .hyperquadric import Hyperquadric

        return Hyperquadric(self.sig, self.level)

    def grid(self) -> np.ndarray:
        if self.t_end <= 0 or self.step <= 0:
            raise ScenarioError("t_end and step must be positive")
        N = int(round(self.t_end / self.step))
        if N < 2 or abs(N * self.step - self.t_end) > 1e-9 * self.t_end:
            raise ScenarioError(f"t_end={self.t_end} is not a multiple of step={self.step} with at least 2 steps")
        return np.linspace(0.0, self.t_end, N + 1)

    def make_control(self):
        from .kinematics import Control

        if self.control is None:
            raise ScenarioError("control: missing")
        kind, data = self.control["type"], self.control["data"]
        if kind == "constant":
            return Control.constant(_vector(data, self.n, "control.data"))
        if kind == "expr":
            if not isinstance(data, list) or len(data) != self.n:
                raise ScenarioError(f"control.data: expected {self.n} expressions")
            try:
                return Control.expression(data)
            except ExprError as exc:
                raise ScenarioError(f"control.data: {exc}") from exc
        if not isinstance(data, dict) or "times" not in data or "values" not in data:
            raise ScenarioError("control.data: sampled controls need 'times' and 'values'")
        values = np.asarray(data["values"], dtype=float)
        if values.ndim != 2 or values.shape[1] != self.n:
            raise ScenarioError(f"control.data.values: expected rows of length {self.n}")
        return Control.sampled(data["times"], values)

    def option(self, key, default=None):
        return self.options.get(key, default)


def _require(obj, key, types, where=None, default=...):
    where = where or key
    if key not in obj:
        if default is ...:
            raise ScenarioError(f"{where}: missing")
        return default
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, types):
        raise ScenarioError(f"{where}: unexpected value {val!r}")
    return val


def _vector(v, n, where):
    if not isinstance(v, list) or len(v) != n or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v):
        raise ScenarioError(f"{where}: expected a list of {n} numbers")
    return [float(c) for c in v]


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return Scenario.from_dict(data, path.parent)


def _atomic(path: Path, write) -> None:
    """Write through a temporary file so a failure never leaves a partial output."""
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    os.close(fd)
    try:
        write(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if hasattr(obj, "value"):
        return obj.value
    return obj


def _write_json(path: Path, obj) -> None:
    def write(tmp):
        with open(tmp, "w") as fh:
            json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
            fh.write("\n")

    _atomic(path, write)


def _trajectory(sc: Scenario, step=None):
    from .kinematics import integrate_kinematics

    if step is not None:
        sc.step = step
    return integrate_kinematics(sc.hq, sc.x0, sc.make_control(), sc.grid())


def cmd_roll(sc, out: Path, args) -> dict:
    traj = _trajectory(sc, args.step)
    drift = traj.drift()
    scale = np.max(np.abs(traj.R), axis=(1, 2)) ** 2
    rel = float(np.max(drift / np.maximum(1.0, scale)))
    _atomic(out / "trajectory.csv", traj.to_csv)
    tol = args.tol if args.tol is not None else 1e-9
    summary = {"samples": len(traj.times), "max_drift": float(drift.max()), "max_relative_drift": rel, "tol": tol}
    _write_json(out / "roll.json", summary)
    print(f"roll: {len(traj.times)} samples, max drift {drift.max():.3e} (relative {rel:.3e})")
    if rel > tol:
        raise VerificationFailed(f"relative group drift {rel:.3e} exceeds {tol:g}")
    return summary


def cmd_verify(sc, out: Path, args) -> dict:
    from .kinematics import causal_report, verify_rolling

    traj = _trajectory(sc, args.step)
    tol = args.tol if args.tol is not None else 1e-6
    rep = verify_rolling(traj, tol, group=sc.option("group", "identity"))
    causal = causal_report(traj, tol)
    summary = {"residuals": rep.residuals, "tol": tol, "passed": rep.passed, "causal_max_error": causal.max_error}
    _write_json(out / "verify.json", summary)
    for line in rep.lines():
        print(line)
    print(f"causal identities: max error {causal.max_error:.3e} {'PASS' if causal.consistent else 'FAIL'}")
    if not rep.passed or not causal.consistent:
        raise VerificationFailed("conditions failed: " + ", ".join(rep.failures or ["causal"]))
    return summary


def cmd_transport(sc, out: Path, args) -> dict:
    from .hyperquadric import CurveSamples, covariant_derivative, fmt, normal_derivative
    from .kinematics import parallel_transport

    traj = _trajectory(sc, args.step)
    flavor = sc.option("flavor", "tangent")
    if "Y0" not in sc.options:
        raise ScenarioError("Y0: missing")
    Y = parallel_transport(traj, _vector(sc.options["Y0"], sc.n, "Y0"), flavor)
    deriv = covariant_derivative if flavor == "tangent" else normal_derivative
    res = np.max(np.abs(deriv(traj.hq, CurveSamples(traj.times, traj.x), Y)), axis=1)

    def write(tmp):
        import csv

        with open(tmp, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + [f"Y{k + 1}" for k in range(sc.n)] + ["derivative"])
            for t, y, r in zip(traj.times, Y, res):
                w.writerow([fmt(t), *(fmt(v) for v in y), fmt(r)])

    _atomic(out / "transport.csv", write)
    tol = args.tol if args.tol is not None else 1e-6
    print(f"transport ({flavor}): max derivative residual {res.max():.3e}")
    if res.max() > tol:
        raise VerificationFailed(f"transported field not parallel: {res.max():.3e}")
    return {"max_derivative": float(res.max())}


def cmd_reach(sc, out: Path, args) -> dict:
    from .reachability import broken_geodesic, classify

    if "x1" not in sc.options:
        raise ScenarioError("x1: missing")
    x1 = np.array(_vector(sc.options["x1"], sc.n, "x1"))
    tol = args.tol if args.tol is not None else 1e-9
    res = classify(sc.hq, sc.x0, x1)
    summary = {"kind": res.kind, "inner": res.inner, "u": res.u, "t1": res.t1}
    if res.u is not None:
        err = float(np.max(np.abs(res.endpoint(sc.hq, sc.x0) - x1)))
        summary["endpoint_error"] = err
    else:
        summary["broken"] = [{"start": p, "kind": r.kind, "u": r.u, "t1": r.t1} for p, r in broken_geodesic(sc.hq, sc.x0, x1)]
    _write_json(out / "reach.json", summary)
    print(f"reach: {res.kind.value}, inner={res.inner:.17g}" + (f", t1={res.t1:.17g}" if res.t1 else ""))
    if res.u is not None and summary["endpoint_error"] > tol:
        raise VerificationFailed(f"geodesic misses the target by {summary['endpoint_error']:.3e}")
    return summary


def cmd_partition(sc, out: Path, args) -> dict:
    from .reachability import Kind, Region, default_grid, sample_partition

    size = args.grid if args.grid is not None else int(sc.option("grid", 101))
    if size < 2:
        raise ScenarioError("grid must be at least 2")
    a, b = default_grid(size)
    part = sample_partition(sc.x0, a, b)
    _atomic(out / "partition.csv", part.to_csv)
    summary = {
        "grid": size,
        "points": len(part.a),
        "fractions": {k.value: part.fraction(k.value) for k in list(Kind) + list(Region)},
    }
    _write_json(out / "partition.json", summary)
    print(f"partition: {len(part.a)} points, between planes {summary['fractions']['BetweenPlanes']:.6f}")
    return summary


def _frame_rows(sc, key, count=None):
    rows = sc.option(key)
    if rows is None:
        return None
    if not isinstance(rows, list) or not rows:
        raise ScenarioError(f"{key}: expected a list of vectors")
    return np.array([_vector(r, sc.n, key) for r in rows])


def cmd_frames(sc, out: Path, args) -> dict:
    from .hyperquadric import CurveSamples
    from .intrinsic import parallel_frame_along

    traj = _trajectory(sc, args.step)
    flavor = sc.option("flavor", "tangent")
    F0 = _frame_rows(sc, "frame0")
    if F0 is None:
        F0 = sc.hq.tangent_basis(sc.x0)[0] if flavor == "tangent" else np.array([sc.x0])
    curve = CurveSamples(traj.times, traj.x)
    fr = parallel_frame_along(sc.hq, curve, F0, flavor)
    project = sc.hq.tangent_project if flavor == "tangent" else sc.hq.normal_project
    from .hyperquadric import time_derivative

    dev = np.zeros(len(traj.times))
    for i in range(len(fr)):
        d = project(curve.points, time_derivative(traj.times, fr.vectors[:, i]))
        dev = np.maximum(dev, np.max(np.abs(d), axis=1))
    _atomic(out / "frames.csv", lambda p: fr.to_csv(p, dev))
    tol = args.tol if args.tol is not None else 1e-6
    gram = fr.gram_residual(sc.sig)
    print(f"frames: gram residual {gram:.3e}, max derivative {dev.max():.3e}")
    if dev.max() > tol or gram > 1e-8:
        raise VerificationFailed("frame is not parallel and orthonormal")
    return {"gram": gram, "deviation": float(dev.max())}


def cmd_config(sc, out: Path, args) -> dict:
    from .hyperquadric import CurveSamples, fmt
    from .intrinsic import configuration_matrices, parallel_frame_along

    traj = _trajectory(sc, args.step)
    F0 = _frame_rows(sc, "frame0")
    if F0 is None:
        F0 = sc.hq.tangent_basis(sc.x0)[0]
    H0 = _frame_rows(sc, "hat_frame0")
    if H0 is None:
        H0 = F0
    xc, xhc = CurveSamples(traj.times, traj.x), CurveSamples(traj.times, traj.xhat)
    fr = parallel_frame_along(traj.hq, xc, F0)
    hf = parallel_frame_along(traj.plane, xhc, H0)
    res = configuration_matrices(traj, fr, hf)
    m = res.A.shape[0]

    def write(tmp):
        import csv

        with open(tmp, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + [f"A{i + 1}{j + 1}" for i in range(m) for j in range(m)] + ["B11", "deviation"])
            dev = res.curve.deviation()
            for k, t in enumerate(traj.times):
                w.writerow([fmt(t), *(fmt(v) for v in res.curve.A[k].ravel()), fmt(res.curve.B[k, 0, 0]), fmt(dev[k])])

    _atomic(out / "config.csv", write)
    tol = args.tol if args.tol is not None else 1e-6
    summary = {"A": res.A, "B": res.B, "deviation": res.deviation, "tol": tol}
    _write_json(out / "config.json", summary)
    print(f"config-matrices: A={np.array2string(res.A, precision=12)} B={res.B.ravel().tolist()} deviation {res.deviation:.3e}")
    if res.deviation > tol:
        raise VerificationFailed(f"configuration matrices not constant: {res.deviation:.3e}")
    return summary


def _chart(spec, sc):
    from . import distribution as d

    if isinstance(spec, str):
        spec = {"name": spec}
    if not isinstance(spec, dict) or "name" not in spec:
        raise ScenarioError("chart: expected a name or an object with 'name'")
    name = spec["name"]
    params = {k: float(v) for k, v in spec.items() if k != "name"}
    if name == "tangent_plane":
        return d.tangent_plane_chart(sc.hq, sc.x0)
    if name not in d.CHARTS:
        raise ScenarioError(f"chart: unknown chart {name!r}")
    try:
        return d.CHARTS[name](**params)
    except TypeError as exc:
        raise ScenarioError(f"chart {name}: {exc}") from exc


def cmd_lift_check(sc, out: Path, args) -> dict:
    from .distribution import TrivializedCurve, horizontality_residual, trivialize_rolling
    from .hyperquadric import fmt

    chart = _chart(sc.option("chart", "lorentz_sphere"), sc)
    hat_chart = _chart(sc.option("hat_chart", "tangent_plane"), sc)
    curve_path = sc.option("curve")
    if curve_path is None:
        traj = _trajectory(sc, args.step)
        curve = trivialize_rolling(traj, chart, hat_chart)
        _atomic(out / "trivialized.csv", curve.to_csv)
    else:
        path = sc.base_dir / curve_path
        try:
            curve = TrivializedCurve.from_csv(path)
        except (OSError, ValueError, KeyError) as exc:
            raise ScenarioError(f"curve: cannot read {path}: {exc}") from exc
    rep = horizontality_residual(curve, chart, hat_chart)

    def write(tmp):
        import csv

        with open(tmp, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "slip", "twist", "normal_twist", "residual"])
            for row in zip(curve.times, rep.slip, rep.twist, rep.normal_twist, rep.residual):
                w.writerow([fmt(v) for v in row])

    _atomic(out / "lift_residual.csv", write)
    tol = args.tol if args.tol is not None else 1e-6
    worst = float(rep.residual.max())
    print(f"lift-check: max horizontality residual {worst:.3e}")
    if worst > tol:
        raise VerificationFailed(f"curve is not horizontal: residual {worst:.3e}")
    return {"max_residual": worst}


HANDLERS = {
    "roll": cmd_roll,
    "verify": cmd_verify,
    "transport": cmd_transport,
    "reach": cmd_reach,
    "partition": cmd_partition,
    "frames": cmd_frames,
    "config-matrices": cmd_config,
    "lift-check": cmd_lift_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pseudoroll", description="Rolling of pseudo-Riemannian hyperquadrics.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name != "selftest":
            p.add_argument("--scenario", required=True, help="scenario JSON file")
            p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--step", type=float, default=None)
        p.add_argument("--grid", type=int, default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    if args.command == "selftest":
        from .selftest import run_selftest

        return 0 if run_selftest() else 1
    try:
        sc = load_scenario(args.scenario)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        HANDLERS[args.command](sc, out, args)
    except VerificationFailed as exc:
        print(f"FAIL: {exc}", file=sys.stderr)
        return 1
    except (PseudorollError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
