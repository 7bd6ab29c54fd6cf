"""Command-line front end: simulation runs, verification suites, conversions.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical abort
(non-finite state during integration), 4 invalid geometry input.  The QH_LOG
environment variable (quiet, info, debug) controls verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import dynamics, so3, verify
from .dynamics import BodyParams, InertiaTensor, RenormPolicy, Trajectory
from .errors import ConfigError, GeometryError, IntegrationAborted, QhdynError
from .poisson import Chart, PhasePoint
from .quaternion import Quaternion, axis_angle_to_quat, quat_norm, quat_normalize

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_GEOMETRY = 4

log = logging.getLogger("qhdyn")

CSV_HEADER = ("t,x1,x2,x3,p1,p2,p3,q0,q1,q2,q3,M1,M2,M3,H,qnorm,pi1,pi2,pi3")


def _setup_logging() -> None:
    level = os.environ.get("QH_LOG", "info").strip().lower()
    chosen = {"quiet": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(level)
    if chosen is None:
        chosen = logging.INFO
    logging.basicConfig(level=chosen, format="%(levelname)s %(message)s")


@dataclass
class RunConfig:
    params: BodyParams
    state0: PhasePoint
    h: float
    n_steps: int
    renorm: RenormPolicy
    sample_stride: int
    csv_path: str
    summary_path: Optional[str]


def _as_mapping(node, path: str) -> dict:
    if not isinstance(node, dict):
        raise ConfigError(path, f"expected an object, got {type(node).__name__}")
    return node


def _get(node: dict, key: str, path: str, required: bool = True, default=None):
    if key not in node:
        if required:
            raise ConfigError(f"{path}.{key}", "missing required field")
        return default
    return node[key]


def _as_number(value, path: str, positive: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        raise ConfigError(path, "must be finite")
    if positive and v <= 0.0:
        raise ConfigError(path, f"must be > 0, got {v!r}")
    return v


def _as_int(value, path: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(path, f"must be >= {minimum}, got {value}")
    return value


def _as_vec(value, path: str, length: int) -> np.ndarray:
    if not isinstance(value, (list, tuple)) or len(value) != length:
        raise ConfigError(path, f"expected a list of {length} numbers")
    return np.array([_as_number(v, f"{path}[{i}]") for i, v in enumerate(value)])


def _build_potential(node: dict, path: str, body_mass: float) -> dynamics.PotentialSpec:
    kind = _get(node, "type", path)
    if kind == "free":
        return dynamics.free()
    if kind == "linear_gravity":
        g = _as_number(_get(node, "g", path), f"{path}.g")
        m = _as_number(_get(node, "mass", path, required=False, default=body_mass),
                       f"{path}.mass", positive=True)
        return dynamics.linear_gravity(m, g)
    if kind == "heavy_top":
        g = _as_number(_get(node, "g", path), f"{path}.g")
        ell = _as_number(_get(node, "l", path), f"{path}.l")
        if ell < 0.0:
            raise ConfigError(f"{path}.l", "must be >= 0")
        m = _as_number(_get(node, "mass", path, required=False, default=body_mass),
                       f"{path}.mass", positive=True)
        return dynamics.heavy_top(m, g, ell)
    if kind == "harmonic":
        k = _as_number(_get(node, "k", path), f"{path}.k")
        if k < 0.0:
            raise ConfigError(f"{path}.k", "must be >= 0")
        return dynamics.harmonic(k)
    raise ConfigError(f"{path}.type",
                      f"unknown potential {kind!r}; expected one of {dynamics.BUILTIN_POTENTIALS}")


def _build_renorm(node: dict, path: str) -> RenormPolicy:
    mode = _get(node, "renorm_policy", path, required=False, default="threshold")
    if mode == "none":
        return RenormPolicy.none()
    if mode == "every_step":
        return RenormPolicy.every_step()
    if mode == "threshold":
        eps = _as_number(_get(node, "renorm_eps", path, required=False, default=1e-9),
                         f"{path}.renorm_eps", positive=True)
        return RenormPolicy.threshold(eps)
    raise ConfigError(f"{path}.renorm_policy",
                      f"expected none, every_step or threshold, got {mode!r}")


def load_config(path: str) -> RunConfig:
    """Parse and validate a simulation config; raises ConfigError with the
    offending field path on any violation."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(path, f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(path, f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc

    root = _as_mapping(raw, "<root>")
    body = _as_mapping(_get(root, "body", "<root>"), "body")
    mass = _as_number(_get(body, "mass", "body"), "body.mass", positive=True)
    inertia_list = _get(body, "inertia", "body")
    if not isinstance(inertia_list, (list, tuple)) or len(inertia_list) != 3:
        raise ConfigError("body.inertia", "expected [I1, I2, I3]")
    moments = [_as_number(v, f"body.inertia[{i}]", positive=True)
               for i, v in enumerate(inertia_list)]
    inertia = InertiaTensor(*moments)

    potential = _build_potential(_as_mapping(_get(root, "potential", "<root>"), "potential"),
                                 "potential", mass)
    params = BodyParams(mass, inertia, potential)

    init = _as_mapping(_get(root, "initial", "<root>"), "initial")
    x0 = _as_vec(_get(init, "x", "initial", required=False, default=[0.0, 0.0, 0.0]),
                 "initial.x", 3)
    p0 = _as_vec(_get(init, "p", "initial", required=False, default=[0.0, 0.0, 0.0]),
                 "initial.p", 3)
    mom0 = _as_vec(_get(init, "M", "initial", required=False, default=[0.0, 0.0, 0.0]),
                   "initial.M", 3)
    if "q" in init and "axis_angle" in init:
        raise ConfigError("initial", "give either q or axis_angle, not both")
    if "axis_angle" in init:
        aa = _as_mapping(init["axis_angle"], "initial.axis_angle")
        axis = _as_vec(_get(aa, "axis", "initial.axis_angle"), "initial.axis_angle.axis", 3)
        angle = _as_number(_get(aa, "angle", "initial.axis_angle"), "initial.axis_angle.angle")
        if float(np.linalg.norm(axis)) == 0.0:
            raise ConfigError("initial.axis_angle.axis", "must be nonzero")
        q0 = axis_angle_to_quat(axis, angle)
    else:
        qvals = _as_vec(_get(init, "q", "initial", required=False, default=[1.0, 0.0, 0.0, 0.0]),
                        "initial.q", 4)
        q0 = Quaternion.from_array(qvals)
        n = quat_norm(q0)
        if n == 0.0:
            raise ConfigError("initial.q", "must be nonzero")
        if abs(n - 1.0) > 1e-6:
            log.warning("initial.q has norm %.9g; normalizing", n)
        q0 = quat_normalize(q0)
    state0 = PhasePoint(x0, p0, q0, mom0, Chart.MIXED_M)

    integ = _as_mapping(_get(root, "integrator", "<root>"), "integrator")
    h = _as_number(_get(integ, "h", "integrator"), "integrator.h", positive=True)
    n_steps = _as_int(_get(integ, "n_steps", "integrator"), "integrator.n_steps")
    stride = _as_int(_get(integ, "sample_stride", "integrator", required=False, default=1),
                     "integrator.sample_stride")
    renorm = _build_renorm(integ, "integrator")

    out = _as_mapping(_get(root, "output", "<root>"), "output")
    csv_path = _get(out, "csv", "output")
    if not isinstance(csv_path, str) or not csv_path:
        raise ConfigError("output.csv", "expected a file path")
    summary_path = _get(out, "summary", "output", required=False)
    if summary_path is not None and not isinstance(summary_path, str):
        raise ConfigError("output.summary", "expected a file path")
    return RunConfig(params, state0, h, n_steps, renorm, stride, csv_path, summary_path)


def write_trajectory_csv(path: str, traj: Trajectory) -> None:
    """17-significant-digit CSV with '.' decimals, ',' delimiters, LF endings."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for i in range(len(traj)):
            row = [traj.times[i], *traj.states[i], traj.energy[i], traj.qnorm[i],
                   *traj.pi_spatial[i]]
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def _summarize(traj: Trajectory, wall_time: float) -> dict:
    h0 = float(traj.energy[0])
    mom0 = float(traj.mom_norm[0])
    pi0 = traj.pi_spatial[0]
    e_drift = float(np.max(np.abs(traj.energy - h0)))
    pi_abs = np.max(np.abs(traj.pi_spatial - pi0), axis=0)
    return {
        "final_state": {
            "t": float(traj.times[-1]),
            "x": traj.states[-1][0:3].tolist(),
            "p": traj.states[-1][3:6].tolist(),
            "q": traj.states[-1][6:10].tolist(),
            "M": traj.states[-1][10:13].tolist(),
        },
        "max_drift": {
            "energy_abs": e_drift,
            "energy_rel": e_drift / max(abs(h0), 1e-300),
            "qnorm": float(np.max(np.abs(traj.qnorm - 1.0))),
            "mom_norm_abs": float(np.max(np.abs(traj.mom_norm - mom0))),
            "mom_norm_rel": float(np.max(np.abs(traj.mom_norm - mom0))) / max(mom0, 1e-300),
            "pi_abs": pi_abs.tolist(),
            "pi_rel": (pi_abs / np.maximum(np.abs(pi0), 1e-300)).tolist(),
            "pi_initial": pi0.tolist(),
        },
        "wall_time_s": wall_time,
        "n_steps": traj.n_steps,
        "h": traj.h,
        "samples": len(traj),
    }


def cmd_simulate(config_path: str) -> int:
    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    t0 = time.perf_counter()
    try:
        traj = dynamics.integrate(cfg.state0, cfg.params, cfg.h, cfg.n_steps,
                                  renorm_policy=cfg.renorm, sample_stride=cfg.sample_stride)
    except IntegrationAborted as exc:
        print(f"numerical abort: {exc} (step {exc.step})", file=sys.stderr)
        return EXIT_NUMERIC
    wall = time.perf_counter() - t0
    write_trajectory_csv(cfg.csv_path, traj)
    log.info("wrote %d samples to %s (%.3f s)", len(traj), cfg.csv_path, wall)
    if cfg.summary_path:
        with open(cfg.summary_path, "w", encoding="utf-8") as fh:
            json.dump(_summarize(traj, wall), fh, indent=2)
            fh.write("\n")
        log.info("wrote summary to %s", cfg.summary_path)
    return EXIT_OK


def cmd_verify(suite: str, seed: int, points: Optional[int], corrupt: bool = False) -> int:
    results = verify.run_suite(suite, seed=seed, n_points=points, corrupt=corrupt)
    ok = True
    for r in results:
        rel = ">=" if r.mode == "min" else "<="
        status = "PASS" if r.passed else "FAIL"
        ok = ok and r.passed
        print(f"[{suite}] {r.name}: residual {r.residual:.3e} {rel} {r.tolerance:g} "
              f"(n={r.n}) {status}")
    print(f"[{suite}] {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else 1


def cmd_convert(direction: str, values: list[float]) -> int:
    if direction == "quat2mat":
        if len(values) != 4:
            print("quat2mat expects 4 values: q0 q1 q2 q3", file=sys.stderr)
            return EXIT_USAGE
        q = Quaternion.from_array(values)
        n = quat_norm(q)
        if n == 0.0:
            print("invalid geometry: zero quaternion", file=sys.stderr)
            return EXIT_GEOMETRY
        if abs(n - 1.0) > 1e-6:
            log.warning("input quaternion has norm %.9g; normalizing", n)
        mat = so3.quat_to_matrix(quat_normalize(q))
        for row in mat:
            print(" ".join(f"{v:.17g}" for v in row))
        return EXIT_OK
    if direction == "mat2quat":
        if len(values) != 9:
            print("mat2quat expects 9 values, row-major", file=sys.stderr)
            return EXIT_USAGE
        mat = np.array(values).reshape(3, 3)
        try:
            q, pivot = so3.matrix_to_quat(mat, return_pivot=True)
        except GeometryError as exc:
            print(f"invalid geometry: {exc}", file=sys.stderr)
            return EXIT_GEOMETRY
        print(" ".join(f"{v:.17g}" for v in q.as_array()))
        print(f"pivot: {pivot}")
        return EXIT_OK
    print(f"unknown conversion {direction!r}", file=sys.stderr)
    return EXIT_USAGE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qhdyn",
                                     description="Quaternionic rigid-body simulator and verifier")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="integrate a configured run, emit CSV + summary")
    p_sim.add_argument("config", help="path to a JSON run configuration")

    p_ver = sub.add_parser("verify", help="run a randomized verification suite")
    p_ver.add_argument("suite", choices=sorted(verify.SUITES.keys()))
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--points", type=int, default=None)
    p_ver.add_argument("--corrupt-tensor", action="store_true", help=argparse.SUPPRESS)

    p_conv = sub.add_parser("convert", help="convert between quaternion and rotation matrix")
    p_conv.add_argument("direction", choices=["quat2mat", "mat2quat"])
    p_conv.add_argument("values", nargs="+", help="4 reals (quat2mat) or 9 reals row-major")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(args.config)
        if args.command == "verify":
            if args.points is not None and args.points < 1:
                print("--points must be >= 1", file=sys.stderr)
                return EXIT_USAGE
            return cmd_verify(args.suite, args.seed, args.points,
                              corrupt=args.corrupt_tensor)
        if args.command == "convert":
            try:
                values = [float(v) for v in args.values]
            except ValueError as exc:
                print(f"parse error: {exc}", file=sys.stderr)
                return EXIT_USAGE
            return cmd_convert(args.direction, values)
    except QhdynError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    parser.error("no command given")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
