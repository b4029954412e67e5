"""Batch command-line front end.

Subcommands: decompose | ball-image | sweep | verify | selftest, all driven
by a TOML config (except selftest, which runs the pinned built-in scenarios).
Outputs: sweep.csv and report.json in --out.  Exit codes: 0 all pass, 1 a
check failed, 2 config error, 3 mathematical precondition violated.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .config import Config, parse_config
from .errors import ConfigError, MobiusMonoError, TolNotMetWarning
from .geometry import Ball, HalfSpace, Hyperplane, Sphere
from .mobius import ball_image, isometric_decomposition
from .monotonicity import (
    MobiusScenario,
    ReflectionScenario,
    coarea_check,
    div_w_check,
    flux_identity_check,
    monotone_sweep,
    prescribed_point_bound,
    s_of_r,
    surface_gradient_f_scenario,
)
from .surfaces import sample

_EXIT_OK, _EXIT_CHECK_FAILED, _EXIT_CONFIG, _EXIT_MATH = 0, 1, 2, 3


def _fmt(x) -> str:
    """17 significant digits, '.' decimal (CSV round-trip exactness)."""
    if x is None:
        return ""
    return f"{float(x):.17g}"


def _max_workers() -> int:
    env = os.environ.get("MOBIUS_MONO_THREADS")
    if env is not None:
        try:
            value = int(env)
        except ValueError:
            raise ConfigError("MOBIUS_MONO_THREADS must be an integer") from None
        if value < 1:
            raise ConfigError("MOBIUS_MONO_THREADS must be >= 1")
        return value
    return os.cpu_count() or 1


def _vec_list(v) -> list:
    return [float(x) for x in np.asarray(v, dtype=float)]


def _decomposition_summary(dec) -> dict:
    return {
        "b": _vec_list(dec.b),
        "R": float(dec.R),
        "psi_linear": [_vec_list(row) for row in dec.psi.linear_part],
        "psi_translation": _vec_list(dec.psi.translation),
        "a": _vec_list(dec.a),
        "direction": _vec_list(dec.direction),
    }


def _check_entry(lhs: float, rhs: float, budget: float) -> dict:
    return {
        "lhs": float(lhs),
        "rhs": float(rhs),
        "residual": float(lhs - rhs),
        "budget": float(budget),
    }


def _finalize_report(report: dict, out_dir: Path) -> bool:
    """Recompute pass flags from the serialized numbers and write report.json."""
    all_pass = True
    for entry in report.get("checks", {}).values():
        if "error" in entry:
            entry["pass"] = False
            all_pass = False
            continue
        # round-trip through the serialized text before comparing
        residual = float(json.loads(json.dumps(entry["residual"])))
        budget = float(json.loads(json.dumps(entry["budget"])))
        entry["pass"] = bool(abs(residual) <= budget)
        all_pass = all_pass and entry["pass"]
    report["all_pass"] = all_pass
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "report.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    return all_pass


def _base_report(command: str, cfg: Config | None) -> dict:
    return {
        "command": command,
        "config": cfg.raw if cfg is not None else None,
        "versions": {
            "mobius_mono": __version__,
            "numpy": np.__version__,
            "python": sys.version.split()[0],
        },
        "checks": {},
    }


def _region_boundary(obj) -> dict:
    if isinstance(obj, (Sphere, Ball)):
        return {"kind": "ball", "center": _vec_list(obj.center), "radius": float(obj.radius)}
    if isinstance(obj, (Hyperplane, HalfSpace)):
        return {"kind": "half_space", "unit_normal": _vec_list(obj.unit_normal),
                "offset": float(obj.offset)}
    raise TypeError(f"unexpected region type {type(obj)!r}")


def cmd_decompose(cfg: Config, out_dir: Path, report: dict) -> int:
    dec = isometric_decomposition(cfg.build_map())
    summary = _decomposition_summary(dec)
    report["decomposition"] = summary
    print("isometric-sphere decomposition:")
    print(f"  b         = {summary['b']}")
    print(f"  R         = {_fmt(summary['R'])}")
    print(f"  psi.linear      = {summary['psi_linear']}")
    print(f"  psi.translation = {summary['psi_translation']}")
    print(f"  a (= sigma(0))  = {summary['a']}")
    print(f"  direction       = {summary['direction']}")
    _finalize_report(report, out_dir)
    return _EXIT_OK


def cmd_ball_image(cfg: Config, out_dir: Path, report: dict) -> int:
    dec = isometric_decomposition(cfg.build_map())
    report["decomposition"] = _decomposition_summary(dec)
    images = []
    for r in cfg.radii:
        img = _region_boundary(ball_image(dec, float(r)))
        img["r"] = float(r)
        images.append(img)
        if img["kind"] == "ball":
            print(f"r = {_fmt(r)}: ball center {img['center']} radius {_fmt(img['radius'])}")
        else:
            print(f"r = {_fmt(r)}: half-space normal {img['unit_normal']} "
                  f"offset {_fmt(img['offset'])}")
    report["ball_images"] = images
    _finalize_report(report, out_dir)
    return _EXIT_OK


_CSV_COLUMNS = ("r,s,J,J_err,I,I_err,QA,QI,vol_lhs,vol_rhs,vol_residual,"
                "vol_budget,wt_lhs,wt_rhs,wt_residual,wt_budget,pass")


def _sweep_rows(rep) -> list:
    rows = []
    for i, r in enumerate(rep.radii):
        vol = rep.volume[i - 1] if i > 0 else None
        wt = rep.weighted[i - 1] if i > 0 else None
        row_pass = True if i == 0 else (vol.passed and wt.passed)
        cells = [
            _fmt(r), _fmt(rep.s_values[i]),
            _fmt(rep.J[i]), _fmt(rep.J_err[i]),
            _fmt(rep.I[i]), _fmt(rep.I_err[i]),
            _fmt(rep.QA[i]), _fmt(rep.QI[i]),
            _fmt(vol.lhs if vol else None), _fmt(vol.rhs if vol else None),
            _fmt(vol.residual if vol else None), _fmt(vol.budget if vol else None),
            _fmt(wt.lhs if wt else None), _fmt(wt.rhs if wt else None),
            _fmt(wt.residual if wt else None), _fmt(wt.budget if wt else None),
            "true" if row_pass else "false",
        ]
        rows.append(",".join(cells))
    return rows


def _run_sweep(cfg: Config, tol: float, max_depth: int):
    scn = cfg.build_scenario()
    return scn, monotone_sweep(scn, cfg.radii, tol=tol, max_depth=max_depth,
                               max_workers=_max_workers())


def cmd_sweep(cfg: Config, out_dir: Path, report: dict, tol: float, max_depth: int) -> int:
    scn, rep = _run_sweep(cfg, tol, max_depth)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "sweep.csv"
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_CSV_COLUMNS + "\n")
        for row in _sweep_rows(rep):
            fh.write(row + "\n")
    print(f"wrote {csv_path}")
    for i, pair in enumerate(rep.volume):
        report["checks"][f"volume_identity_pair_{i}"] = _check_entry(
            pair.lhs, pair.rhs, pair.budget)
    for i, pair in enumerate(rep.weighted):
        report["checks"][f"weighted_identity_pair_{i}"] = _check_entry(
            pair.lhs, pair.rhs, pair.budget)
    report["sweep"] = {
        "csv": csv_path.name,
        "monotone_J": rep.monotone_J,
        "monotone_I": rep.monotone_I,
        "constant_J": rep.constant_J,
        "constant_I": rep.constant_I,
    }
    all_pass = _finalize_report(report, out_dir)
    all_pass = all_pass and rep.monotone_J and rep.monotone_I
    return _EXIT_OK if all_pass else _EXIT_CHECK_FAILED


def _fd_gradient(scn, param) -> np.ndarray:
    patch = scn.patch
    h = 1e-6 * float(np.max(patch.domain[:, 1] - patch.domain[:, 0]))

    def fval(p):
        return float(scn.f_values(patch.eval(p[None, :]))[0])

    df = np.empty(patch.k)
    for i in range(patch.k):
        dp = np.zeros(patch.k)
        dp[i] = h
        df[i] = (fval(param + dp) - fval(param - dp)) / (2.0 * h)
    jac = patch.jac(param[None, :])[0]
    return jac @ np.linalg.solve(jac.T @ jac, df)


def _interior_params(patch, count: int = 8) -> np.ndarray:
    lo, hi = patch.domain[:, 0], patch.domain[:, 1]
    span = hi - lo
    ts = (np.arange(count) + 0.5) / count
    pts = np.stack([lo + (0.2 + 0.6 * t) * span for t in ts])
    return pts


def cmd_verify(cfg: Config, out_dir: Path, report: dict, tol: float, max_depth: int) -> int:
    scn = cfg.build_scenario()
    if isinstance(scn, MobiusScenario):
        report["decomposition"] = _decomposition_summary(scn.dec)
    checks = report["checks"]
    r_lo, r_hi = float(cfg.radii[0]), float(cfg.radii[-1])

    def run(name, enabled, fn):
        if not enabled:
            return
        t0 = time.monotonic()
        try:
            checks[name] = fn()
        except MobiusMonoError as exc:
            checks[name] = {"error": f"{type(exc).__name__}: {exc}"}
        checks[name]["seconds"] = round(time.monotonic() - t0, 3)

    def volume():
        from .monotonicity import volume_identity_residual
        pair = volume_identity_residual(scn, r_lo, r_hi, tol, max_depth)
        return _check_entry(pair.lhs, pair.rhs, pair.budget)

    def weighted():
        from .monotonicity import weighted_identity_residual
        pair = weighted_identity_residual(scn, r_lo, r_hi, tol, max_depth)
        return _check_entry(pair.lhs, pair.rhs, pair.budget)

    def flux():
        s_mid = s_of_r(0.5 * (r_lo + r_hi), scn.b, scn.R)
        flux_q, area_q, budget = flux_identity_check(scn, s_mid, tol, max_depth)
        return _check_entry(flux_q.value, area_q.value, budget)

    def coarea():
        lhs_q, rhs_q, budget = coarea_check(
            scn, s_of_r(r_lo, scn.b, scn.R), s_of_r(r_hi, scn.b, scn.R), tol, max_depth)
        return _check_entry(lhs_q.value, rhs_q.value, budget)

    def gradient():
        worst = 0.0
        for p in _interior_params(scn.patch):
            smp = sample(scn.patch, p)
            closed = surface_gradient_f_scenario(smp, scn)
            fd = _fd_gradient(scn, p)
            scale = max(1.0, float(np.linalg.norm(closed)))
            worst = max(worst, float(np.linalg.norm(closed - fd)) / scale)
        return _check_entry(worst, 0.0, 1e-6)

    def div_w():
        if not isinstance(scn, ReflectionScenario):
            raise ConfigError("divW check needs a single-reflection scenario")
        worst = 0.0
        for p in _interior_params(scn.patch):
            smp = sample(scn.patch, p)
            closed, fd = div_w_check(smp, scn.b, scn.R)
            worst = max(worst, abs(closed - fd) / max(1.0, abs(closed)))
        return _check_entry(worst, 0.0, 1e-5)

    def prescribed():
        area_q, bound, slack, budget = prescribed_point_bound(
            scn.patch, cfg.prescribed_point, tol, max_depth)
        entry = _check_entry(area_q.value, bound, budget)
        # the bound is one-sided: pass iff slack >= -budget
        entry["residual"] = float(min(slack, 0.0))
        entry["slack"] = float(slack)
        return entry

    run("volume_identity", cfg.checks["volume_identity"], volume)
    run("weighted_identity", cfg.checks["weighted_identity"], weighted)
    run("flux", cfg.checks["flux"] and scn.k == 2, flux)
    run("coarea", cfg.checks["coarea"] and scn.k == 2, coarea)
    run("gradient", cfg.checks["gradient"], gradient)
    run("divW", cfg.checks["divW"], div_w)
    run("prescribed_point", cfg.checks["prescribed_point"], prescribed)

    all_pass = _finalize_report(report, out_dir)
    for name, entry in checks.items():
        status = "ERROR" if "error" in entry else ("pass" if entry["pass"] else "FAIL")
        print(f"check {name}: {status}")
    return _EXIT_OK if all_pass else _EXIT_CHECK_FAILED


def cmd_selftest(out_dir: Path, report: dict, tol: float, max_depth: int) -> int:
    from .scenarios import (
        catenoid_scenario,
        flat_disk_scenario,
        mirrored_catenoid_scenario,
        sigma_a_disk_scenario,
    )
    from .monotonicity import J_of_r, Q_A, volume_identity_residual

    checks = report["checks"]
    depth = min(max_depth, 12)

    disk = flat_disk_scenario()
    worst = max(abs(J_of_r(disk, r, tol, max_depth).value - math.pi / 4.0)
                for r in (0.3, 0.8, 1.4))
    checks["flat_disk_J_quarter_pi"] = _check_entry(worst, 0.0, 1e-6)

    cat = catenoid_scenario()
    pair = volume_identity_residual(cat, 1.82, 1.88, tol, depth)
    checks["catenoid_volume_identity"] = _check_entry(pair.lhs, pair.rhs, pair.budget)

    mirrored = mirrored_catenoid_scenario()
    j_ref = J_of_r(cat, 1.85, tol, depth).value
    j_mir = J_of_r(mirrored, 1.85, tol, depth).value
    checks["mirrored_equivariance"] = _check_entry(j_ref, j_mir, 1e-9)

    sa = sigma_a_disk_scenario()
    s_val = s_of_r(0.7, sa.b, sa.R)
    j_val = J_of_r(sa, 0.7, tol, depth).value
    qa_val = sa.R**2 * Q_A(sa, s_val, tol, depth).value
    checks["sigma_a_scaling_relation"] = _check_entry(j_val, qa_val, 1e-9)

    all_pass = _finalize_report(report, out_dir)
    for name, entry in checks.items():
        print(f"selftest {name}: {'pass' if entry['pass'] else 'FAIL'}")
    return _EXIT_OK if all_pass else _EXIT_CHECK_FAILED


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mobius-mono",
        description="Moebius-transformation monotonicity checks for minimal submanifolds",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("decompose", "ball-image", "sweep", "verify", "selftest"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=(name != "selftest"),
                       help="path to the TOML scenario config")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--tol", type=float, default=None,
                       help="override quadrature tolerance")
        p.add_argument("--max-depth", type=int, default=None,
                       help="override subdivision depth limit")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    out_dir = Path(args.out)
    t0 = time.monotonic()
    try:
        cfg = parse_config(args.config) if args.config else None
        tol = args.tol if args.tol is not None else (cfg.tol if cfg else 1e-7)
        max_depth = args.max_depth if args.max_depth is not None else (
            cfg.max_depth if cfg else 14)
        if tol <= 0 or max_depth < 1:
            raise ConfigError("--tol must be positive and --max-depth >= 1")
        _max_workers()  # validate the env var early
        report = _base_report(args.command, cfg)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TolNotMetWarning)
            if args.command == "decompose":
                code = cmd_decompose(cfg, out_dir, report)
            elif args.command == "ball-image":
                code = cmd_ball_image(cfg, out_dir, report)
            elif args.command == "sweep":
                code = cmd_sweep(cfg, out_dir, report, tol, max_depth)
            elif args.command == "verify":
                code = cmd_verify(cfg, out_dir, report, tol, max_depth)
            else:
                code = cmd_selftest(out_dir, report, tol, max_depth)
        report["timing_seconds"] = round(time.monotonic() - t0, 3)
        _finalize_report(report, out_dir)  # refresh with timing
        return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    except (MobiusMonoError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_MATH


if __name__ == "__main__":
    sys.exit(main())
