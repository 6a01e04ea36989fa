"""Config-driven command line entry points.

Commands: solve, sweep, evolve, stability, reference, verify.  All output
is deterministic for a given config and seed: reports and dumps are
byte-identical across reruns.  Exit codes: 0 success, 1 check failure,
2 solver/dynamics error or invalid configuration.

An optional plain-text config file (one key=value per line, keys named
like the long flags) supplies defaults; explicit flags win.  Environment
variables are never consulted.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import io as vio
from .asymptotics import all_checks, measure_row, run_sweep
from .dynamics import (
    lamb_dipole,
    make_state,
    evolve,
    measure_speed,
    point_vortex_pair,
    stability_experiment,
)
from .grid import HalfPlaneGrid, centroid, diameter
from .profiles import parse_profile
from .solver import SolverConfig, SolverError, ascend
from .kernel import KernelEvaluator

__all__ = ["main", "run"]


def _parse_grid(spec: str) -> HalfPlaneGrid:
    """Window spec 'LxH:nx', e.g. '2x1:320' -> L=2, H=1, nx=320."""
    try:
        dims, nxs = spec.split(":")
        Ls, Hs = dims.lower().split("x")
        L, H, nx = float(Ls), float(Hs), int(nxs)
        h = 2.0 * L / nx
        ny = H / h
        if abs(ny - round(ny)) > 1e-9:
            raise ValueError
        return HalfPlaneGrid(L=L, H=H, nx=nx, ny=int(round(ny)))
    except ValueError:
        raise ValueError(f"bad grid spec {spec!r}, expected LxH:nx with square cells")


def _config_tokens(path: str) -> list[str]:
    tokens = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            tokens += [f"--{key.strip()}", val.strip()]
    return tokens


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vortexpair", description=__doc__)
    sub = ap.add_subparsers(dest="command")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--profile", default="disk(1)")
    common.add_argument("--q", type=float, default=1.0)
    common.add_argument("--p", type=float, default=4.0)
    common.add_argument("--grid", default=None, help="window LxH:nx (default: auto)")
    common.add_argument("--out", default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--mode", default="fast", choices=["fast", "direct"])
    common.add_argument("--config", default=None, help="key=value config file")

    sp = sub.add_parser("solve", parents=[common])
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--r0", type=float, default=None)
    sp.add_argument("--max-iters", type=int, default=500)

    sw = sub.add_parser("sweep", parents=[common])
    sw.add_argument("--eps-list", required=True, help="comma separated, decreasing")

    ev = sub.add_parser("evolve", parents=[common])
    ev.add_argument("--eps", type=float, required=True)
    ev.add_argument("--T", type=float, default=None, help="horizon (default 0.5*eps)")

    st = sub.add_parser("stability", parents=[common])
    st.add_argument("--eps", type=float, required=True)
    st.add_argument("--T", type=float, default=None)
    st.add_argument("--delta", type=float, default=0.01)

    sub.add_parser("reference", parents=[common])

    vf = sub.add_parser("verify", parents=[common])
    vf.add_argument("--dir", default=None, help="report directory (default --out)")
    return ap


def _solver_cfg(args, eps: float) -> SolverConfig:
    prof = parse_profile(args.profile)
    grid = _parse_grid(args.grid) if args.grid else None
    return SolverConfig(
        profile=prof, eps=eps, q=args.q, grid=grid, mode=args.mode,
        r0=getattr(args, "r0", None),
        max_iters=getattr(args, "max_iters", 500),
    )


def _result_payload(res, prof, p) -> dict:
    c = centroid(res.zeta)
    return {
        "T_eps": res.T_eps,
        "mu": res.mu,
        "centroid": [float(c[0]), float(c[1])],
        "diam": diameter(res.core),
        "iterations": res.iterations,
        "converged": res.converged,
        "cycle": res.cycle,
        "asymmetry": res.asymmetry,
        "monotonicity_violations": res.monotonicity_violations,
        "kappa": prof.kappa,
        "eps": res.eps,
        "q": res.q,
    }


def _write_json(payload: dict, path: str):
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _cmd_solve(args) -> int:
    try:
        res = ascend(_solver_cfg(args, args.eps))
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 2
    prof = parse_profile(args.profile)
    payload = _result_payload(res, prof, args.p)
    print(json.dumps(payload, sort_keys=True))
    if args.out:
        vio.ensure_dir(args.out)
        _write_json(payload, os.path.join(args.out, "result.json"))
        vio.write_field(res.zeta, os.path.join(args.out, f"eps_{vio.eps_tag(args.eps)}"))
        vio.write_log_csv({args.eps: res.history}, os.path.join(args.out, "log.csv"))
    return 0


def _cmd_sweep(args) -> int:
    eps_list = [float(s) for s in args.eps_list.split(",") if s.strip()]
    prof = parse_profile(args.profile)
    template = SolverConfig(profile=prof, q=args.q, mode=args.mode,
                            grid=_parse_grid(args.grid) if args.grid else None)
    report = run_sweep(eps_list, template, p=args.p)
    verdicts = all_checks(report)
    if args.out:
        emit_report(report, verdicts, args.out, args)
    for name, v in verdicts.items():
        print(f"{name}: {v.status} ({v.details})")
    flagged = report.flagged()
    for row in flagged:
        print(f"row eps={row.eps:g} failed: {row.error}", file=sys.stderr)
    if flagged:
        return 2
    if any(v.status == "fail" for v in verdicts.values()):
        return 1
    return 0


def emit_report(report, verdicts, outdir: str, args=None):
    """Deterministic layout: report.csv, verdicts.json, fields/, log.csv."""
    vio.ensure_dir(outdir)
    vio.ensure_dir(os.path.join(outdir, "fields"))
    vio.write_report_csv(report, os.path.join(outdir, "report.csv"))
    meta = {
        "profile": report.profile_name, "q": report.q, "p": report.p,
        "kappa": report.kappa,
    }
    if args is not None:
        meta.update({"seed": args.seed, "mode": args.mode,
                     "profile_spec": args.profile})
        _write_json(
            {"command": "sweep", "profile": args.profile, "q": args.q,
             "p": args.p, "eps_list": [r.eps for r in report.rows],
             "seed": args.seed, "mode": args.mode},
            os.path.join(outdir, "run_config.json"))
    vio.write_verdicts_json(verdicts, os.path.join(outdir, "verdicts.json"), extra=meta)
    for eps, field in sorted(report.fields.items(), reverse=True):
        vio.write_field(field, os.path.join(outdir, "fields", f"eps_{vio.eps_tag(eps)}"))
    vio.write_log_csv(report.histories, os.path.join(outdir, "log.csv"))


def _cmd_evolve(args) -> int:
    T = args.T if args.T is not None else 0.5 * args.eps
    try:
        res = ascend(_solver_cfg(args, args.eps))
        state = make_state(res.zeta, mode=args.mode)
        _, traj = evolve(state, T, samples=10)
    except (SolverError, RuntimeError) as exc:
        print(f"dynamics error: {exc}", file=sys.stderr)
        return 2
    speed = measure_speed(traj)
    payload = {"measured_speed": speed, "q": args.q, "T": T,
               "relative_speed_error": abs(speed - args.q) / args.q,
               "mass_drift": abs(traj[-1, 3] - traj[0, 3]) / traj[0, 3],
               "impulse_drift": abs(traj[-1, 4] - traj[0, 4]) / abs(traj[0, 4]),
               "energy_drift": abs(traj[-1, 5] - traj[0, 5]) / abs(traj[0, 5])}
    print(json.dumps(payload, sort_keys=True))
    if args.out:
        vio.ensure_dir(args.out)
        _write_json(payload, os.path.join(args.out, "evolve.json"))
        _write_traj(traj, os.path.join(args.out, "trajectory.csv"))
    return 0


def _write_traj(traj, path: str):
    with open(path, "w") as fh:
        fh.write("t,centroid1,centroid2,mass,impulse,energy\n")
        for row in traj:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def _cmd_stability(args) -> int:
    T = args.T if args.T is not None else 0.5 * args.eps
    try:
        res = ascend(_solver_cfg(args, args.eps))
        runs = {}
        for kind in ("control", "bump", "split"):
            delta, curve = stability_experiment(
                res.zeta, kind, T, delta_rel=args.delta, mode=args.mode)
            runs[kind] = (delta, curve)
    except (SolverError, RuntimeError) as exc:
        print(f"dynamics error: {exc}", file=sys.stderr)
        return 2
    floor = float(np.max(runs["control"][1][:, 1]))
    delta = runs["bump"][0]
    sup_bump = float(np.max(runs["bump"][1][:, 1]))
    sup_split = float(np.max(runs["split"][1][:, 1]))
    payload = {
        "diffusion_floor": floor,
        "delta": delta,
        "sup_perturbed": sup_bump,
        "perturbed_within_3delta_plus_floor": sup_bump <= 3 * delta + floor,
        "sup_destructive": sup_split,
        "destructive_exceeds_10delta": sup_split > 10 * delta,
    }
    print(json.dumps(payload, sort_keys=True))
    if args.out:
        vio.ensure_dir(args.out)
        _write_json(payload, os.path.join(args.out, "stability.json"))
        with open(os.path.join(args.out, "stability.csv"), "w") as fh:
            fh.write("kind,t,deviation,mass,impulse,energy\n")
            for kind, (_, curve) in runs.items():
                for row in curve:
                    fh.write(kind + "," + ",".join(repr(float(x)) for x in row) + "\n")
    return 0


def _cmd_reference(args) -> int:
    traj = point_vortex_pair(4 * math.pi, 1.0, 2.0, 0.01)
    pv_speed = measure_speed(traj)
    a, W = 0.5, 1.0
    h = a / 32
    grid = HalfPlaneGrid(L=96 * h, H=64 * h, nx=192, ny=64)
    omg = lamb_dipole(a, W, grid, center1=-0.5)
    state = make_state(omg, mode=args.mode)
    _, ltraj = evolve(state, 0.4, samples=10)
    lamb_speed = measure_speed(ltraj)
    payload = {
        "point_vortex_speed": pv_speed,
        "point_vortex_error": abs(pv_speed - 1.0),
        "lamb_speed": lamb_speed,
        "lamb_relative_error": abs(lamb_speed - W) / W,
    }
    print(json.dumps(payload, sort_keys=True))
    if args.out:
        vio.ensure_dir(args.out)
        _write_json(payload, os.path.join(args.out, "reference.json"))
        _write_traj(traj, os.path.join(args.out, "point_vortex.csv"))
        _write_traj(ltraj, os.path.join(args.out, "lamb_dipole.csv"))
    return 0


_VERIFY_COLUMNS = [
    "T_eps", "diam", "diam_over_eps", "centroid1", "centroid2", "centroid_err",
    "mu", "mu_compensated", "objective_compensated", "core_energy",
    "nu_dist_l2", "nu_dist_lp", "nu_ref_l2", "asymmetry", "lambda_x2",
    "stream_q1", "stream_q2",
]


def _cmd_verify(args) -> int:
    outdir = args.dir or args.out
    if not outdir or not os.path.isdir(outdir):
        print("verify: missing report directory", file=sys.stderr)
        return 2
    try:
        with open(os.path.join(outdir, "run_config.json")) as fh:
            rc = json.load(fh)
        rows = _read_report_csv(os.path.join(outdir, "report.csv"))
    except OSError as exc:
        print(f"verify: {exc}", file=sys.stderr)
        return 2
    prof = parse_profile(rc["profile"])
    worst = 0.0
    checked = 0
    for row in rows:
        if row["error"]:
            continue
        eps = float(row["eps"])
        base = os.path.join(outdir, "fields", f"eps_{vio.eps_tag(eps)}")
        zeta = vio.read_field(base)
        metrics = measure_row(zeta, eps, rc["q"], prof.kappa, rc["p"],
                              radius_hint=prof.radius, mode=rc.get("mode", "fast"))
        for col in _VERIFY_COLUMNS:
            a = float(row[col])
            b = float(metrics[col])
            err = abs(a - b) / max(abs(a), abs(b), 1e-300)
            worst = max(worst, err)
        checked += 1
    ok = worst <= 1e-12 and checked > 0
    print(json.dumps({"rows_checked": checked, "worst_relative_mismatch": worst,
                      "match": ok}, sort_keys=True))
    return 0 if ok else 1


def _read_report_csv(path: str) -> list[dict]:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        return [dict(zip(header, line.rstrip("\n").split(","))) for line in fh]


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    # splice config-file defaults ahead of explicit flags
    if "--config" in argv:
        k = argv.index("--config")
        tokens = _config_tokens(argv[k + 1])
        argv = argv[:1] + tokens + argv[1:]
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    if args.command is None:
        parser.print_help()
        return 2
    np.random.seed(args.seed % (2**32))
    try:
        handler = {
            "solve": _cmd_solve,
            "sweep": _cmd_sweep,
            "evolve": _cmd_evolve,
            "stability": _cmd_stability,
            "reference": _cmd_reference,
            "verify": _cmd_verify,
        }[args.command]
        return handler(args)
    except ValueError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
