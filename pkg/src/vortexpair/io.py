"""Deterministic field dumps and report files.

A field dump is a pair of files sharing a base path: `<base>.json` holds
the header {nx, ny, L, H, kind} and `<base>.bin` the raw little-endian
float64 cell values, row-major (row = height index j, x1 fastest).
Float text formatting always uses repr (shortest round-trip), so
re-emitting identical data yields byte-identical files.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .grid import HalfPlaneGrid, ScalarField

__all__ = [
    "write_field",
    "read_field",
    "field_to_csv",
    "write_report_csv",
    "write_verdicts_json",
    "write_log_csv",
    "REPORT_COLUMNS",
]

REPORT_COLUMNS = [
    "eps", "error", "T_eps", "diam", "diam_over_eps",
    "centroid1", "centroid2", "centroid_err",
    "mu", "mu_compensated", "objective_compensated", "core_energy",
    "nu_dist_l2", "nu_dist_lp", "nu_ref_l2",
    "asymmetry", "lambda_x2", "stream_q1", "stream_q2",
    "iterations", "converged",
]


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    if x is None:
        return ""
    return str(x)


def write_field(f: ScalarField, base: str) -> tuple[str, str]:
    g = f.grid
    if not isinstance(g, HalfPlaneGrid):
        raise ValueError("field dumps are defined for half-plane grids")
    header = {"nx": g.nx, "ny": g.ny, "L": g.L, "H": g.H, "kind": f.kind}
    jpath, bpath = base + ".json", base + ".bin"
    with open(jpath, "w") as fh:
        json.dump(header, fh, sort_keys=True)
        fh.write("\n")
    with open(bpath, "wb") as fh:
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())
    return jpath, bpath


def read_field(base: str) -> ScalarField:
    with open(base + ".json") as fh:
        header = json.load(fh)
    grid = HalfPlaneGrid(L=header["L"], H=header["H"], nx=header["nx"], ny=header["ny"])
    raw = np.fromfile(base + ".bin", dtype="<f8")
    if raw.size != grid.ncells:
        raise ValueError(f"field dump size mismatch: {raw.size} != {grid.ncells}")
    return ScalarField(grid, raw.reshape(grid.shape), header.get("kind", "generic"))


def field_to_csv(f: ScalarField, path: str):
    X1, X2 = f.grid.centers()
    with open(path, "w") as fh:
        fh.write("x1,x2,value\n")
        for x1, x2, v in zip(X1.ravel(), X2.ravel(), f.values.ravel()):
            fh.write(f"{_fmt(float(x1))},{_fmt(float(x2))},{_fmt(float(v))}\n")


def write_report_csv(report, path: str):
    rows = report.rows
    with open(path, "w") as fh:
        fh.write(",".join(REPORT_COLUMNS) + "\n")
        for r in rows:
            fh.write(",".join(_fmt(getattr(r, c)) for c in REPORT_COLUMNS) + "\n")


def write_verdicts_json(verdicts: dict, path: str, extra: dict | None = None):
    payload = {name: {"status": v.status, "details": v.details}
               for name, v in verdicts.items()}
    if extra:
        payload["_meta"] = extra
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def write_log_csv(histories: dict, path: str):
    """Per-iteration solver logs: eps, iteration, objective, mu, support size."""
    with open(path, "w") as fh:
        fh.write("eps,iteration,objective,mu,support_size\n")
        for eps in sorted(histories, reverse=True):
            for it, J, mu, nsup in histories[eps]:
                fh.write(f"{_fmt(float(eps))},{it},{_fmt(float(J))},{_fmt(float(mu))},{nsup}\n")


def eps_tag(eps: float) -> str:
    return repr(float(eps))


def ensure_dir(path: str):
    os.makedirs(path, exist_ok=True)
