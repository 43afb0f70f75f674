"""CSV and JSON writers for trajectories, spectra, charts and lattice runs.

Floats are written with 17 significant digits so files round-trip exactly.
"""
from __future__ import annotations

import csv
import json
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np


def fmt(v) -> str:
    return f"{float(v):.17g}"


@contextmanager
def _open(dest):
    if dest is None or dest == "-":
        yield sys.stdout
    elif hasattr(dest, "write"):
        yield dest
    else:
        with open(dest, "w", newline="") as fh:
            yield fh


def write_columns(dest, header, columns):
    with _open(dest) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([fmt(v) for v in row])


def write_trajectory_csv(dest, traj, diag):
    """``t,x,theta,w,I`` at the solution nodes."""
    write_columns(dest, ["t", "x", "theta", "w", "I"],
                  [diag.times, traj.values, diag.theta, diag.w, diag.running_integral])


def write_meanfield_csv(dest, series):
    write_columns(dest, ["t", "m", "p", "p_check", "total_density"],
                  [series.t, series.m, series.p, series.p_check, series.total_density])


def write_density_csv(dest, series):
    write_columns(dest, ["t", "m_density", "p_density", "total_density"],
                  [series.t, series.m_density, series.p_density, series.total_density])


def write_ensemble_csv(dest, result):
    header, cols = ["t"], [result.t]
    for key in ("m_density", "p_density", "total_density"):
        header += [f"{key}_mean", f"{key}_std"]
        cols += [result.mean[key], result.std[key]]
    write_columns(dest, header, cols)


def write_chart_csv(dest, chart):
    write_columns(dest, ["nu", "alpha", "beta"],
                  [chart.nu_samples, chart.alpha_beta[:, 0], chart.alpha_beta[:, 1]])


def roots_payload(rho: float, tag: str, roots) -> dict:
    return {"rho": rho, "equilibrium": tag,
            "roots": [{"re": r.lam.real, "im": r.lam.imag, "residual": r.residual} for r in roots]}


def write_json(dest, payload):
    with _open(dest) as fh:
        json.dump(payload, fh, indent=2, allow_nan=False)
        fh.write("\n")


def write_gallery(out_dir, entries) -> dict:
    """One ``t,x`` CSV per history plus ``index.json``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    index = {"rho": None, "series": []}
    for e in entries:
        name = f"{e.name}.csv"
        write_columns(out_dir / name, ["t", "x"], [e.trajectory.times, e.trajectory.values])
        index["rho"] = e.trajectory.params.rho
        d = e.diagnostics
        index["series"].append({
            "name": e.name, "file": name,
            "dominant_period": None if d is None else d.dominant_period,
            "envelope_rate": None if d is None or not np.isfinite(d.envelope_rate) else d.envelope_rate,
        })
    write_json(out_dir / "index.json", index)
    return index
