"""Delimited output: trajectory tables, bound reports and sweep summaries."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

from .diagnostics import BoundReport, diagnostics_table
from .dynamics import Trajectory

DIAG_COLUMNS = (
    "energy",
    "modified_energy",
    "commutator",
    "regret1",
    "regret2",
    "total_regret",
    "duality_gap_avg",
)
REPORT_COLUMNS = ("bound_name", "bound_value", "empirical_value", "satisfied", "note")
SWEEP_COLUMNS = ("K", "eta", "dg", "R_K")


def fmt(v) -> str:
    """Full-precision text; NaN and None become an empty field."""
    if v is None:
        return ""
    v = float(v)
    if math.isnan(v):
        return ""
    return "%.17g" % v


def trajectory_columns(m: int, n: int) -> list[str]:
    cols = ["step"]
    for prefix, dim in (("x", m), ("y", n), ("p", m), ("q", n)):
        cols += [f"{prefix}_{i}" for i in range(dim)]
    return cols + list(DIAG_COLUMNS)


def trajectory_csv_text(traj: Trajectory) -> str:
    m, n = traj.game.shape
    table = diagnostics_table(traj)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(trajectory_columns(m, n))
    for k in range(len(traj)):
        row = [str(k)]
        for arr in (traj.x, traj.y, traj.p, traj.q):
            row += [fmt(v) for v in arr[k]]
        row += [fmt(table[c][k]) for c in DIAG_COLUMNS]
        w.writerow(row)
    return buf.getvalue()


def write_trajectory_csv(traj: Trajectory, path: Path) -> Path:
    path = Path(path)
    path.write_text(trajectory_csv_text(traj), encoding="utf-8")
    return path


def write_reports_csv(reports: list[BoundReport], path: Path) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in reports:
            w.writerow([r.bound_name, fmt(r.bound_value), fmt(r.empirical_value), str(r.satisfied).lower(), r.note])
    return path


def write_sweep_csv(rows: list[tuple[int, float, float, float]], path: Path) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for K, eta, dg, rk in rows:
            w.writerow([str(K), fmt(eta), fmt(dg), fmt(rk)])
    return path
