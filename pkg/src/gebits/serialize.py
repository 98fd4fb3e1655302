"""Byte-stable CSV and JSON writers for experiment artifacts.

Floats are rendered with ``repr``, the shortest decimal that round-trips, so
identical values always produce identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .dimension import DimensionCurvePoint, DimensionFit
from .graphs import ShellProfile

__all__ = [
    "fmt_value",
    "write_matrix_csv",
    "write_profile_csv",
    "read_profile_csv",
    "write_curve_csv",
    "write_fit_csv",
    "write_history_csv",
    "write_census_csv",
    "write_json_report",
]

HISTORY_HEADER = "step,fro_norm,max_abs,sigma_max,sigma_min,links_above_threshold"
CENSUS_HEADER = "step,n_gebits,n_linked_nodes,largest_size,largest_d"


def fmt_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_lines(path: Path, lines) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")
    return path


def write_matrix_csv(path, B: np.ndarray) -> Path:
    """Matrix snapshot as `i,j,value` rows, strict upper triangle, row-major."""
    n = B.shape[0]
    lines = ["i,j,value"]
    for i in range(n):
        for j in range(i + 1, n):
            lines.append(f"{i},{j},{fmt_value(float(B[i, j]))}")
    return _write_lines(path, lines)


def write_profile_csv(path, profile: ShellProfile) -> Path:
    """Shell profile as `k,D_k` rows, including the root row k=0."""
    lines = ["k,D_k", "0,1"]
    for k, count in enumerate(profile.shells, start=1):
        lines.append(f"{k},{fmt_value(count)}")
    return _write_lines(path, lines)


def read_profile_csv(path) -> list[float]:
    """Read a `k,D_k` file back into a list of shell counts D_1..D_L.

    A leading k=0 row is accepted (and must carry the value 1); the k column
    must be contiguous.
    """
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ValueError(f"cannot read profile file {path}: {exc}") from exc
    rows = [line.strip() for line in raw if line.strip()]
    if not rows or rows[0] != "k,D_k":
        raise ValueError(f"profile file {path} must start with header 'k,D_k'")
    ks: list[int] = []
    values: list[float] = []
    for line in rows[1:]:
        parts = line.split(",")
        if len(parts) != 2:
            raise ValueError(f"profile file {path}: malformed row {line!r}")
        try:
            ks.append(int(parts[0]))
            values.append(float(parts[1]))
        except ValueError as exc:
            raise ValueError(f"profile file {path}: malformed row {line!r}") from exc
    if not ks:
        raise ValueError(f"profile file {path} has no data rows")
    start = 0
    if ks[0] == 0:
        if values[0] != 1.0:
            raise ValueError(f"profile file {path}: row k=0 must hold D_0 = 1")
        start = 1
    if ks[start:] != list(range(1, len(ks) - start + 1)):
        raise ValueError(f"profile file {path}: k column must be contiguous from 1")
    return values[start:]


def write_curve_csv(path, points: list[DimensionCurvePoint]) -> Path:
    lines = ["log10_p,d,L,log_prob"]
    for pt in points:
        lines.append(
            f"{fmt_value(float(np.log10(pt.link_prob)))},{fmt_value(pt.d)},"
            f"{pt.depth},{fmt_value(pt.log_prob)}"
        )
    return _write_lines(path, lines)


def write_fit_csv(path, fit: DimensionFit) -> Path:
    lines = [
        "d,log_amplitude,residual,points_used",
        f"{fmt_value(fit.d)},{fmt_value(fit.log_amplitude)},"
        f"{fmt_value(fit.residual)},{fit.points_used}",
    ]
    return _write_lines(path, lines)


def write_history_csv(path, snapshots) -> Path:
    lines = [HISTORY_HEADER]
    for snap in snapshots:
        lines.append(
            f"{snap.step},{fmt_value(snap.fro_norm)},{fmt_value(snap.max_abs)},"
            f"{fmt_value(snap.sigma_max)},{fmt_value(snap.sigma_min)},"
            f"{snap.links_above_threshold}"
        )
    return _write_lines(path, lines)


def write_census_csv(path, census_rows: list[dict]) -> Path:
    lines = [CENSUS_HEADER]
    for row in census_rows:
        largest_d = row.get("largest_dimension")
        d_txt = fmt_value(largest_d["d"]) if largest_d else ""
        lines.append(
            f"{row['step']},{row['n_gebits']},{row['n_linked_nodes']},"
            f"{row['largest_size']},{d_txt}"
        )
    return _write_lines(path, lines)


def write_json_report(path, payload: dict) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    return path
