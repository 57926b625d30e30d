"""CSV readers for run directories.

Duplicates the two small on-disk schemas of the simulation package on
purpose: the plotting side consumes files, not code, so a run produced by
any build of the simulator stays plottable.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

_TS_HEADER = "t,e_z1,e_z2,e_W21,e_W22,lyapunov"
_TS_COLUMNS = _TS_HEADER.split(",")


class FigureDataError(RuntimeError):
    """A run directory is missing or holds files we cannot plot."""


def read_timeseries(path) -> dict[str, np.ndarray]:
    """Parse an error time series into column arrays keyed by header name."""
    path = Path(path)
    if not path.is_file():
        raise FigureDataError(f"missing time series: {path}")
    lines = path.read_text().splitlines()
    if not lines or lines[0] != _TS_HEADER:
        raise FigureDataError(f"{path}: expected header '{_TS_HEADER}'")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        cells = line.split(",")
        if len(cells) != len(_TS_COLUMNS):
            raise FigureDataError(
                f"{path}:{lineno}: expected {len(_TS_COLUMNS)} columns, got {len(cells)}"
            )
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            raise FigureDataError(f"{path}:{lineno}: non-numeric cell") from None
    data = np.array(rows) if rows else np.empty((0, len(_TS_COLUMNS)))
    return {name: data[:, i] for i, name in enumerate(_TS_COLUMNS)}


def read_kernel(path) -> tuple[np.ndarray, np.ndarray]:
    """Parse a dense kernel CSV: first row and first column carry coordinates."""
    path = Path(path)
    if not path.is_file():
        raise FigureDataError(f"missing kernel file: {path}")
    rows = [line.split(",") for line in path.read_text().splitlines() if line]
    if len(rows) < 2:
        raise FigureDataError(f"{path}: needs a coordinate row and at least one data row")
    try:
        coords = np.array([float(c) for c in rows[0][1:]])
        body = np.array([[float(c) for c in row] for row in rows[1:]])
    except ValueError:
        raise FigureDataError(f"{path}: non-numeric cell in kernel file") from None
    n = coords.size
    if body.ndim != 2 or body.shape != (n, n + 1):
        raise FigureDataError(
            f"{path}: kernel block has shape {body.shape}, expected ({n}, {n + 1})"
        )
    return coords, body[:, 1:]


def snapshot_path(run_dir, time: float) -> Path:
    """Locate the estimate snapshot for a requested time.

    Snapshot files are named by the shortest plain rendering of the time
    (the writer uses the same rule), so 250.0 maps to what22_t250.csv.
    """
    candidate = Path(run_dir) / f"what22_t{time:g}.csv"
    if not candidate.is_file():
        raise FigureDataError(f"no kernel snapshot for t={time:g} in {run_dir}")
    return candidate
