from __future__ import annotations

import numpy as np
import pytest

TS_HEADER = "t,e_z1,e_z2,e_W21,e_W22,lyapunov"


def kernel_csv_text(coords: np.ndarray, matrix: np.ndarray) -> str:
    cells = [repr(float(c)) for c in coords]
    lines = ["," + ",".join(cells)]
    for coord_cell, row in zip(cells, matrix):
        lines.append(coord_cell + "," + ",".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def decaying_timeseries_text(n_rows: int = 11) -> str:
    lines = [TS_HEADER]
    for k in range(n_rows):
        t = float(k)
        e1, e2 = np.exp(-t), 0.5 * np.exp(-0.5 * t)
        w1, w2 = 2.0 * np.exp(-0.1 * t), 2.0 * np.exp(-0.08 * t)
        v = e1**2 + e2**2 + (w1**2 + w2**2) / 100.0
        lines.append(",".join(repr(float(x)) for x in (t, e1, e2, w1, w2, v)))
    return "\n".join(lines) + "\n"


@pytest.fixture()
def run_dir(tmp_path):
    """A synthetic completed-run directory with two snapshots."""
    n = 6
    coords = 0.1 * np.arange(n)
    # ring-shaped target: strongest one step off the diagonal
    idx = np.arange(n)
    offset = np.minimum(np.abs(idx[:, None] - idx[None, :]), 6 - np.abs(idx[:, None] - idx[None, :]))
    true = np.exp(-((offset - 1.0) ** 2))
    d = tmp_path / "run"
    d.mkdir()
    (d / "timeseries.csv").write_text(decaying_timeseries_text())
    (d / "w22_true.csv").write_text(kernel_csv_text(coords, true))
    (d / "what22_t0.csv").write_text(kernel_csv_text(coords, np.zeros((n, n))))
    (d / "what22_t1.csv").write_text(kernel_csv_text(coords, 0.5 * true))
    (d / "manifest.txt").write_text("status = completed\n")
    return d


def dir_contents(path) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in sorted(path.iterdir())}
