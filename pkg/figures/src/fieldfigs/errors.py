"""Error-decay figure: the four estimation errors against time, log scale."""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .loader import FigureDataError, read_timeseries

_CURVES = ("e_z1", "e_z2", "e_W21", "e_W22")


def render_errors(run_dir):
    """Build the error-decay figure for a run directory.

    Zero values vanish on the log axis (a fully converged state error does
    reach exact zero); an empty time series still yields a figure, with a
    warning, so batch plotting over partial runs does not abort.
    """
    data = read_timeseries(Path(run_dir) / "timeseries.csv")
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    if data["t"].size == 0:
        warnings.warn(f"{run_dir}: time series is empty, rendering empty axes")
    else:
        for name in _CURVES:
            ax.plot(data["t"], data[name], label=name, linewidth=1.2)
        ax.legend(loc="best")
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("estimation error")
    ax.set_title("state and kernel estimation errors")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    return fig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot_errors",
        description="Render the error-decay curves of a finished run.",
    )
    parser.add_argument("run_dir", help="output directory of a completed run")
    parser.add_argument("out_path", help="image file to write (format by extension)")
    args = parser.parse_args(argv)
    try:
        fig = render_errors(args.run_dir)
    except FigureDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    fig.savefig(args.out_path, dpi=150)
    plt.close(fig)
    print(f"wrote {args.out_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
