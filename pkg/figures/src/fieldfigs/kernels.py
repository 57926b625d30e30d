"""Kernel-recovery figure: estimate snapshots next to the hidden target.

A 2x2 block of heatmaps shows the measured-population self-coupling
estimate at the requested times; a reference panel shows the true kernel.
All panels share one color scale taken from the joint data range, so the
approach to the target is visually comparable across times.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .loader import FigureDataError, read_kernel, snapshot_path

_MAX_PANELS = 4


def render_kernel_grid(run_dir, times):
    """Build the snapshot-grid figure for a run directory.

    times: up to four snapshot times; each must have a stored snapshot.
    """
    run_dir = Path(run_dir)
    times = list(times)
    if not times:
        raise FigureDataError("at least one snapshot time is required")
    if len(times) > _MAX_PANELS:
        raise FigureDataError(
            f"at most {_MAX_PANELS} snapshot times per figure, got {len(times)}"
        )

    true_coords, true_kernel = read_kernel(run_dir / "w22_true.csv")
    panels = []
    for t in times:
        coords, kernel = read_kernel(snapshot_path(run_dir, t))
        if coords.size != true_coords.size:
            raise FigureDataError(
                f"snapshot t={t:g} has {coords.size} grid points, "
                f"true kernel has {true_coords.size}"
            )
        panels.append((t, kernel))

    stack = np.concatenate([k.ravel() for _, k in panels] + [true_kernel.ravel()])
    vmin, vmax = float(stack.min()), float(stack.max())
    if vmin == vmax:
        vmax = vmin + 1.0  # degenerate all-constant data still renders

    lo, hi = float(true_coords[0]), float(true_coords[-1])
    extent = (lo, hi, lo, hi)
    fig, axes = plt.subplots(2, 3, figsize=(10.5, 6.2))
    grid_axes = [axes[0][0], axes[0][1], axes[1][0], axes[1][1]]
    image = None
    for ax, (t, kernel) in zip(grid_axes, panels):
        image = ax.imshow(
            kernel, origin="lower", extent=extent, vmin=vmin, vmax=vmax, aspect="equal"
        )
        ax.set_title(f"estimate at t = {t:g}")
    for ax in grid_axes[len(panels) :]:
        ax.set_axis_off()
    axes[0][2].imshow(
        true_kernel, origin="lower", extent=extent, vmin=vmin, vmax=vmax, aspect="equal"
    )
    axes[0][2].set_title("true kernel")
    axes[1][2].set_axis_off()
    fig.colorbar(image, ax=axes[1][2], fraction=0.9, location="left")
    for ax in grid_axes[: len(panels)] + [axes[0][2]]:
        ax.set_xlabel("r'")
        ax.set_ylabel("r")
    fig.tight_layout()
    return fig


def _parse_times(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise FigureDataError(f"cannot parse snapshot times from '{text}'") from None


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot_kernels",
        description="Render kernel-estimate snapshots of a finished run "
        "next to the true kernel.",
    )
    parser.add_argument("run_dir", help="output directory of a completed run")
    parser.add_argument("out_path", help="image file to write (format by extension)")
    parser.add_argument(
        "--times",
        default="0,250,500,1000",
        help="comma-separated snapshot times (default: 0,250,500,1000)",
    )
    args = parser.parse_args(argv)
    try:
        fig = render_kernel_grid(args.run_dir, _parse_times(args.times))
    except FigureDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    fig.savefig(args.out_path, dpi=150)
    plt.close(fig)
    print(f"wrote {args.out_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
