"""Plots for finished kernel-observer run directories.

Reads only the CSV files a run leaves behind; never imports the simulation
package and never writes into a run directory.
"""

from .errors import render_errors
from .kernels import render_kernel_grid
from .loader import FigureDataError, read_kernel, read_timeseries

__all__ = [
    "FigureDataError",
    "read_kernel",
    "read_timeseries",
    "render_errors",
    "render_kernel_grid",
]

__version__ = "0.1.0"
