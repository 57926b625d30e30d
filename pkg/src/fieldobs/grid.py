"""Uniform discretization of a circle and the matching discrete L2 calculus.

Fields live on n equally spaced points of a circle of circumference L,
parameterized by arc length on [0, L). Integrals are rectangle-rule sums
with the uniform weight dr = L / n, so a field is a plain 1-d array and an
integral kernel w(r, r') is a dense (n, n) array. All norms in this package
(vector, Hilbert-Schmidt, operator) are taken with respect to that weighted
inner product, which keeps the discrete quantities consistent with their
continuum counterparts as the grid is refined.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DimensionError, DomainError, NumericError

__all__ = [
    "CircleGrid",
    "build_circle_grid",
    "l2_inner_product",
    "l2_norm",
    "apply_kernel",
    "hs_norm",
    "outer_product",
    "operator_norm",
    "geodesic_distance",
    "gaussian_kernel",
    "write_kernel_csv",
    "read_kernel_csv",
]

# Ratio length/spacing must sit within this distance of an integer.
_RATIO_TOL = 1e-9

# One float64 round-trips through 17 significant digits.
_CSV_FMT = "%.17g"


@dataclass(frozen=True, eq=False)
class CircleGrid:
    """Uniform grid on a circle: point i sits at arc-length coordinate i * spacing."""

    n_points: int
    spacing: float
    length: float
    coords: np.ndarray

    def __post_init__(self) -> None:
        if self.n_points < 2:
            raise ConfigError(f"grid needs at least 2 points, got {self.n_points}")
        if not (self.spacing > 0.0 and self.length > 0.0):
            raise ConfigError(
                f"grid spacing and length must be positive, got spacing={self.spacing}, "
                f"length={self.length}"
            )
        if self.coords.shape != (self.n_points,):
            raise DimensionError(
                f"coords has shape {self.coords.shape}, expected ({self.n_points},)"
            )
        self.coords.setflags(write=False)


def build_circle_grid(
    spacing: float | None = None,
    length: float | None = None,
    n_points: int | None = None,
) -> CircleGrid:
    """Build a uniform circular grid from the circumference plus one resolution choice.

    Pass length together with exactly one of spacing or n_points. When spacing
    is given, length / spacing must be an integer (within 1e-9) of at least 2,
    the number of grid points; the circle closes exactly.
    """
    if length is None or not length > 0.0:
        raise ConfigError(f"length must be positive, got {length}")
    if (spacing is None) == (n_points is None):
        raise ConfigError("pass exactly one of spacing or n_points")

    if spacing is not None:
        if not spacing > 0.0:
            raise ConfigError(f"spacing must be positive, got {spacing}")
        ratio = length / spacing
        n = int(round(ratio))
        if abs(ratio - n) > _RATIO_TOL or n < 2:
            raise ConfigError(
                f"length {length!r} is not an integer multiple (>= 2) of spacing "
                f"{spacing!r}: ratio is {ratio!r}"
            )
    else:
        if not isinstance(n_points, (int, np.integer)) or n_points < 2:
            raise ConfigError(f"n_points must be an integer >= 2, got {n_points!r}")
        n = int(n_points)

    dr = length / n
    coords = dr * np.arange(n, dtype=float)
    return CircleGrid(n_points=n, spacing=dr, length=length, coords=coords)


def _as_field(f, grid: CircleGrid, name: str) -> np.ndarray:
    arr = np.asarray(f, dtype=float)
    if arr.shape != (grid.n_points,):
        raise DimensionError(
            f"{name} has shape {arr.shape}, expected ({grid.n_points},) for this grid"
        )
    return arr


def _as_kernel(w, grid: CircleGrid, name: str) -> np.ndarray:
    arr = np.asarray(w, dtype=float)
    n = grid.n_points
    if arr.shape != (n, n):
        raise DimensionError(
            f"{name} has shape {arr.shape}, expected ({n}, {n}) for this grid"
        )
    return arr


def l2_inner_product(f, g, grid: CircleGrid) -> float:
    """Rectangle-rule inner product: sum_i f_i g_i dr."""
    fa = _as_field(f, grid, "f")
    ga = _as_field(g, grid, "g")
    return float(np.dot(fa, ga) * grid.spacing)


def l2_norm(f, grid: CircleGrid) -> float:
    fa = _as_field(f, grid, "f")
    return float(np.sqrt(np.dot(fa, fa) * grid.spacing))


def apply_kernel(w, z, grid: CircleGrid) -> np.ndarray:
    """Apply the integral operator with kernel w to the field z: (w z)_i = sum_j w_ij z_j dr."""
    wa = _as_kernel(w, grid, "w")
    za = _as_field(z, grid, "z")
    return (wa @ za) * grid.spacing

def hs_norm(w, grid: CircleGrid) -> float:
    """Hilbert-Schmidt norm sqrt(sum_ij w_ij^2 dr^2), the discrete L2 norm over the torus."""
    wa = _as_kernel(w, grid, "w")
    return float(np.linalg.norm(wa) * grid.spacing)


def outer_product(v, w) -> np.ndarray:
    """Rank-one kernel (v w*)_ij = v_i w_j, the adjoint pairing of two fields.

    Applying the result to z gives v scaled by the inner product of w and z,
    and its Hilbert-Schmidt norm factors as the product of the two field norms.
    """
    va = np.asarray(v, dtype=float)
    wa = np.asarray(w, dtype=float)
    if va.ndim != 1 or wa.ndim != 1 or va.shape != wa.shape:
        raise DimensionError(
            f"outer_product needs two equal-length 1-d arrays, got {va.shape} and {wa.shape}"
        )
    return np.outer(va, wa)


def operator_norm(w, grid: CircleGrid, tol: float = 1e-8, max_iter: int = 10_000) -> float:
    """Largest singular value of the discrete operator, by power iteration.

    The operator's matrix is M = w * dr. Iteration runs on M^T M from a
    deterministic all-ones start; if that probe is annihilated the iteration
    reseeds once with an index-weighted vector. Convergence is declared when
    the eigenvalue residual drops below tol relative to the current estimate,
    but never before a fixed minimum number of iterations: the all-ones start
    is an exact eigenvector of any circulant kernel, and the floor gives
    rounding noise time to leak into the dominant mode and outgrow it.
    """
    wa = _as_kernel(w, grid, "w")
    if not tol > 0.0:
        raise DomainError(f"tol must be positive, got {tol}")
    m = wa * grid.spacing
    a = m.T @ m
    scale = float(np.linalg.norm(a))
    if scale == 0.0:
        return 0.0

    n = grid.n_points
    v = np.full(n, 1.0 / np.sqrt(n))
    reseeded = False
    prev_est = None
    est = 0.0
    min_floor = min(100, max_iter)
    for it in range(max_iter):
        av = a @ v
        norm_av = float(np.linalg.norm(av))
        if norm_av <= scale * 1e-14:
            # Probe sits in the null space. One deterministic reseed is allowed.
            if reseeded:
                raise NumericError(
                    "power iteration stagnated at 0 on both deterministic start vectors"
                )
            v = np.arange(1.0, n + 1.0)
            v /= np.linalg.norm(v)
            reseeded = True
            continue
        prev_est, est = est, float(v @ av)
        residual = float(np.linalg.norm(av - est * v))
        if it + 1 >= min_floor and residual <= tol * max(est, scale * 1e-14):
            return float(np.sqrt(max(est, 0.0)))
        v = av / norm_av
    raise NumericError(
        f"power iteration did not converge in {max_iter} iterations: "
        f"last two eigenvalue estimates {prev_est!r}, {est!r}"
    )


def geodesic_distance(r, r_prime, length: float):
    """Shortest arc distance on a circle of circumference length.

    Accepts scalars or broadcastable arrays of coordinates in [0, length).
    """
    if not length > 0.0:
        raise DomainError(f"length must be positive, got {length}")
    ra = np.asarray(r, dtype=float)
    pa = np.asarray(r_prime, dtype=float)
    for name, arr in (("r", ra), ("r_prime", pa)):
        if np.any(arr < 0.0) or np.any(arr >= length):
            raise DomainError(f"{name} must lie in [0, {length}), got values outside")
    diff = np.abs(ra - pa)
    dist = np.minimum(diff, length - diff)
    if dist.ndim == 0:
        return float(dist)
    return dist


def gaussian_kernel(grid: CircleGrid, sigma: float, omega: float) -> np.ndarray:
    """Translation-invariant Gaussian bump kernel, scaled to Hilbert-Schmidt norm |omega|.

    Entry (i, j) is omega * exp(-sigma * d(r_i, r_j)^2) / c where d is geodesic
    distance and c normalizes the unscaled bump to unit Hilbert-Schmidt norm.
    """
    if not sigma > 0.0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    dist = geodesic_distance(grid.coords[:, None], grid.coords[None, :], grid.length)
    bump = np.exp(-sigma * dist**2)
    return (omega / hs_norm(bump, grid)) * bump


def write_kernel_csv(w, grid: CircleGrid, path) -> None:
    """Write a kernel as dense CSV: first row r' coordinates, first column r coordinates."""
    wa = _as_kernel(w, grid, "w")
    coord_cells = [_CSV_FMT % c for c in grid.coords]
    lines = ["," + ",".join(coord_cells)]
    for i, row in enumerate(wa):
        lines.append(coord_cells[i] + "," + ",".join(_CSV_FMT % x for x in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_kernel_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a kernel CSV written by write_kernel_csv. Returns (coords, matrix)."""
    text = Path(path).read_text()
    rows = [line.split(",") for line in text.splitlines() if line]
    if len(rows) < 2:
        raise ConfigError(f"{path}: kernel file needs a header row and at least one data row")
    try:
        coords = np.array([float(c) for c in rows[0][1:]])
        body = np.array([[float(c) for c in row] for row in rows[1:]])
    except ValueError as exc:
        raise ConfigError(f"{path}: malformed kernel file: {exc}") from None
    n = coords.size
    if body.shape != (n, n + 1):
        raise ConfigError(
            f"{path}: kernel block has shape {body.shape}, expected ({n}, {n + 1})"
        )
    row_coords = body[:, 0]
    if not np.array_equal(row_coords, coords):
        raise ConfigError(f"{path}: row and column coordinates disagree")
    return coords, body[:, 1:]
