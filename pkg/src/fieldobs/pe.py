"""Excitation diagnostics for the kernel adaptation laws.

Kernel estimates converge only in the directions the regressor signal keeps
visiting. This module quantifies that: it accumulates windowed Gram matrices
of a sampled signal and checks them against a scaled reference weight, the
margin being the smallest eigenvalue of G - kappa P^2. A nonnegative margin
over every window certifies excitation at level kappa relative to P; the
scan reports how the margin moves as the window slides.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError, NumericError
from .grid import CircleGrid, hs_norm

__all__ = [
    "SignalTrajectory",
    "stacked_activation_signal",
    "harmonic_decay_signal",
    "WeightOperator",
    "gram_operator",
    "pe_margin",
    "pe_scan",
    "weighted_kernel_error",
]

# asymmetry beyond this (relative to the largest entry) means the Gram matrix
# was not produced by a symmetric accumulation
_ASYM_TOL = 1e-10


@dataclass(frozen=True)
class SignalTrajectory:
    """A vector signal sampled on a strictly increasing time lattice.

    values[i] is the signal at times[i]; the signal dimension is values.shape[1].
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or v.ndim != 2 or v.shape[0] != t.size:
            raise DimensionError(
                f"need times (m,) and values (m, d), got {t.shape} and {v.shape}"
            )
        if t.size >= 2 and np.any(np.diff(t) <= 0.0):
            raise DomainError("signal times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.shape[1]


def stacked_activation_signal(times, s1_values, s2_values) -> SignalTrajectory:
    """Stack the two regressors into one signal: rows are (S1(zhat1), S2(z2))."""
    a = np.asarray(s1_values, dtype=float)
    b = np.asarray(s2_values, dtype=float)
    if a.shape != b.shape or a.ndim != 2:
        raise DimensionError(f"regressor blocks must share shape (m, n), got {a.shape}, {b.shape}")
    return SignalTrajectory(np.asarray(times, dtype=float), np.hstack([a, b]))


def harmonic_decay_signal(n_modes: int, step: float, t_end: float, t_start: float = 0.0) -> SignalTrajectory:
    """Reference excitation family: mode k carries sin(k t) / k^2, k = 1..n_modes.

    Over a full period the Gram matrix is diagonal with entries pi / k^4, so
    against the inverse-square weight at level pi the margin is zero up to
    quadrature error. Useful as a known-answer probe for the scan machinery.
    """
    if n_modes < 1:
        raise DomainError(f"n_modes must be >= 1, got {n_modes}")
    if not (step > 0.0 and t_end > t_start):
        raise DomainError("need step > 0 and t_end > t_start")
    m = int(np.floor((t_end - t_start) / step + 1e-9)) + 1
    times = t_start + step * np.arange(m)
    k = np.arange(1, n_modes + 1)
    values = np.sin(times[:, None] * k[None, :]) / k[None, :] ** 2
    return SignalTrajectory(times, values)


@dataclass(frozen=True)
class WeightOperator:
    """Diagonal positive weight fixing the directions and scale the excitation
    level is measured against."""

    diagonal: np.ndarray

    def __post_init__(self) -> None:
        d = np.asarray(self.diagonal, dtype=float)
        if d.ndim != 1 or d.size == 0:
            raise DimensionError(f"diagonal must be a nonempty 1-d array, got shape {d.shape}")
        if not np.all(d > 0.0):
            raise DomainError("weight diagonal must be strictly positive")
        object.__setattr__(self, "diagonal", d)

    @classmethod
    def identity(cls, dim: int) -> "WeightOperator":
        return cls(np.ones(dim))

    @classmethod
    def inverse_square(cls, n_modes: int) -> "WeightOperator":
        return cls(1.0 / np.arange(1.0, n_modes + 1.0) ** 2)


def gram_operator(traj: SignalTrajectory, t_start: float, window: float) -> np.ndarray:
    """Trapezoid accumulation of g g* over [t_start, t_start + window].

    Only lattice points inside the window contribute; the window must be
    covered by the sampled range. The result is symmetrized after
    accumulation so downstream eigensolves see an exactly symmetric matrix.
    """
    if not window > 0.0:
        raise DomainError(f"window must be positive, got {window}")
    t_end = t_start + window
    times = traj.times
    tol = 1e-12 * max(1.0, abs(t_end))
    if times.size < 2 or t_start < times[0] - tol or t_end > times[-1] + tol:
        raise DomainError(
            f"window [{t_start:g}, {t_end:g}] is not covered by the sampled "
            f"range [{times[0] if times.size else float('nan'):g}, "
            f"{times[-1] if times.size else float('nan'):g}]"
        )
    i0 = int(np.searchsorted(times, t_start - tol, side="left"))
    i1 = int(np.searchsorted(times, t_end + tol, side="right"))
    sub_t = times[i0:i1]
    sub_v = traj.values[i0:i1]
    if sub_t.size < 2:
        raise DomainError(f"window [{t_start:g}, {t_end:g}] contains fewer than 2 samples")
    dt = np.diff(sub_t)
    weights = np.zeros(sub_t.size)
    weights[:-1] += 0.5 * dt
    weights[1:] += 0.5 * dt
    gram = (sub_v * weights[:, None]).T @ sub_v
    return 0.5 * (gram + gram.T)


def pe_margin(gram: np.ndarray, weight: WeightOperator, kappa: float) -> float:
    """Smallest eigenvalue of G - kappa P^2; nonnegative means the window is
    exciting at level kappa relative to P."""
    if not kappa > 0.0:
        raise DomainError(f"kappa must be positive, got {kappa}")
    g = np.asarray(gram, dtype=float)
    d = weight.diagonal
    if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] != d.size:
        raise DimensionError(f"Gram shape {g.shape} does not match weight dimension {d.size}")
    asym = float(np.max(np.abs(g - g.T)))
    if asym > _ASYM_TOL * max(1.0, float(np.max(np.abs(g)))):
        raise NumericError(f"Gram matrix asymmetry {asym:g} exceeds tolerance")
    shifted = 0.5 * (g + g.T) - kappa * np.diag(d**2)
    return float(np.linalg.eigvalsh(shifted)[0])


def pe_scan(
    traj: SignalTrajectory,
    window: float,
    weight: WeightOperator,
    kappa: float,
    stride: float,
) -> np.ndarray:
    """Slide the Gram window along the signal. Returns rows (t_start, margin).

    Window starts sit on the lattice t0 + k * stride and every window must
    fit inside the sampled range; an empty result means the signal is shorter
    than one window.
    """
    if not stride > 0.0:
        raise DomainError(f"stride must be positive, got {stride}")
    rows = []
    if traj.times.size >= 2:
        t0 = float(traj.times[0])
        t_last = float(traj.times[-1])
        k = 0
        while True:
            t_start = t0 + k * stride
            if t_start + window > t_last + 1e-12 * max(1.0, abs(t_last)):
                break
            gram = gram_operator(traj, t_start, window)
            rows.append((t_start, pe_margin(gram, weight, kappa)))
            k += 1
    return np.array(rows).reshape(-1, 2)


def weighted_kernel_error(what, w_true, input_weights, grid: CircleGrid) -> float:
    """Hilbert-Schmidt size of (what - w_true) composed with a diagonal weight
    on the input side, columns scaled by the weights.

    With weights identically 1 this is the plain kernel error; tapering the
    weights toward poorly excited directions measures the error only where
    excitation makes convergence attainable.
    """
    p = np.asarray(input_weights, dtype=float)
    if p.shape != (grid.n_points,):
        raise DimensionError(f"input_weights has shape {p.shape}, expected ({grid.n_points},)")
    if not np.all(p > 0.0):
        raise DomainError("input_weights must be strictly positive")
    diff = (np.asarray(what, dtype=float) - np.asarray(w_true, dtype=float)) * p[None, :]
    return hs_norm(diff, grid)
