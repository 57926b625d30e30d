"""Embedded Runge-Kutta 5(4) stepping with proportional step-size control.

The stepper advances the fifth-order solution and controls the step with the
embedded fourth-order error estimate. Acceptance uses a weighted RMS measure:
the raw estimate is divided elementwise by atol + rtol * |state| (taking the
larger magnitude of the two step endpoints) and a step is accepted when the
RMS of that ratio is at most 1. The next step size follows the standard
one-fifth-power rule h * safety * est^(-1/5), with the growth factor capped
at 5 and the shrink factor at 0.2, then clamped to [h_min, h_max].

Sampling lands exactly on requested times by truncating the step, never by
interpolation, so recorded states are genuine solution states. Everything is
sequential numpy: two runs with identical inputs give bit-identical output.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, NumericError, StiffnessError

__all__ = [
    "StepControl",
    "StepResult",
    "rk45_step",
    "IntegrationResult",
    "integrate",
    "CoupledLayout",
]

# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# difference between the fifth- and fourth-order weights
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)

_MAX_GROWTH = 5.0
_MIN_SHRINK = 0.2


@dataclass(frozen=True)
class StepControl:
    rtol: float = 1e-6
    atol: float = 1e-9
    h_init: float = 1e-4
    h_min: float = 1e-12
    h_max: float = 1.0
    safety: float = 0.9

    def __post_init__(self) -> None:
        if not (self.rtol > 0.0 and self.atol > 0.0):
            raise DomainError(f"tolerances must be positive, got rtol={self.rtol}, atol={self.atol}")
        if not (0.0 < self.h_min <= self.h_init <= self.h_max):
            raise DomainError(
                f"need 0 < h_min <= h_init <= h_max, got "
                f"h_min={self.h_min}, h_init={self.h_init}, h_max={self.h_max}"
            )
        if not 0.0 < self.safety < 1.0:
            raise DomainError(f"safety must lie in (0, 1), got {self.safety}")


@dataclass
class StepResult:
    state: np.ndarray
    error_estimate: float
    accepted: bool
    h_next: float


def rk45_step(f: Callable, y: np.ndarray, t: float, h: float, ctl: StepControl) -> StepResult:
    """One trial step from (t, y) of size h. Does not advance time itself."""
    if not h > 0.0:
        raise DomainError(f"step size must be positive, got {h}")
    k = np.empty((7, y.size))
    k[0] = f(t, y)
    for i in range(1, 7):
        k[i] = f(t + _C[i] * h, y + h * (_A[i] @ k[:i]))
    y_new = y + h * (_B5 @ k)
    diff = h * (_E @ k)
    weights = ctl.atol + ctl.rtol * np.maximum(np.abs(y), np.abs(y_new))
    est = float(np.sqrt(np.mean((diff / weights) ** 2)))
    if not np.isfinite(est):
        raise NumericError(f"non-finite state in step from t={t} with h={h}")
    accepted = est <= 1.0
    if est == 0.0:
        factor = _MAX_GROWTH
    else:
        factor = min(_MAX_GROWTH, max(_MIN_SHRINK, ctl.safety * est**-0.2))
    h_next = min(ctl.h_max, max(ctl.h_min, h * factor))
    return StepResult(y_new, est, accepted, h_next)


@dataclass
class IntegrationResult:
    times: np.ndarray
    states: np.ndarray | None
    final_state: np.ndarray
    n_accepted: int
    n_rejected: int


def integrate(
    f: Callable,
    y0: np.ndarray,
    t0: float,
    tf: float,
    samples,
    ctl: StepControl | None = None,
    on_sample: Callable | None = None,
) -> IntegrationResult:
    """Integrate dy/dt = f(t, y) from t0, recording the state at each sample time.

    samples must be strictly increasing and contained in [t0, tf]. When
    on_sample is given it is called as on_sample(t, state) at every sample
    and states are not accumulated in the result (the callback must copy if
    it keeps a reference). Raises StiffnessError if a step at h_min is still
    rejected, NumericError if the state stops being finite.
    """
    ctl = ctl or StepControl()
    y = np.array(y0, dtype=float)
    if y.ndim != 1:
        raise DomainError(f"state must be a 1-d array, got shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise NumericError("initial state contains non-finite entries")
    ts = np.asarray(samples, dtype=float)
    if ts.ndim != 1:
        raise DomainError("samples must be a 1-d array")
    if ts.size and (np.any(np.diff(ts) <= 0.0)):
        raise DomainError("samples must be strictly increasing")
    if ts.size and (ts[0] < t0 or ts[-1] > tf):
        raise DomainError(f"samples must lie in [{t0}, {tf}]")

    keep = on_sample is None
    states = [] if keep else None
    emitted = []
    n_acc = 0
    n_rej = 0
    t = t0
    h = min(max(ctl.h_init, ctl.h_min), ctl.h_max)

    def emit(time: float, state: np.ndarray) -> None:
        emitted.append(time)
        if keep:
            states.append(state)
        else:
            on_sample(time, state)

    idx = 0
    if ts.size and ts[0] == t0:
        emit(t0, y)
        idx = 1

    while idx < ts.size:
        target = ts[idx]
        while t < target:
            remaining = target - t
            truncated = h >= remaining
            h_try = remaining if truncated else h
            res = rk45_step(f, y, t, h_try, ctl)
            if res.accepted:
                n_acc += 1
                y = res.state
                t = target if truncated else t + h_try
                # a truncated landing step says nothing about the natural step
                # size, so keep the previous h in that case
                if not truncated:
                    h = res.h_next
            else:
                n_rej += 1
                if h_try <= ctl.h_min:
                    raise StiffnessError(
                        f"step rejected at the minimum step size h={h_try} "
                        f"(t={t}, error estimate {res.error_estimate})"
                    )
                h = res.h_next
        emit(target, y)
        idx += 1

    return IntegrationResult(
        times=np.array(emitted),
        states=np.array(states) if keep else None,
        final_state=y,
        n_accepted=n_acc,
        n_rejected=n_rej,
    )


class CoupledLayout:
    """Flat-vector layout for the plant plus observer cascade.

    Order: plant z1, plant z2, observer zhat1, observer zhat2, then the two
    estimated kernels row-major. Unpacking returns views into the flat array,
    so flatten-then-unflatten is exact and allocation-free.
    """

    def __init__(self, n_points: int):
        if n_points < 2:
            raise DomainError(f"need at least 2 grid points, got {n_points}")
        self.n = int(n_points)
        self.size = 4 * self.n + 2 * self.n * self.n

    def pack(self, z1, z2, zhat1, zhat2, what21, what22) -> np.ndarray:
        n = self.n
        out = np.empty(self.size)
        for i, block in enumerate((z1, z2, zhat1, zhat2)):
            arr = np.asarray(block, dtype=float)
            if arr.shape != (n,):
                raise DomainError(f"field block {i} has shape {arr.shape}, expected ({n},)")
            out[i * n : (i + 1) * n] = arr
        for i, block in enumerate((what21, what22)):
            arr = np.asarray(block, dtype=float)
            if arr.shape != (n, n):
                raise DomainError(f"kernel block {i} has shape {arr.shape}, expected ({n}, {n})")
            start = 4 * n + i * n * n
            out[start : start + n * n] = arr.ravel()
        return out

    def unpack(self, flat: np.ndarray):
        n = self.n
        if flat.shape != (self.size,):
            raise DomainError(f"flat state has shape {flat.shape}, expected ({self.size},)")
        z1 = flat[0:n]
        z2 = flat[n : 2 * n]
        zhat1 = flat[2 * n : 3 * n]
        zhat2 = flat[3 * n : 4 * n]
        what21 = flat[4 * n : 4 * n + n * n].reshape(n, n)
        what22 = flat[4 * n + n * n :].reshape(n, n)
        return z1, z2, zhat1, zhat2, what21, what22
