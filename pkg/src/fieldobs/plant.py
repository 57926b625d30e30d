"""Two-population field dynamics with integral coupling kernels.

The state is a pair of fields (z1, z2) on a shared circular grid. Each
population leaks toward zero at rate 1/tau, receives an external drive, and
is coupled to both populations through integral kernels applied to pointwise
saturated activity. Population 2 is the measured one; its incoming kernels
are the targets of online estimation elsewhere in the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionError, DomainError
from .grid import CircleGrid, apply_kernel, operator_norm

__all__ = [
    "Activation",
    "tanh_activation",
    "logistic_activation",
    "custom_activation",
    "table_activation",
    "activation_eval",
    "InputSignal",
    "sinusoidal_input",
    "zero_input",
    "custom_input",
    "input_eval",
    "KnownPlantParams",
    "PlantParams",
    "PlantState",
    "plant_rhs",
    "DissipativityMargin",
    "dissipativity_margin",
]

_VALIDATION_SAMPLES = 1_000_000
_VALIDATION_RANGE = 60.0


@dataclass(frozen=True)
class Activation:
    """Pointwise saturation with certified Lipschitz and amplitude constants."""

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    lipschitz: float
    bound: float


def tanh_activation() -> Activation:
    # constants are exact for tanh, no sampling needed
    return Activation("tanh", np.tanh, lambda z: 1.0 - np.tanh(z) ** 2, 1.0, 1.0)


def logistic_activation() -> Activation:
    def fn(z):
        # overflow-free logistic
        return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z)))

    def deriv(z):
        s = fn(z)
        return s * (1.0 - s)

    return Activation("logistic", fn, deriv, 0.25, 1.0)


def _validate_constants(act: Activation) -> None:
    """Spot-check the claimed constants on a dense deterministic sample."""
    z = np.linspace(-_VALIDATION_RANGE, _VALIDATION_RANGE, _VALIDATION_SAMPLES)
    s = np.asarray(act.fn(z), dtype=float)
    if s.shape != z.shape or not np.all(np.isfinite(s)):
        raise DomainError(f"activation {act.name!r} must map finite samples to finite values")
    slack = 1e-9 * max(1.0, act.bound)
    if np.max(np.abs(s)) > act.bound + slack:
        raise DomainError(
            f"activation {act.name!r} exceeds its amplitude bound {act.bound}: "
            f"max |S| = {np.max(np.abs(s))}"
        )
    d = np.abs(np.asarray(act.deriv(z), dtype=float))
    # central differences would add noise; the derivative callable is part of the contract
    if np.max(d) > act.lipschitz * (1.0 + 1e-9) + 1e-12:
        raise DomainError(
            f"activation {act.name!r} exceeds its Lipschitz constant {act.lipschitz}: "
            f"max |S'| = {np.max(d)}"
        )


def custom_activation(
    fn: Callable,
    deriv: Callable,
    lipschitz: float,
    bound: float,
    name: str = "custom",
) -> Activation:
    """Wrap a user-supplied saturation. The claimed constants are validated by sampling."""
    if not (lipschitz > 0.0 and bound > 0.0):
        raise DomainError("lipschitz and bound must be positive")
    act = Activation(name, fn, deriv, float(lipschitz), float(bound))
    _validate_constants(act)
    return act


def table_activation(z_nodes, s_values, name: str = "table") -> Activation:
    """Piecewise-linear saturation from a lookup table, constants derived from the table.

    Outside the table range the value is held constant at the end samples.
    """
    zn = np.asarray(z_nodes, dtype=float)
    sv = np.asarray(s_values, dtype=float)
    if zn.ndim != 1 or zn.shape != sv.shape or zn.size < 2:
        raise DomainError("table needs two equal-length 1-d arrays with at least 2 nodes")
    if np.any(np.diff(zn) <= 0.0):
        raise DomainError("table nodes must be strictly increasing")
    slopes = np.diff(sv) / np.diff(zn)

    def fn(z):
        return np.interp(z, zn, sv)

    def deriv(z):
        za = np.asarray(z, dtype=float)
        idx = np.clip(np.searchsorted(zn, za, side="right") - 1, 0, slopes.size - 1)
        out = slopes[idx]
        return np.where((za < zn[0]) | (za >= zn[-1]), 0.0, out)

    lipschitz = float(np.max(np.abs(slopes)))
    bound = float(np.max(np.abs(sv)))
    if lipschitz == 0.0 or bound == 0.0:
        raise DomainError("table must have nonzero slope and amplitude somewhere")
    return Activation(name, fn, deriv, lipschitz, bound)


def activation_eval(act: Activation, z) -> np.ndarray:
    return np.asarray(act.fn(z), dtype=float)


@dataclass(frozen=True)
class InputSignal:
    """External drive u(t, r). Kinds: sinusoidal-product, zero, custom."""

    kind: str
    amplitude: float = 0.0
    frequency: float = 0.0
    fn: Callable | None = None


def sinusoidal_input(amplitude: float, frequency: float) -> InputSignal:
    """Drive amplitude * sin(frequency * t * r): a spatial sweep whose local
    frequency grows linearly with time."""
    return InputSignal("sinusoidal-product", float(amplitude), float(frequency))


def zero_input() -> InputSignal:
    return InputSignal("zero")


def custom_input(fn: Callable) -> InputSignal:
    return InputSignal("custom", fn=fn)


def input_eval(u: InputSignal, t: float, grid: CircleGrid) -> np.ndarray:
    if u.kind == "zero":
        return np.zeros(grid.n_points)
    if u.kind == "sinusoidal-product":
        return u.amplitude * np.sin(u.frequency * t * grid.coords)
    if u.kind == "custom":
        out = np.asarray(u.fn(t, grid.coords), dtype=float)
        if out.shape != (grid.n_points,):
            raise DimensionError(
                f"custom input returned shape {out.shape}, expected ({grid.n_points},)"
            )
        return out
    raise DomainError(f"unknown input kind {u.kind!r}")


@dataclass(frozen=True)
class KnownPlantParams:
    """The model structure available to the estimator: time constants, the
    kernels feeding the unmeasured population, and both saturations. The
    kernels feeding the measured population are deliberately absent."""

    tau1: float
    tau2: float
    W11: np.ndarray
    W12: np.ndarray
    S1: Activation
    S2: Activation

    def __post_init__(self) -> None:
        if not (self.tau1 > 0.0 and self.tau2 > 0.0):
            raise DomainError(f"time constants must be positive, got {self.tau1}, {self.tau2}")


@dataclass(frozen=True)
class PlantParams:
    """Full model: time constants, all four coupling kernels, both saturations."""

    tau1: float
    tau2: float
    W11: np.ndarray
    W12: np.ndarray
    W21: np.ndarray
    W22: np.ndarray
    S1: Activation
    S2: Activation

    def __post_init__(self) -> None:
        if not (self.tau1 > 0.0 and self.tau2 > 0.0):
            raise DomainError(f"time constants must be positive, got {self.tau1}, {self.tau2}")

    def known(self) -> KnownPlantParams:
        return KnownPlantParams(self.tau1, self.tau2, self.W11, self.W12, self.S1, self.S2)


@dataclass
class PlantState:
    z1: np.ndarray
    z2: np.ndarray


def plant_rhs(
    state: PlantState,
    t: float,
    p: PlantParams,
    u1: InputSignal,
    u2: InputSignal,
    grid: CircleGrid,
) -> PlantState:
    """Time derivative of the coupled fields.

    tau_i dz_i/dt = -z_i + u_i + sum_j W_ij S_j(z_j)
    """
    s1 = activation_eval(p.S1, state.z1)
    s2 = activation_eval(p.S2, state.z2)
    dz1 = (
        -state.z1
        + input_eval(u1, t, grid)
        + apply_kernel(p.W11, s1, grid)
        + apply_kernel(p.W12, s2, grid)
    ) / p.tau1
    dz2 = (
        -state.z2
        + input_eval(u2, t, grid)
        + apply_kernel(p.W21, s1, grid)
        + apply_kernel(p.W22, s2, grid)
    ) / p.tau2
    return PlantState(dz1, dz2)


@dataclass(frozen=True)
class DissipativityMargin:
    """Self-coupling strength of the unmeasured population and, when that
    strength stays below 1, the resulting contraction rate."""

    product: float
    alpha: float | None

    @property
    def satisfied(self) -> bool:
        return self.alpha is not None


def dissipativity_margin(p: PlantParams, grid: CircleGrid, tol: float = 1e-8) -> DissipativityMargin:
    """Check l1 * |W11|_op < 1 and report alpha = (1 - l1 |W11|_op) / tau1.

    The unmeasured subsystem contracts at rate alpha whenever the product is
    below 1; at or above 1 no rate is reported.
    """
    product = p.S1.lipschitz * operator_norm(p.W11, grid, tol=tol)
    if product < 1.0:
        return DissipativityMargin(product, (1.0 - product) / p.tau1)
    return DissipativityMargin(product, None)
