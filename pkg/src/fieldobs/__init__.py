"""Online reconstruction of unknown interaction kernels in a two-population
field model: simulator, adaptive observer, convergence diagnostics, and the
experiment runner behind the `fieldobs` command."""

from .config import ExperimentConfig, load_config, parse_config, validate_config
from .errors import (
    ConfigError,
    DimensionError,
    DomainError,
    FieldObsError,
    NumericError,
    StiffnessError,
)
from .experiment import RunSummary, run_experiment, run_pe_analysis
from .grid import CircleGrid, build_circle_grid
from .observer import ErrorRecord, ObserverGains, ObserverState, gain_condition
from .plant import PlantParams, PlantState, dissipativity_margin

__version__ = "0.1.0"

__all__ = [
    "CircleGrid",
    "ConfigError",
    "DimensionError",
    "DomainError",
    "ErrorRecord",
    "ExperimentConfig",
    "FieldObsError",
    "NumericError",
    "ObserverGains",
    "ObserverState",
    "PlantParams",
    "PlantState",
    "RunSummary",
    "StiffnessError",
    "build_circle_grid",
    "dissipativity_margin",
    "gain_condition",
    "load_config",
    "parse_config",
    "run_experiment",
    "run_pe_analysis",
    "validate_config",
    "__version__",
]
