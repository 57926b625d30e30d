from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from fieldobs.grid import build_circle_grid

settings.register_profile("suite", derandomize=True, max_examples=50, deadline=None)
settings.load_profile("suite")

REPO_ROOT = Path(__file__).resolve().parents[1]
CONFIG_DIR = REPO_ROOT / "configs"


@pytest.fixture(scope="session")
def grid126():
    return build_circle_grid(n_points=126, length=math.tau)


@pytest.fixture(scope="session")
def grid16():
    return build_circle_grid(n_points=16, length=math.tau)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260822)


MICRO_TEMPLATE = """
grid.n_points = 16
grid.length = 6.283185307179586
plant.tau1 = 1.0
plant.tau2 = 1.0
plant.omega11 = 0.1
plant.omega12 = 2.0
plant.omega21 = -2.0
plant.omega22 = 2.0
plant.sigma = 60.0
plant.activation = tanh
inputs.kind = sinusoidal-product
inputs.amplitude = 1000.0
inputs.lambda1 = 1.0
inputs.lambda2 = 1.4142135623730951
gains.beta = 1.0
gains.gamma1 = 100.0
gains.gamma2 = 100.0
integration.t_final = 2.0
integration.sample_stride = 0.5
integration.rtol = 1e-6
integration.atol = 1e-9
snapshots.times = 0, 1
"""


@pytest.fixture()
def micro_config(tmp_path):
    """Factory for small throwaway experiment configs rooted in tmp_path."""

    def make(name: str = "micro", **overrides):
        lines = []
        for line in MICRO_TEMPLATE.strip().splitlines():
            key = line.split("=")[0].strip()
            if key in overrides:
                value = overrides.pop(key)
                if value is None:
                    continue
                lines.append(f"{key} = {value}")
            else:
                lines.append(line)
        out_dir = overrides.pop("output.dir", tmp_path / (name + "_out"))
        lines.append(f"output.dir = {out_dir}")
        for key, value in overrides.items():
            lines.append(f"{key} = {value}")
        path = tmp_path / f"{name}.cfg"
        path.write_text("\n".join(lines) + "\n")
        return path

    return make
