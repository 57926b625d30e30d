"""Orchestration: build the coupled plant/observer system from a config,
integrate it once, and persist everything a later analysis needs.

A run owns one output directory. It writes the error time series, kernel
snapshots at the configured times, the true kernels, the sampled regressor
trajectory with its excitation scan, and a key-value manifest echoing the
config, the convergence diagnostics, step counts and the produced files.
Runs are deterministic: the same config yields byte-identical CSVs.

On integrator failure whatever was accumulated is still flushed and the
manifest carries status = failed plus the error message; the exception then
propagates to the caller.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, config_items, validate_config
from .errors import ConfigError, NumericError
from .grid import CircleGrid, build_circle_grid, gaussian_kernel, write_kernel_csv
from .integrator import CoupledLayout, StepControl, integrate
from .observer import (
    ErrorRecord,
    GainConditionReport,
    ObserverGains,
    ObserverState,
    estimation_errors,
    gain_condition,
    observer_rhs,
)
from .pe import WeightOperator, pe_scan, stacked_activation_signal
from .plant import (
    InputSignal,
    PlantParams,
    PlantState,
    activation_eval,
    logistic_activation,
    plant_rhs,
    sinusoidal_input,
    tanh_activation,
    zero_input,
)

__all__ = [
    "RunSummary",
    "build_plant",
    "build_inputs",
    "make_coupled_rhs",
    "initial_coupled_state",
    "run_experiment",
    "run_pe_analysis",
    "write_timeseries",
    "read_timeseries",
    "read_manifest",
]

_log = logging.getLogger(__name__)

_TS_HEADER = "t,e_z1,e_z2,e_W21,e_W22,lyapunov"
_MANIFEST_NAME = "manifest.txt"
_TIMESERIES_NAME = "timeseries.csv"
_ACTIVATIONS_NAME = "activations.npz"
_PE_SCAN_NAME = "pe_scan.csv"

_ACTIVATION_BUILDERS = {"tanh": tanh_activation, "logistic": logistic_activation}


def build_plant(cfg: ExperimentConfig, grid: CircleGrid) -> PlantParams:
    """Assemble the full plant: distance-bump kernels scaled to the configured
    interaction strengths, shared activation for both populations."""
    act = _ACTIVATION_BUILDERS[cfg.plant.activation]()
    p = cfg.plant
    return PlantParams(
        tau1=p.tau1,
        tau2=p.tau2,
        W11=gaussian_kernel(grid, p.sigma, p.omega11),
        W12=gaussian_kernel(grid, p.sigma, p.omega12),
        W21=gaussian_kernel(grid, p.sigma, p.omega21),
        W22=gaussian_kernel(grid, p.sigma, p.omega22),
        S1=act,
        S2=act,
    )


def build_inputs(cfg: ExperimentConfig) -> tuple[InputSignal, InputSignal]:
    if cfg.inputs.kind == "zero":
        return zero_input(), zero_input()
    i = cfg.inputs
    return (
        sinusoidal_input(i.amplitude, i.lambda1),
        sinusoidal_input(i.amplitude, i.lambda2),
    )


def initial_coupled_state(layout: CoupledLayout) -> np.ndarray:
    """Plant fields start at 1, every observer quantity at 0."""
    n = layout.n
    return layout.pack(
        np.ones(n),
        np.ones(n),
        np.zeros(n),
        np.zeros(n),
        np.zeros((n, n)),
        np.zeros((n, n)),
    )


def make_coupled_rhs(
    params: PlantParams,
    gains: ObserverGains,
    u1: InputSignal,
    u2: InputSignal,
    grid: CircleGrid,
    layout: CoupledLayout,
):
    """Flat-state derivative of plant and observer together. The observer side
    only ever sees the restricted parameter view and the measured field."""
    known = params.known()

    def f(t: float, y: np.ndarray) -> np.ndarray:
        z1, z2, zhat1, zhat2, what21, what22 = layout.unpack(y)
        dplant = plant_rhs(PlantState(z1, z2), t, params, u1, u2, grid)
        dobs = observer_rhs(
            ObserverState(zhat1, zhat2, what21, what22),
            z2,
            t,
            known,
            gains,
            u1,
            u2,
            grid,
        )
        return layout.pack(
            dplant.z1, dplant.z2, dobs.zhat1, dobs.zhat2, dobs.What21, dobs.What22
        )

    return f


def _lattice(stride: float, t_end: float) -> np.ndarray:
    m = int(np.floor(t_end / stride + 1e-9))
    return stride * np.arange(m + 1)


def _sample_plan(cfg: ExperimentConfig):
    """Merge the record, excitation and snapshot lattices into one strictly
    increasing sample list with per-sample roles.

    Returns (times, plan) where plan[i] = (roles, snapshot_label); nearby
    lattice points are identified at 1 ns resolution so a shared nominal time
    is visited once.
    """
    merged: dict[float, list] = {}

    def add(t: float, role: str, label: str | None = None) -> None:
        key = round(float(t), 9)
        entry = merged.setdefault(key, [float(t), set(), None])
        entry[1].add(role)
        if label is not None:
            entry[2] = label

    t_final = cfg.integration.t_final
    for t in _lattice(cfg.integration.sample_stride, t_final):
        add(t, "record")
    add(t_final, "record")
    for t in _lattice(cfg.pe.stride, min(cfg.pe.horizon, t_final)):
        add(t, "pe")
    for t in cfg.snapshots:
        add(t, "snap", label=format(t, "g"))

    keys = sorted(merged)
    times = np.array([merged[k][0] for k in keys])
    plan = [(merged[k][1], merged[k][2]) for k in keys]
    return times, plan


@dataclass(frozen=True)
class RunSummary:
    """What a run hands back in-process; everything else lives in the files."""

    final: ErrorRecord
    n_accepted: int
    n_rejected: int
    diagnostics: GainConditionReport
    output_dir: str
    outputs: tuple[str, ...]
    status: str


def write_timeseries(records, path) -> None:
    """CSV of error records, 17 significant digits, header always present."""
    lines = [_TS_HEADER]
    for r in records:
        lines.append(
            ",".join(
                format(v, ".17g")
                for v in (r.t, r.e_z1, r.e_z2, r.e_W21, r.e_W22, r.lyapunov)
            )
        )
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise ConfigError(f"cannot write time series {path}: {exc}") from None


def read_timeseries(path) -> list[ErrorRecord]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read time series {path}: {exc}") from None
    lines = [ln for ln in text.splitlines() if ln]
    if not lines or lines[0] != _TS_HEADER:
        raise ConfigError(f"{path}: expected header {_TS_HEADER!r}")
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != 6:
            raise ConfigError(f"{path}:{lineno}: expected 6 columns, got {len(cells)}")
        try:
            values = [float(c) for c in cells]
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: non-numeric cell") from None
        records.append(ErrorRecord(*values))
    return records


def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        # shortest representation that parses back to the same float
        return repr(float(v))
    if isinstance(v, tuple):
        return ",".join(_fmt_value(x) for x in v)
    if v is None:
        return "none"
    return str(v)


def _manifest_lines(cfg, report, status, n_acc, n_rej, final, outputs, error=None):
    lines = ["# run manifest", f"status = {status}"]
    if error is not None:
        lines.append(f"error = {error}")
    for key, value in config_items(cfg):
        lines.append(f"config.{key} = {_fmt_value(value)}")
    d = report.dissipativity
    lines.append(f"diagnostics.dissipativity.product = {_fmt_value(d.product)}")
    lines.append(f"diagnostics.dissipativity.alpha = {_fmt_value(d.alpha)}")
    lines.append(f"diagnostics.dissipativity.satisfied = {_fmt_value(d.satisfied)}")
    for name in ("b1_opnorm", "lhs", "rhs", "holds", "epsilon", "mu1", "mu2"):
        lines.append(f"diagnostics.gain.{name} = {_fmt_value(getattr(report, name))}")
    lines.append(f"run.n_accepted = {_fmt_value(n_acc)}")
    lines.append(f"run.n_rejected = {_fmt_value(n_rej)}")
    if final is not None:
        for name in ("t", "e_z1", "e_z2", "e_W21", "e_W22", "lyapunov"):
            lines.append(f"final.{name} = {_fmt_value(getattr(final, name))}")
    for fname in outputs:
        stem = fname.rsplit(".", 1)[0]
        lines.append(f"output.{stem} = {fname}")
    return lines


def read_manifest(run_dir) -> dict[str, str]:
    """Parse a run manifest back to a flat string dict."""
    path = Path(run_dir) / _MANIFEST_NAME
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from None
    out: dict[str, str] = {}
    for line in text.splitlines():
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        key, sep, value = stripped.partition("=")
        if sep:
            out[key.strip()] = value.strip()
    return out


def _write_pe_outputs(out_dir: Path, times, s1_rows, s2_rows) -> list[str]:
    np.savez(
        out_dir / _ACTIVATIONS_NAME,
        times=np.asarray(times, dtype=float),
        s1=np.asarray(s1_rows, dtype=float),
        s2=np.asarray(s2_rows, dtype=float),
    )
    return [_ACTIVATIONS_NAME]


def _write_pe_scan(path, rows) -> None:
    lines = ["t_start,margin"]
    for t_start, margin in rows:
        lines.append(f"{t_start:.17g},{margin:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")


def run_experiment(cfg: ExperimentConfig) -> RunSummary:
    """Run one configured experiment end to end. See the module docstring for
    the output contract; raises integrator errors after flushing partials."""
    validate_config(cfg)
    out_dir = Path(cfg.output_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out_dir}: {exc}") from None

    grid = build_circle_grid(n_points=cfg.grid.n_points, length=cfg.grid.length)
    params = build_plant(cfg, grid)
    gains = ObserverGains(cfg.gains.beta, cfg.gains.gamma1, cfg.gains.gamma2)
    u1, u2 = build_inputs(cfg)

    report = gain_condition(params, gains, grid)
    _log.info(
        "diagnostics: dissipativity product %.6g (satisfied=%s), gain condition holds=%s",
        report.dissipativity.product,
        report.dissipativity.satisfied,
        report.holds,
    )

    outputs: list[str] = []
    write_kernel_csv(params.W21, grid, out_dir / "w21_true.csv")
    write_kernel_csv(params.W22, grid, out_dir / "w22_true.csv")
    outputs += ["w21_true.csv", "w22_true.csv"]

    layout = CoupledLayout(grid.n_points)
    y0 = initial_coupled_state(layout)
    f = make_coupled_rhs(params, gains, u1, u2, grid, layout)
    times, plan = _sample_plan(cfg)
    ctl = StepControl(rtol=cfg.integration.rtol, atol=cfg.integration.atol)

    records: list[ErrorRecord] = []
    pe_times: list[float] = []
    pe_s1: list[np.ndarray] = []
    pe_s2: list[np.ndarray] = []
    snapshot_files: list[str] = []
    cursor = {"i": 0}

    def on_sample(t: float, y: np.ndarray) -> None:
        i = cursor["i"]
        cursor["i"] = i + 1
        roles, label = plan[i]
        canonical = times[i]
        z1, z2, zhat1, zhat2, what21, what22 = layout.unpack(y)
        if "record" in roles:
            records.append(
                estimation_errors(
                    PlantState(z1, z2),
                    ObserverState(zhat1, zhat2, what21, what22),
                    params.W21,
                    params.W22,
                    gains,
                    canonical,
                    grid,
                    tau2=params.tau2,
                )
            )
        if "pe" in roles:
            pe_times.append(canonical)
            pe_s1.append(activation_eval(params.S1, zhat1))
            pe_s2.append(activation_eval(params.S2, z2))
        if "snap" in roles:
            for stem, w in (("what21", what21), ("what22", what22)):
                fname = f"{stem}_t{label}.csv"
                write_kernel_csv(w, grid, out_dir / fname)
                snapshot_files.append(fname)

    _log.info(
        "integrating to t=%g (%d sample times, grid n=%d)",
        cfg.integration.t_final,
        times.size,
        grid.n_points,
    )
    try:
        result = integrate(
            f, y0, 0.0, cfg.integration.t_final, times, ctl, on_sample=on_sample
        )
    except NumericError as exc:
        write_timeseries(records, out_dir / _TIMESERIES_NAME)
        outputs.append(_TIMESERIES_NAME)
        outputs += snapshot_files
        if pe_times:
            outputs += _write_pe_outputs(out_dir, pe_times, pe_s1, pe_s2)
        final = records[-1] if records else None
        lines = _manifest_lines(
            cfg, report, "failed", 0, 0, final, outputs, error=str(exc)
        )
        (out_dir / _MANIFEST_NAME).write_text("\n".join(lines) + "\n")
        _log.error("run failed, partial outputs flushed to %s: %s", out_dir, exc)
        raise

    write_timeseries(records, out_dir / _TIMESERIES_NAME)
    outputs.append(_TIMESERIES_NAME)
    outputs += snapshot_files
    outputs += _write_pe_outputs(out_dir, pe_times, pe_s1, pe_s2)

    traj = stacked_activation_signal(np.array(pe_times), np.array(pe_s1), np.array(pe_s2))
    scan_rows = pe_scan(
        traj,
        cfg.pe.window,
        WeightOperator.identity(traj.dim),
        cfg.pe.kappa,
        cfg.pe.scan_stride,
    )
    _write_pe_scan(out_dir / _PE_SCAN_NAME, scan_rows)
    outputs.append(_PE_SCAN_NAME)

    final = records[-1]
    lines = _manifest_lines(
        cfg, report, "completed", result.n_accepted, result.n_rejected, final, outputs
    )
    (out_dir / _MANIFEST_NAME).write_text("\n".join(lines) + "\n")
    _log.info(
        "run completed: %d accepted / %d rejected steps, final e_W22=%.3g",
        result.n_accepted,
        result.n_rejected,
        final.e_W22,
    )
    return RunSummary(
        final=final,
        n_accepted=result.n_accepted,
        n_rejected=result.n_rejected,
        diagnostics=report,
        output_dir=str(out_dir),
        outputs=tuple(outputs),
        status="completed",
    )


def run_pe_analysis(
    run_dir,
    window: float | None = None,
    kappa: float | None = None,
    scan_stride: float | None = None,
) -> np.ndarray:
    """Recompute the excitation scan of a finished run from its stored
    regressor trajectory, rewriting pe_scan.csv. Scan settings default to the
    ones echoed in the run manifest."""
    run_dir = Path(run_dir)
    manifest = read_manifest(run_dir)

    def setting(override, key, fallback):
        if override is not None:
            return override
        return float(manifest.get(key, fallback))

    window = setting(window, "config.pe.window", np.pi * 2)
    kappa = setting(kappa, "config.pe.kappa", np.pi)
    scan_stride = setting(scan_stride, "config.pe.scan_stride", 1.0)

    path = run_dir / _ACTIVATIONS_NAME
    try:
        with np.load(path) as store:
            times = store["times"]
            s1 = store["s1"]
            s2 = store["s2"]
    except OSError as exc:
        raise ConfigError(f"cannot read stored trajectory {path}: {exc}") from None
    traj = stacked_activation_signal(times, s1, s2)
    rows = pe_scan(traj, window, WeightOperator.identity(traj.dim), kappa, scan_stride)
    _write_pe_scan(run_dir / _PE_SCAN_NAME, rows)
    _log.info("excitation scan over %d windows written to %s", rows.shape[0], run_dir / _PE_SCAN_NAME)
    return rows
