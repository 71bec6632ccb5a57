"""Scenario runner, experiment sweeps and file output.

A :class:`ScenarioConfig` is a flat record: the swarm size, the compactness
parameter, coverage sampling settings and optional overrides of any
:class:`~vbca.model.SwarmParams` field. :func:`run` executes one scenario and
writes ``trajectory.csv`` and ``report.json``; the sweep functions return
:class:`Table` objects whose rows are the data behind each experiment.

Every output is a deterministic function of the configuration and seeds.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .coverage import CoverageEstimate, max_volume, sphere_volume, swarm_coverage, two_sphere_union_exact
from .errors import ConnectivityLossError, ParameterError, UnsupportedKError
from .forces import DEFAULT_BASE_A, KAPPA, cp_to_gains, run_to_steady_state, step
from .geometry import ClassificationResult, baseline_coverage, classify_geometry, radial_uniformity
from .model import SwarmParams, SwarmState, initialize, validate_params
from .topology import (
    StepMetrics,
    avg_central_distance,
    collision_violations,
    position_variation,
    step_metrics,
)

CP_GRID = (10, 20, 30, 40, 50, 60, 70)
K_GRID = tuple(range(3, 11))
BASELINE_CP = (40, 50)
BASELINE_K = tuple(range(2, 9))

TRAJECTORY_HEADER = ("step", "id", "role", "x", "y", "z", "vx", "vy", "vz")
BASELINE_LABEL = (
    "baseline = internal exact placement of k drones on the standard geometry "
    "at the matched average central distance; it is not a reimplementation of "
    "any published deployment protocol"
)

_PARAM_FIELDS = {f.name for f in fields(SwarmParams)}


@dataclass(frozen=True)
class ScenarioConfig:
    k_peripheral: int = 7
    cp: float = 40.0
    overrides: dict = field(default_factory=dict)
    output_dir: str | None = None
    coverage_samples: int = 1_000_000
    coverage_seed: int = 0
    include_central_coverage: bool = True

    @classmethod
    def from_mapping(cls, data: dict) -> "ScenarioConfig":
        """Build from a flat mapping; unknown keys are SwarmParams overrides."""
        own = {f.name for f in fields(cls)} - {"overrides"}
        kwargs, overrides = {}, dict(data.get("overrides", {}))
        for key, value in data.items():
            if key == "overrides":
                continue
            if key in own:
                kwargs[key] = value
            elif key in _PARAM_FIELDS:
                overrides[key] = value
            else:
                raise ParameterError(f"unknown config key {key!r}")
        return cls(overrides=overrides, **kwargs)

    def with_(self, **changes) -> "ScenarioConfig":
        data = self.to_dict()
        data.update(changes)
        return ScenarioConfig.from_mapping(data)

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "overrides"}
        out.update(self.overrides)
        return out


def resolve_params(config: ScenarioConfig) -> SwarmParams:
    """SwarmParams for ``config``: the CP mapping, then explicit overrides.

    An override of ``a`` rescales ``r_gain`` through the CP mapping unless
    ``r_gain`` is itself overridden.
    """
    unknown = set(config.overrides) - _PARAM_FIELDS
    if unknown:
        raise ParameterError(f"unknown parameter(s): {sorted(unknown)}")
    if "cp" in config.overrides:
        raise ParameterError("set cp on the scenario, not as an override")
    a, r_gain = cp_to_gains(config.cp, config.overrides.get("a", DEFAULT_BASE_A))
    base = SwarmParams(a=a, r_gain=r_gain, cp=config.cp)
    return base.with_(**{k: v for k, v in config.overrides.items() if k != "a"})


def validate_config(config: ScenarioConfig) -> list[str]:
    errors = []
    if not isinstance(config.k_peripheral, int) or isinstance(config.k_peripheral, bool):
        errors.append("k_peripheral must be an integer")
    elif config.k_peripheral < 1:
        errors.append("k_peripheral must be >= 1")
    if not isinstance(config.cp, (int, float)) or not math.isfinite(config.cp) or config.cp <= 0:
        errors.append("cp must be a finite number > 0")
        return errors
    if not isinstance(config.coverage_samples, int) or config.coverage_samples < 1000:
        errors.append("coverage_samples must be an integer >= 1000")
    if not isinstance(config.coverage_seed, int) or not 0 <= config.coverage_seed < 2**64:
        errors.append("coverage_seed must be an unsigned 64-bit integer")
    try:
        errors.extend(validate_params(resolve_params(config)))
    except (ParameterError, TypeError) as exc:
        errors.append(str(exc))
    return errors


def check_config(config: ScenarioConfig) -> SwarmParams:
    errors = validate_config(config)
    if errors:
        raise ParameterError("; ".join(errors))
    return resolve_params(config)


def load_config(path: str | Path) -> dict:
    """Read a flat JSON object of ScenarioConfig / SwarmParams keys."""
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParameterError(f"{path}: {exc}") from None
    if not isinstance(data, dict):
        raise ParameterError(f"{path}: expected a JSON object")
    return data


@dataclass
class RunReport:
    config: dict
    params: dict
    converged: bool
    steps: int  # integration steps executed
    steps_to_steady_state: int | None
    avg_central_distance: float | None  # m
    coverage: CoverageEstimate | None
    max_volume: float | None  # m^3
    coverage_efficiency: float | None
    classification: ClassificationResult | None
    radial_uniformity: float | None
    collision_violations: int | None
    metrics: list[StepMetrics]
    error: dict | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self) -> dict:
        out = {
            "config": self.config,
            "params": self.params,
            "converged": self.converged,
            "steps": self.steps,
            "steps_to_steady_state": self.steps_to_steady_state,
            "avg_central_distance_m": self.avg_central_distance,
            "coverage": None if self.coverage is None else self.coverage.to_dict(),
            "max_volume_m3": self.max_volume,
            "coverage_efficiency": self.coverage_efficiency,
            "classification": None if self.classification is None else self.classification.to_dict(),
            "radial_uniformity": self.radial_uniformity,
            "collision_violations": self.collision_violations,
            "error": self.error,
            "metrics": [m.to_dict() for m in self.metrics],
        }
        out["display"] = _display(out)
        return _jsonable(out)


def _display(full: dict) -> dict:
    def r(x, nd=3):
        return None if x is None else round(x, nd)

    cov = full["coverage"] or {}
    cls = full["classification"] or {}
    return {
        "converged": full["converged"],
        "steps_to_steady_state": full["steps_to_steady_state"],
        "avg_central_distance_m": r(full["avg_central_distance_m"]),
        "coverage_m3": r(cov.get("volume"), 0),
        "coverage_std_error_m3": r(cov.get("std_error"), 0),
        "coverage_efficiency": r(full["coverage_efficiency"], 4),
        "geometry": cls.get("best_match"),
        "geometry_rms_error_deg": r(cls.get("rms_angle_error"), 2),
        "collision_violations": full["collision_violations"],
    }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _trajectory_rows(state: SwarmState) -> list[str]:
    rows = []
    for i in np.argsort(state.ids, kind="stable"):
        p, v = state.positions[i], state.velocities[i]
        role = "central" if state.central[i] else "peripheral"
        rows.append(
            f"{state.step},{state.ids[i]},{role},"
            f"{p[0]:.6f},{p[1]:.6f},{p[2]:.6f},{v[0]:.6f},{v[1]:.6f},{v[2]:.6f}"
        )
    return [r.replace("-0.000000", "0.000000") for r in rows]


def _final_metrics(config: ScenarioConfig, params: SwarmParams, state: SwarmState) -> dict:
    cov = swarm_coverage(
        state, params.c_obs, config.coverage_samples, config.coverage_seed,
        config.include_central_coverage,
    )
    n_spheres = len(state) if config.include_central_coverage else state.n_peripheral
    vm = max_volume([params.c_obs] * n_spheres)
    try:
        cls = classify_geometry(state) if state.n_peripheral >= 2 else None
    except UnsupportedKError:
        cls = None
    return {
        "avg_central_distance": avg_central_distance(state),
        "coverage": cov,
        "max_volume": vm,
        # A Monte Carlo estimate can overshoot V_m by noise when spheres are
        # disjoint; the true ratio is bounded by 1.
        "coverage_efficiency": min(cov.volume / vm, 1.0),
        "classification": cls,
        "radial_uniformity": radial_uniformity(state),
        "collision_violations": collision_violations(state, params.r_c),
    }


def run(config: ScenarioConfig, write: bool = True) -> RunReport:
    """Initialize, iterate to steady state, measure, and write outputs.

    Invalid configurations raise :class:`ParameterError`. Non-convergence
    and connectivity loss are reported, not raised.
    """
    params = check_config(config)
    state = initialize(config.k_peripheral, params)
    lines = [",".join(TRAJECTORY_HEADER)] + _trajectory_rows(state)
    last = [state]

    def record(s: SwarmState, _m: StepMetrics) -> None:
        lines.extend(_trajectory_rows(s))
        last[0] = s

    # The output directory is left out so artifacts do not depend on where they land.
    echo = {k: v for k, v in config.to_dict().items() if k != "output_dir"}
    base = dict(config=echo, params=params.to_dict())
    try:
        result = run_to_steady_state(state, params, on_step=record)
    except ConnectivityLossError as exc:
        report = RunReport(
            **base, converged=False, steps=last[0].step, steps_to_steady_state=None,
            avg_central_distance=None, coverage=None, max_volume=None,
            coverage_efficiency=None, classification=None, radial_uniformity=None,
            collision_violations=None, metrics=[],
            error={"type": "connectivity_loss", "drone_id": exc.drone_id,
                   "step": exc.step, "distance_m": exc.distance, "message": str(exc)},
        )
    else:
        final = result.final
        report = RunReport(
            **base,
            converged=result.converged,
            steps=final.step,
            steps_to_steady_state=(
                final.step - params.ss_window + 1 if result.converged else None
            ),
            metrics=result.history,
            **_final_metrics(config, params, final),
        )
    if write and config.output_dir is not None:
        out = Path(config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_text(out / "trajectory.csv", "\n".join(lines) + "\n")
        write_report(report, out / "report.json")
    return report


def write_report(report: RunReport, path: str | Path) -> None:
    _write_text(path, json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")


def _write_text(path: str | Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# --------------------------------------------------------------------- tables


@dataclass
class Table:
    """Rows of one experiment plus free-text footer lines (written as ``#``)."""

    name: str
    columns: list[str]
    rows: list[dict] = field(default_factory=list)
    footer: list[str] = field(default_factory=list)

    def column(self, name: str) -> list:
        return [r[name] for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_cell(row.get(c)) for c in self.columns])
        for line in self.footer:
            buf.write(f"# {line}\n")
        return buf.getvalue()

    def write(self, path: str | Path) -> None:
        _write_text(path, self.to_csv())


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return "nan" if math.isnan(value) else repr(float(value))
    return str(value)


def _map(fn: Callable, jobs: Sequence, workers: int) -> list:
    # Results come back in job order whatever the completion order.
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def _settle(k: int, cp: float, seed: int, overrides: dict) -> tuple[SwarmState | None, dict]:
    """Run one cell; returns the final state (or None) and bookkeeping columns."""
    params = resolve_params(ScenarioConfig(k, cp, {**overrides, "seed": seed}))
    try:
        result = run_to_steady_state(initialize(k, params), params)
    except ConnectivityLossError as exc:
        return None, {"converged": False, "steps": exc.step, "error": f"connectivity_loss: {exc}"}
    info = {"converged": result.converged, "steps": result.final.step, "error": ""}
    if not result.converged:
        info["error"] = "not_converged"
    return result.final, info


def _distance_cell(job) -> dict:
    cp, k, seed, overrides = job
    state, info = _settle(k, cp, seed, overrides)
    dist = avg_central_distance(state) if state is not None else math.nan
    return {"cp": cp, "k": k, "seed": seed, "avg_central_distance_m": dist, **info}


def _grid(cps: Iterable, ks: Iterable, replicates: int, base_seed: int, overrides: dict) -> list:
    cells = [(cp, k) for cp in cps for k in ks for _ in range(replicates)]
    return [(cp, k, base_seed + i, dict(overrides)) for i, (cp, k) in enumerate(cells)]


def sweep_cp_vs_distance(
    cps: Iterable[float] = CP_GRID,
    ks: Iterable[int] = K_GRID,
    base_seed: int = 0,
    replicates: int = 1,
    overrides: dict | None = None,
    workers: int = 1,
) -> Table:
    """Steady-state average distance to the central drone over a (cp, k) grid."""
    jobs = _grid(cps, ks, replicates, base_seed, overrides or {})
    rows = _map(_distance_cell, jobs, workers)
    table = Table(
        "cp_vs_distance",
        ["cp", "k", "seed", "avg_central_distance_m", "converged", "steps", "error"],
        rows,
    )
    for cp in dict.fromkeys(r["cp"] for r in rows):
        d = [r["avg_central_distance_m"] for r in rows if r["cp"] == cp]
        d = [x for x in d if not math.isnan(x)]
        if d:
            table.footer.append(f"cp={cp} spread_m={max(d) - min(d):.6f}")
    return table


def _coverage_cell(job) -> dict:
    cp, k, seed, overrides, samples, cov_seed, include_central = job
    state, info = _settle(k, cp, seed, overrides)
    params = resolve_params(ScenarioConfig(k, cp, overrides))
    n = k + 1 if include_central else k
    vm = max_volume([params.c_obs] * n)
    row = {"cp": cp, "k": k, "seed": seed, "max_volume_m3": vm, **info,
           "union_volume_m3": math.nan, "std_error_m3": math.nan, "efficiency": math.nan}
    if state is not None:
        cov = swarm_coverage(state, params.c_obs, samples, cov_seed, include_central)
        row.update(union_volume_m3=cov.volume, std_error_m3=cov.std_error,
                   efficiency=min(cov.volume / vm, 1.0))
    return row


def linear_fit(x: Sequence[float], y: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares ``(slope, intercept, r_squared)``."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    ss_res = float(((y - (slope * x + intercept)) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def coverage_fits(table: Table) -> dict:
    """Per-cp linear fit of union volume against k."""
    fits = {}
    for cp in dict.fromkeys(table.column("cp")):
        pts = [(r["k"], r["union_volume_m3"]) for r in table.rows
               if r["cp"] == cp and not math.isnan(r["union_volume_m3"])]
        if len(pts) >= 2:
            fits[cp] = linear_fit(*zip(*pts))
    return fits


def sweep_coverage_vs_k(
    cps: Iterable[float] = CP_GRID,
    ks: Iterable[int] = K_GRID,
    base_seed: int = 0,
    samples: int = 250_000,
    coverage_seed: int = 0,
    include_central: bool = True,
    overrides: dict | None = None,
    workers: int = 1,
) -> Table:
    """Steady-state union coverage over a (cp, k) grid with per-cp linear fits."""
    jobs = [j + (samples, coverage_seed, include_central)
            for j in _grid(cps, ks, 1, base_seed, overrides or {})]
    rows = _map(_coverage_cell, jobs, workers)
    table = Table(
        "coverage_vs_k",
        ["cp", "k", "seed", "union_volume_m3", "std_error_m3", "max_volume_m3",
         "efficiency", "converged", "steps", "error"],
        rows,
    )
    for cp, (slope, intercept, r2) in coverage_fits(table).items():
        table.footer.append(
            f"fit cp={cp} slope_m3_per_drone={slope:.6f} intercept_m3={intercept:.6f} r2={r2:.6f}"
        )
    return table


def collinear_union_exact(distance: float, c_obs: float) -> float:
    """Exact union of three equal spheres at ``-d, 0, +d`` on a line.

    The outer spheres only meet inside the middle one, so inclusion-exclusion
    reduces to two pairwise unions minus the shared middle sphere.
    """
    return 2.0 * two_sphere_union_exact(c_obs, c_obs, distance) - sphere_volume(c_obs)


def _baseline_cell(job) -> dict:
    cp, k, seed, overrides, samples, cov_seed, include_central = job
    state, info = _settle(k, cp, seed, overrides)
    params = resolve_params(ScenarioConfig(k, cp, overrides))
    row = {"cp": cp, "k": k, "seed": seed, **info}
    nan = math.nan
    row.update(avg_central_distance_m=nan, vbca_coverage_m3=nan, vbca_std_error_m3=nan,
               baseline_coverage_m3=nan, baseline_std_error_m3=nan, ratio=nan,
               collinear_exact_m3=nan)
    if state is None:
        return row
    dist = avg_central_distance(state)
    vbca = swarm_coverage(state, params.c_obs, samples, cov_seed, include_central)
    base = baseline_coverage(k, dist, params.c_obs, samples, cov_seed, include_central)
    row.update(avg_central_distance_m=dist, vbca_coverage_m3=vbca.volume,
               vbca_std_error_m3=vbca.std_error, baseline_coverage_m3=base.volume,
               baseline_std_error_m3=base.std_error, ratio=vbca.volume / base.volume)
    if k == 2 and include_central:
        row["collinear_exact_m3"] = collinear_union_exact(dist, params.c_obs)
    return row


def baseline_comparison(
    cps: Iterable[float] = BASELINE_CP,
    ks: Iterable[int] = BASELINE_K,
    base_seed: int = 0,
    samples: int = 250_000,
    coverage_seed: int = 0,
    include_central: bool = True,
    overrides: dict | None = None,
    workers: int = 1,
) -> Table:
    """Swarm coverage against exact placement at the same average radius."""
    jobs = [j + (samples, coverage_seed, include_central)
            for j in _grid(cps, ks, 1, base_seed, overrides or {})]
    rows = _map(_baseline_cell, jobs, workers)
    return Table(
        "baseline_comparison",
        ["cp", "k", "seed", "avg_central_distance_m", "vbca_coverage_m3", "vbca_std_error_m3",
         "baseline_coverage_m3", "baseline_std_error_m3", "ratio", "collinear_exact_m3",
         "converged", "steps", "error"],
        rows,
        [BASELINE_LABEL],
    )


def stability_trace(
    k: int = 7,
    cp: float = 40.0,
    seed: int = 0,
    horizon: int | None = None,
    overrides: dict | None = None,
) -> Table:
    """Per-step change of each peripheral's distance to the central drone.

    The step-0 row holds each peripheral's initial offset from the deployment
    point. Without ``horizon`` the trace stops once steady state is reached,
    giving ``steps_to_steady_state + ss_window`` rows; with it, exactly
    ``horizon`` steps are integrated regardless of convergence.
    """
    if k < 1:
        raise ParameterError("k must be >= 1")
    params = resolve_params(ScenarioConfig(k, cp, {**(overrides or {}), "seed": seed}))
    state = initialize(k, params)
    ids = [int(i) for i in state.peripheral_ids]
    columns = ["step"] + [f"drone_{i}_variation_m" for i in ids] + ["mean_variation_m"]
    table = Table("stability", columns)

    def add(step_no: int, values: np.ndarray) -> None:
        row = {"step": step_no, "mean_variation_m": float(values.mean())}
        row.update({f"drone_{i}_variation_m": float(v) for i, v in zip(ids, values)})
        table.rows.append(row)

    add(0, state.central_distances()[~state.central])

    if horizon is None:
        prev = [state]

        def record(nxt: SwarmState, _m: StepMetrics) -> None:
            add(nxt.step, position_variation(prev[0], nxt).values)
            prev[0] = nxt

        try:
            result = run_to_steady_state(state, params, on_step=record)
        except ConnectivityLossError as exc:
            table.footer.append(f"error connectivity_loss: {exc}")
            return table
        if not result.converged:
            table.footer.append(f"error not_converged within {params.max_steps} steps")
        return table

    for _ in range(horizon):
        try:
            nxt = step(state, params)
        except ConnectivityLossError as exc:
            table.footer.append(f"error connectivity_loss: {exc}")
            break
        add(nxt.step, position_variation(state, nxt).values)
        if not step_metrics(state, nxt, params).fully_connected:
            table.footer.append(f"error connectivity_loss at step {nxt.step}")
            break
        state = nxt
    return table


__all__ = [
    "BASELINE_LABEL",
    "CP_GRID",
    "K_GRID",
    "KAPPA",
    "RunReport",
    "ScenarioConfig",
    "Table",
    "baseline_comparison",
    "check_config",
    "collinear_union_exact",
    "coverage_fits",
    "linear_fit",
    "load_config",
    "resolve_params",
    "run",
    "stability_trace",
    "sweep_coverage_vs_k",
    "sweep_cp_vs_distance",
    "validate_config",
    "write_report",
]
