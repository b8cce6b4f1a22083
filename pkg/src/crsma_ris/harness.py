"""Batch experiment runner: Monte Carlo sweeps over schemes and one axis.

A sweep fixes a base configuration and varies one axis (far-user rate
threshold, RIS element count, or RIS x-position).  For every (axis value,
channel draw) cell the same fading realization is handed to every requested
scheme, so scheme comparisons are paired.  Result tables are deterministic
given the spec; wall-clock timings go to a separate sidecar file so the main
table stays byte-reproducible.
"""

from __future__ import annotations

import concurrent.futures
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.stats
import yaml

from .baselines import SchemeId, solve_scheme
from .channels import generate_channels
from .config import SystemConfig
from .conic import NumericalFailure

SWEEP_AXES = ("rate_threshold_far", "ris_elements", "ris_x_position")

DEFAULT_N_DRAWS = 50

ROWS_FILENAME = "rows.jsonl"
TIMINGS_FILENAME = "timings.jsonl"
SUMMARY_FILENAME = "summary.json"
PLOT_FILENAME = "plot.tsv"


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep: base config, axis, axis values, schemes, draw count."""

    base: SystemConfig
    axis: str
    values: tuple
    schemes: tuple = tuple(SchemeId)
    n_channel_draws: int = DEFAULT_N_DRAWS
    output_dir: str = "results"

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ValueError(f"axis must be one of {SWEEP_AXES}")
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ValueError("axis values must be non-empty")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("axis values must be strictly increasing")
        object.__setattr__(self, "values", vals)
        schemes = tuple(s if isinstance(s, SchemeId) else SchemeId(s)
                        for s in self.schemes)
        if not schemes:
            raise ValueError("scheme list must be non-empty")
        object.__setattr__(self, "schemes", schemes)
        if self.n_channel_draws < 1:
            raise ValueError("n_channel_draws must be at least 1")

    def to_dict(self) -> dict:
        return {
            "base": self.base.to_dict(),
            "axis": self.axis,
            "values": list(self.values),
            "schemes": [s.value for s in self.schemes],
            "n_channel_draws": self.n_channel_draws,
            "output_dir": str(self.output_dir),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        kwargs = dict(d)
        kwargs["base"] = SystemConfig.from_dict(kwargs.get("base") or {})
        return cls(**kwargs)

    @classmethod
    def from_yaml(cls, path) -> "ExperimentSpec":
        with open(path) as f:
            data = yaml.safe_load(f)
        return cls.from_dict(data or {})


def apply_axis(cfg: SystemConfig, axis: str, value: float) -> SystemConfig:
    """Return the base config with one sweep axis overridden."""
    if axis == "rate_threshold_far":
        return cfg.replace(rate_thresholds=(cfg.rate_thresholds[0], float(value)))
    if axis == "ris_elements":
        if value != int(value):
            raise ValueError("ris_elements axis values must be integers")
        return cfg.replace(n_ris_elements=int(value))
    if axis == "ris_x_position":
        _, y, z = cfg.pos_ris
        return cfg.replace(pos_ris=(float(value), y, z))
    raise ValueError(f"axis must be one of {SWEEP_AXES}")


@dataclass
class ResultRow:
    """One (scheme, axis value, channel draw) outcome.

    ``wall_time`` is informational only; it is written to the timings sidecar
    and excluded from the deterministic result table.
    """

    scheme: str
    axis_value: float
    seed: int
    status: str  # "ok" | "infeasible" | "numerical_failure"
    energy_watts: float | None
    best_delta: float | None
    ao_iterations: int | None
    channel_digest: str
    wall_time: float = 0.0

    def to_record(self) -> dict:
        return {
            "scheme": self.scheme,
            "axis_value": self.axis_value,
            "seed": self.seed,
            "status": self.status,
            "energy_watts": self.energy_watts,
            "best_delta": self.best_delta,
            "ao_iterations": self.ao_iterations,
            "channel_digest": self.channel_digest,
        }

    @classmethod
    def from_record(cls, d: dict) -> "ResultRow":
        return cls(**d)


def _solve_cell(base: SystemConfig, axis: str, value: float, seed: int,
                schemes: tuple) -> list[ResultRow]:
    """Run every scheme on one shared channel draw."""
    cfg = apply_axis(base, axis, value).replace(rng_seed=seed)
    ch = generate_channels(cfg, np.random.default_rng(seed))
    digest = ch.digest()
    rows = []
    for scheme in schemes:
        t0 = time.perf_counter()
        try:
            res = solve_scheme(scheme, ch, cfg)
        except NumericalFailure:
            rows.append(ResultRow(scheme=scheme.value, axis_value=value,
                                  seed=seed, status="numerical_failure",
                                  energy_watts=None, best_delta=None,
                                  ao_iterations=None, channel_digest=digest,
                                  wall_time=time.perf_counter() - t0))
            continue
        wall = time.perf_counter() - t0
        iters = sum(len(r.trace) for r in res.per_delta.values())
        if res.feasible:
            rows.append(ResultRow(scheme=scheme.value, axis_value=value,
                                  seed=seed, status="ok",
                                  energy_watts=float(res.energy_watts),
                                  best_delta=float(res.best_delta),
                                  ao_iterations=iters, channel_digest=digest,
                                  wall_time=wall))
        else:
            rows.append(ResultRow(scheme=scheme.value, axis_value=value,
                                  seed=seed, status="infeasible",
                                  energy_watts=None, best_delta=None,
                                  ao_iterations=iters, channel_digest=digest,
                                  wall_time=wall))
    if len({r.channel_digest for r in rows}) != 1:
        raise AssertionError("schemes within a cell saw different channels")
    return rows


@dataclass
class CellSummary:
    mean_energy: float | None
    ci_half_width: float | None
    n_feasible: int
    n_rows: int
    infeasible_fraction: float

    def to_dict(self) -> dict:
        return {
            "mean_energy": self.mean_energy,
            "ci_half_width": self.ci_half_width,
            "n_feasible": self.n_feasible,
            "n_rows": self.n_rows,
            "infeasible_fraction": self.infeasible_fraction,
        }


@dataclass
class ExperimentSummary:
    schemes: tuple
    values: tuple
    cells: dict = field(default_factory=dict)  # (scheme, value) -> CellSummary

    def cell(self, scheme: str, value: float) -> CellSummary:
        return self.cells[(scheme, float(value))]

    def to_dict(self) -> dict:
        return {
            "schemes": list(self.schemes),
            "values": list(self.values),
            "cells": [{"scheme": s, "axis_value": v, **c.to_dict()}
                      for (s, v), c in sorted(self.cells.items())],
        }


def summarize(rows: list[ResultRow]) -> ExperimentSummary:
    """Per (scheme, axis value) mean energy, 95% CI, infeasibility fraction.

    Rows without an energy (infeasible or failed) count toward the
    infeasibility fraction and are excluded from the mean.
    """
    schemes, values = [], []
    grouped: dict[tuple, list[ResultRow]] = {}
    for row in rows:
        if row.scheme not in schemes:
            schemes.append(row.scheme)
        if row.axis_value not in values:
            values.append(row.axis_value)
        grouped.setdefault((row.scheme, row.axis_value), []).append(row)

    summary = ExperimentSummary(schemes=tuple(schemes),
                                values=tuple(sorted(values)))
    for key, cell_rows in grouped.items():
        energies = np.array([r.energy_watts for r in cell_rows
                             if r.status == "ok"], dtype=float)
        n, n_ok = len(cell_rows), len(energies)
        if n_ok == 0:
            cell = CellSummary(None, None, 0, n, 1.0)
        else:
            mean = float(np.mean(energies))
            if n_ok >= 2:
                sem = float(np.std(energies, ddof=1)) / math.sqrt(n_ok)
                half = float(scipy.stats.t.ppf(0.975, n_ok - 1)) * sem
            else:
                half = 0.0
            cell = CellSummary(mean, half, n_ok, n, 1.0 - n_ok / n)
        summary.cells[key] = cell
    return summary


def emit_plot_data(summary: ExperimentSummary, path) -> Path:
    """Write a tab-delimited table: axis value, per-scheme mean and CI columns.

    Column order follows the summary's scheme order.  Missing cells (all
    infeasible) are written as nan.  An empty summary yields a header-only
    file.
    """
    path = Path(path)
    header = ["axis_value"]
    for s in summary.schemes:
        header += [f"{s}_mean", f"{s}_ci"]
    lines = ["\t".join(header)]
    for v in summary.values:
        fields = [repr(float(v))]
        for s in summary.schemes:
            cell = summary.cells.get((s, v))
            if cell is None or cell.mean_energy is None:
                fields += ["nan", "nan"]
            else:
                fields += [repr(cell.mean_energy), repr(cell.ci_half_width)]
        lines.append("\t".join(fields))
    path.write_text("\n".join(lines) + "\n")
    return path


def parse_plot_data(path) -> tuple[list[str], np.ndarray]:
    """Read back a plot file: (column names, data matrix)."""
    text = Path(path).read_text().strip().split("\n")
    header = text[0].split("\t")
    if len(text) == 1:
        return header, np.empty((0, len(header)))
    data = np.array([[float(x) for x in line.split("\t")] for line in text[1:]])
    return header, data


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    rows: list
    summary: ExperimentSummary
    output_dir: Path

    @property
    def has_numerical_failure(self) -> bool:
        return any(r.status == "numerical_failure" for r in self.rows)


def run_experiment(spec: ExperimentSpec, n_workers: int = 1) -> ExperimentResult:
    """Run the full sweep and persist rows, timings, summary, and plot data.

    Cells are independent work items handed to a bounded pool; all writing
    happens in this process after collection, in a fixed order, so the result
    table is byte-identical across runs of the same spec.
    """
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    tasks = [(value, spec.base.rng_seed + draw)
             for value in spec.values
             for draw in range(spec.n_channel_draws)]
    if n_workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=n_workers) as pool:
            cell_lists = list(pool.map(
                _solve_cell,
                *zip(*[(spec.base, spec.axis, v, s, spec.schemes)
                       for v, s in tasks])))
    else:
        cell_lists = [_solve_cell(spec.base, spec.axis, v, s, spec.schemes)
                      for v, s in tasks]

    rows = [row for cell in cell_lists for row in cell]
    summary = summarize(rows)

    with open(out / ROWS_FILENAME, "w") as f:
        for row in rows:
            f.write(json.dumps(row.to_record(), sort_keys=True) + "\n")
    with open(out / TIMINGS_FILENAME, "w") as f:
        for row in rows:
            f.write(json.dumps({"scheme": row.scheme,
                                "axis_value": row.axis_value,
                                "seed": row.seed,
                                "wall_time": row.wall_time},
                               sort_keys=True) + "\n")
    with open(out / SUMMARY_FILENAME, "w") as f:
        json.dump({"spec": spec.to_dict(), "summary": summary.to_dict()},
                  f, indent=2, sort_keys=True)
        f.write("\n")
    emit_plot_data(summary, out / PLOT_FILENAME)

    return ExperimentResult(spec=spec, rows=rows, summary=summary,
                            output_dir=out)


def threshold_sweep_spec(base: SystemConfig | None = None,
                         output_dir: str = "results/threshold_sweep",
                         n_channel_draws: int = DEFAULT_N_DRAWS) -> ExperimentSpec:
    """Energy vs far-user rate threshold at M = 40."""
    base = (base or SystemConfig()).replace(n_ris_elements=40)
    return ExperimentSpec(base=base, axis="rate_threshold_far",
                          values=(1.0, 1.5, 2.0, 2.5, 3.0),
                          n_channel_draws=n_channel_draws,
                          output_dir=output_dir)


def element_count_sweep_spec(base: SystemConfig | None = None,
                             output_dir: str = "results/element_sweep",
                             n_channel_draws: int = DEFAULT_N_DRAWS) -> ExperimentSpec:
    """Energy vs RIS element count at thresholds (1, 3) bits/s/Hz."""
    base = (base or SystemConfig()).replace(rate_thresholds=(1.0, 3.0))
    return ExperimentSpec(base=base, axis="ris_elements",
                          values=(10.0, 20.0, 30.0, 40.0, 50.0),
                          n_channel_draws=n_channel_draws,
                          output_dir=output_dir)


def ris_position_sweep_spec(base: SystemConfig | None = None,
                            output_dir: str = "results/position_sweep",
                            n_channel_draws: int = DEFAULT_N_DRAWS) -> ExperimentSpec:
    """Energy vs RIS x-coordinate along the line y = 10 m at M = 40."""
    base = (base or SystemConfig()).replace(n_ris_elements=40)
    return ExperimentSpec(base=base, axis="ris_x_position",
                          values=(20.0, 40.0, 60.0, 80.0),
                          n_channel_draws=n_channel_draws,
                          output_dir=output_dir)
