"""Batch experiments behind the CLI: regret-vs-n sweeps, sample-complexity tables, Psi curves.

Each experiment is split into independent picklable tasks and a deterministic
assembly step, so callers may evaluate the tasks in any executor.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from censored_regret.core import CensoringDesign, CostParameters, GridSpec, no_information_regret
from censored_regret.errors import InvalidParameterError
from censored_regret.policies import Policy
from censored_regret.regret.bsaa import psi_curves, worst_case_regret_bsaa
from censored_regret.regret.km import sample_complexity_km, worst_case_regret_km
from censored_regret.telemetry import get_tracer

logger = logging.getLogger(__name__)
tracer = get_tracer()

Cell = float | int | None


@dataclass(frozen=True)
class SweepConfig:
    """Designs with n - m samples at x and m uncensored samples at level 1."""

    policy: Policy
    xs: tuple[float, ...]
    q: float
    m_values: tuple[int, ...] = (0, 1, 2, 5, 10)
    n_values: tuple[int, ...] = tuple(range(1, 101))
    tol: float = 1e-4
    km_mesh: float = 1.0 / 200.0
    full_info: bool = True

    def __post_init__(self) -> None:
        if not self.xs or not self.n_values or not self.m_values:
            raise InvalidParameterError("sweep needs at least one x, one n and one m")
        if any(not 0.0 <= x <= 1.0 for x in self.xs):
            raise InvalidParameterError("sweep levels must lie in [0, 1]")
        if any(n < 1 for n in self.n_values) or any(m < 0 for m in self.m_values):
            raise InvalidParameterError("n must be positive and m nonnegative")
        if not 0.0 < self.q < 1.0:
            raise InvalidParameterError(f"q must lie in (0, 1), got {self.q!r}")
        object.__setattr__(self, "policy", Policy(self.policy))


@dataclass(frozen=True)
class SweepTask:
    policy: Policy
    x: float | None
    n: int
    m: int
    q: float
    tol: float
    km_mesh: float = field(default=1.0 / 200.0)


def sweep_design(n: int, m: int, x: float) -> CensoringDesign | None:
    """n - m samples at x plus m at level 1; None when m > n."""
    if m > n:
        return None
    pairs = []
    if n - m > 0:
        pairs.append((x, n - m))
    if m > 0:
        pairs.append((1.0, m))
    return CensoringDesign.from_pairs(pairs)


def sweep_header(config: SweepConfig) -> list[str]:
    header = ["n"]
    for x in config.xs:
        header += [f"wc_regret_{m}_{x:g}" for m in config.m_values]
        if config.full_info:
            header.append(f"wc_regret_full_info_{x:g}")
    return header


def sweep_tasks(config: SweepConfig) -> list[SweepTask]:
    """One task per CSV cell in row-major order; full-information cells carry x=None."""
    tasks = []
    for n in config.n_values:
        for x in config.xs:
            for m in config.m_values:
                tasks.append(SweepTask(config.policy, x, n, m, config.q, config.tol, config.km_mesh))
            if config.full_info:
                tasks.append(SweepTask(Policy.BSAA, None, n, n, config.q, config.tol, config.km_mesh))
    return tasks


def evaluate_sweep_task(task: SweepTask) -> float | None:
    cp = CostParameters.normalized(task.q)
    if task.x is None:
        return worst_case_regret_bsaa(CensoringDesign((1.0,), (task.n,)), cp, task.tol).value
    design = sweep_design(task.n, task.m, task.x)
    if design is None:
        return None
    if task.policy is Policy.BSAA:
        return worst_case_regret_bsaa(design, cp, task.tol).value
    return worst_case_regret_km(design, cp, GridSpec.uniform(task.km_mesh)).value


def assemble_sweep(config: SweepConfig, values: Sequence[float | None]) -> list[list[Cell]]:
    width = len(sweep_header(config)) - 1
    rows = []
    for r, n in enumerate(config.n_values):
        rows.append([n, *values[r * width:(r + 1) * width]])
    return rows


def sweep_regret(config: SweepConfig) -> tuple[list[str], list[list[Cell]]]:
    with tracer.start_as_current_span("experiments.sweep") as span:
        span.set_attribute("sweep.policy", str(config.policy))
        span.set_attribute("sweep.points", len(config.n_values) * len(config.xs) * len(config.m_values))
        values = [evaluate_sweep_task(task) for task in sweep_tasks(config)]
    return sweep_header(config), assemble_sweep(config, values)


def sample_complexity_target(q: float, target_frac: float) -> float:
    if not 0.0 < target_frac < 1.0:
        raise InvalidParameterError(f"target fraction must lie in (0, 1), got {target_frac!r}")
    return target_frac * no_information_regret(q)


def sample_complexity_header(q: float, target_frac: float) -> list[str]:
    return ["x", f"num_sample_{sample_complexity_target(q, target_frac):g}"]


def explored_design(m: int, x: float, n: int) -> CensoringDesign | None:
    return sweep_design(n, m, x)


def evaluate_sample_complexity(
    x: float, q: float, target: float, n_cap: int, mesh: float, m: int = 0, rtol: float | None = None
) -> int | None:
    """Smallest total n for n - m samples at x plus m at level 1."""
    if m < 0:
        raise InvalidParameterError(f"m must be nonnegative, got {m!r}")
    return sample_complexity_km(
        x, q, target, n_cap, GridSpec.uniform(mesh), design_builder=partial(explored_design, m), rtol=rtol
    )


def sample_complexity_table(
    q: float,
    target_frac: float,
    xs: Iterable[float],
    n_cap: int,
    mesh: float,
    m: int = 0,
    rtol: float | None = None,
) -> tuple[list[str], list[list[Cell]]]:
    target = sample_complexity_target(q, target_frac)
    with tracer.start_as_current_span("experiments.sample_complexity") as span:
        span.set_attribute("sample_complexity.target", target)
        span.set_attribute("sample_complexity.m", m)
        rows = [[x, evaluate_sample_complexity(x, q, target, n_cap, mesh, m, rtol)] for x in xs]
    return sample_complexity_header(q, target_frac), rows


def x_grid(lo: float, hi: float, step: float) -> list[float]:
    """Inclusive grid lo, lo + step, ..., hi, rounded to kill accumulation noise."""
    if step <= 0 or hi < lo:
        raise InvalidParameterError("x grid needs step > 0 and hi >= lo")
    count = int(round((hi - lo) / step)) + 1
    return [round(lo + i * step, 10) for i in range(count)]


def psi_table(design: CensoringDesign, q: float, points: int) -> tuple[list[str], list[list[Cell]]]:
    """Psi_k(t) for each piece k on `points` equally spaced t in [0, 1]."""
    if points < 2:
        raise InvalidParameterError(f"need at least 2 points, got {points!r}")
    t = np.linspace(0.0, 1.0, points)
    curves = psi_curves(design, q, t)
    header = ["t"] + [f"psi{k}" for k in range(design.K + 1)]
    rows = [[float(t[j]), *(float(v) for v in curves[:, j])] for j in range(points)]
    return header, rows


def _format_cell(value: Cell) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return format(float(value), ".17g")


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Cell]]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(v) for v in row])
    logger.info("wrote %s", path)


def read_csv(path: str | Path) -> tuple[list[str], list[list[float | None]]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) if v else None for v in row] for row in reader]
    return header, rows
