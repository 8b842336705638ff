"""Monte Carlo harness: replicate simulate-then-estimate cells and aggregate them.

Replication ``r`` of every cell uses seed ``base_seed XOR mix64(r)`` and the
per-cell reduction runs in replication order, so summaries are identical for
any number of workers.
"""

import enum
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._validation import DomainError, check_count, check_positive, check_seed
from .bessel import ModelParams, simulate_prelimit
from .estimation import (
    DEFAULT_FLOOR,
    DegeneratePathError,
    estimate_drift,
    estimate_hurst,
    estimate_sigma,
    estimate_sigma_plugin,
)
from .fbm import FgnMethod, sample_fbm
from .seeding import replication_seed

__all__ = [
    "AllInvalidError",
    "Cell",
    "CellSummary",
    "Estimator",
    "ExperimentConfig",
    "ExperimentSummary",
    "run_cell",
    "run_experiment",
    "simulate_replication",
]

logger = logging.getLogger(__name__)

DEFAULT_DRIFT_RESOLUTION = 10_000
# Replications are shipped to workers in blocks of this size.
_CHUNK = 50


class Estimator(str, enum.Enum):
    HURST = "hurst"
    SIGMA_KNOWN_H = "sigma_known_h"
    SIGMA_PLUGIN_H = "sigma_plugin_h"
    DRIFT = "drift"


class AllInvalidError(RuntimeError):
    """Every replication of a cell produced an invalid estimate."""

    def __init__(self, cell_id, invalid_count):
        super().__init__(f"cell {cell_id}: all {invalid_count} replications invalid")
        self.cell_id = cell_id
        self.invalid_count = invalid_count


@dataclass(frozen=True)
class Cell:
    n: int
    horizon: float
    estimator: Estimator
    replications: int | None = None
    cell_id: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "estimator", Estimator(self.estimator))
        minimum = 1 if self.estimator is Estimator.DRIFT else 2
        object.__setattr__(self, "n", check_count(self.n, "n", minimum=minimum))
        object.__setattr__(self, "horizon", check_positive(self.horizon, "horizon"))
        if self.replications is not None:
            object.__setattr__(self, "replications", check_count(self.replications, "replications"))


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelParams
    cells: tuple
    replications: int = 1000
    base_seed: int = 0
    drift_resolution: int = DEFAULT_DRIFT_RESOLUTION
    floor: float = DEFAULT_FLOOR
    fgn_method: FgnMethod = FgnMethod.CIRCULANT
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))
        check_count(self.replications, "replications")
        check_seed(self.base_seed)
        check_count(self.drift_resolution, "drift_resolution")
        check_positive(self.floor, "floor")
        check_count(self.workers, "workers")
        object.__setattr__(self, "fgn_method", FgnMethod(self.fgn_method))

    def cell_id(self, index: int) -> str:
        cell = self.cells[index]
        return cell.cell_id if cell.cell_id is not None else f"c{index}"

    def cell_replications(self, index: int) -> int:
        cell = self.cells[index]
        return cell.replications if cell.replications is not None else self.replications


@dataclass
class CellSummary:
    cell_id: str
    n: int
    horizon: float
    estimator: Estimator
    replications: int
    mean: float
    variance: float
    cv: float
    invalid_count: int
    boxplot: tuple
    seeds_used: tuple
    wall_time: float
    low_sample: bool
    estimates: np.ndarray = field(repr=False)
    valid: np.ndarray = field(repr=False)

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)


@dataclass
class ExperimentSummary:
    cells: list
    errors: dict
    wall_time: float

    @property
    def ok(self) -> bool:
        return not self.errors


def simulate_replication(config: ExperimentConfig, cell: Cell, replication: int):
    """Simulate one path for ``cell`` and return ``(estimate, valid)``."""
    seed = replication_seed(config.base_seed, replication)
    driver = sample_fbm(cell.n, cell.horizon, config.model.hurst, seed, config.fgn_method)
    path = simulate_prelimit(config.model, driver)
    try:
        if cell.estimator is Estimator.HURST:
            result = estimate_hurst(path)
        elif cell.estimator is Estimator.SIGMA_KNOWN_H:
            result = estimate_sigma(path, config.model.hurst)
        elif cell.estimator is Estimator.SIGMA_PLUGIN_H:
            result = estimate_sigma_plugin(path)
        else:
            result = estimate_drift(path, config.floor)
    except DegeneratePathError:
        return math.nan, False
    return result.estimate, result.valid


def _run_block(config, cell_index, start, stop):
    cell = config.cells[cell_index]
    out = np.empty(stop - start)
    ok = np.empty(stop - start, dtype=bool)
    for i, r in enumerate(range(start, stop)):
        out[i], ok[i] = simulate_replication(config, cell, r)
    return out, ok


def _blocks(config, cell_indices):
    for c in cell_indices:
        reps = config.cell_replications(c)
        for start in range(0, reps, _CHUNK):
            yield c, start, min(start + _CHUNK, reps)


def _five_numbers(x):
    if x.size == 0:
        return (math.nan,) * 5
    return tuple(float(q) for q in np.percentile(x, [0, 25, 50, 75, 100]))


def _summarize(config, index, estimates, valid, wall_time):
    cell = config.cells[index]
    cell_id = config.cell_id(index)
    reps = estimates.size
    invalid = int(reps - np.count_nonzero(valid))
    if invalid == reps:
        raise AllInvalidError(cell_id, invalid)
    if invalid and cell.estimator is Estimator.HURST and cell.n >= 1000:
        logger.warning("cell %s: %d invalid Hurst estimates at n=%d", cell_id, invalid, cell.n)
    good = estimates[valid]
    mean = float(np.mean(good))
    low_sample = good.size < 2
    variance = 0.0 if low_sample else float(np.var(good, ddof=1))
    return CellSummary(
        cell_id=cell_id,
        n=cell.n,
        horizon=cell.horizon,
        estimator=cell.estimator,
        replications=reps,
        mean=mean,
        variance=variance,
        cv=math.sqrt(variance) / mean if mean != 0 else math.nan,
        invalid_count=invalid,
        boxplot=_five_numbers(good),
        seeds_used=(config.base_seed, 0, reps - 1),
        wall_time=wall_time,
        low_sample=low_sample,
        estimates=estimates,
        valid=valid,
    )


def run_cell(config: ExperimentConfig, cell_index: int) -> CellSummary:
    """Run all replications of one cell in-process."""
    t0 = time.perf_counter()
    estimates, valid = _run_block(config, cell_index, 0, config.cell_replications(cell_index))
    return _summarize(config, cell_index, estimates, valid, time.perf_counter() - t0)


def run_experiment(config: ExperimentConfig, workers: int | None = None, progress=None) -> ExperimentSummary:
    """Run every cell; a failing cell is recorded in ``errors`` without stopping the rest.

    ``workers`` overrides ``config.workers``. ``progress``, if given, is called
    as ``progress(cell_id, done, total)`` after each finished block.
    """
    workers = check_count(workers if workers is not None else config.workers, "workers")
    t0 = time.perf_counter()
    indices = range(len(config.cells))
    parts = {c: {} for c in indices}
    started = {c: None for c in indices}
    elapsed = {c: 0.0 for c in indices}

    def collect(c, start, stop, result, dt):
        parts[c][start] = result
        elapsed[c] += dt
        if progress is not None:
            progress(config.cell_id(c), sum(v[0].size for v in parts[c].values()), config.cell_replications(c))

    if workers == 1:
        for c, start, stop in _blocks(config, indices):
            tb = time.perf_counter()
            collect(c, start, stop, _run_block(config, c, start, stop), time.perf_counter() - tb)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                (c, start, stop, pool.submit(_run_block, config, c, start, stop))
                for c, start, stop in _blocks(config, indices)
            ]
            tb = time.perf_counter()
            for c, start, stop, fut in futures:
                collect(c, start, stop, fut.result(), time.perf_counter() - tb)
                tb = time.perf_counter()
    del started

    cells, errors = [], {}
    for c in indices:
        blocks = [parts[c][s] for s in sorted(parts[c])]
        estimates = np.concatenate([b[0] for b in blocks])
        valid = np.concatenate([b[1] for b in blocks])
        try:
            cells.append(_summarize(config, c, estimates, valid, elapsed[c]))
        except AllInvalidError as exc:
            logger.error("%s", exc)
            errors[config.cell_id(c)] = exc
            cells.append(None)
    return ExperimentSummary(cells=cells, errors=errors, wall_time=time.perf_counter() - t0)
