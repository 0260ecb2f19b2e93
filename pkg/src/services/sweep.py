"""Penalty-weight sweep over seeds."""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, Sequence

import numpy as np

from src.core.config import settings
from src.core.utils import get_logger
from src.schemas.training import RunRecord, SweepRow, TrainConfig

logger = get_logger()

Runner = Callable[[TrainConfig], RunRecord]


def cell_configs(config: TrainConfig) -> list[TrainConfig]:
    """One config per (penalty weight, seed) cell, weights outermost."""
    cells = []
    for lambda_pd in config.lambda_pd_sweep:
        loss = config.loss.model_copy(update={"lambda_pd": lambda_pd})
        for seed in config.seeds:
            cells.append(config.model_copy(update={"loss": loss, "seed": seed}))
    return cells


def _mean_std(values: Sequence[float]) -> tuple[Optional[float], Optional[float]]:
    if not values:
        return None, None
    array = np.asarray(values, dtype=np.float64)
    std = float(np.std(array, ddof=1)) if array.size > 1 else None
    return float(array.mean()), std


def aggregate(lambda_pd: float, records: Sequence[RunRecord]) -> SweepRow:
    """Mean and sample standard deviation of best-epoch metrics.

    Aborted runs count towards ``runs`` but not towards the statistics.
    """
    done = [record for record in records if record.aborted is None]
    accuracy = _mean_std([record.best.test_accuracy for record in done])
    psi_n = _mean_std([record.best.psi_n for record in done])
    psi_c = _mean_std([record.best.psi_c for record in done])
    return SweepRow(
        lambda_pd=lambda_pd,
        runs=len(records),
        completed=len(done),
        complete=len(done) == len(records),
        accuracy_mean=accuracy[0],
        accuracy_std=accuracy[1],
        psi_n_mean=psi_n[0],
        psi_n_std=psi_n[1],
        psi_c_mean=psi_c[0],
        psi_c_std=psi_c[1],
    )


def run_sweep(
    config: TrainConfig, runner: Runner
) -> tuple[list[SweepRow], list[RunRecord]]:
    """Train every cell and aggregate per penalty weight.

    Cells are independent; with ``NUM_THREADS > 1`` they run concurrently and
    the result does not depend on the schedule.

    Args:
        config: Base protocol with ``lambda_pd_sweep`` and ``seeds``.
        runner: Trains one cell and returns its record.

    Returns:
        tuple[list[SweepRow], list[RunRecord]]: One row per weight, in sweep
            order, and every run record.
    """
    cells = cell_configs(config)
    logger.info(
        "sweep: %s weights x %s seeds", len(config.lambda_pd_sweep), len(config.seeds)
    )
    with ThreadPoolExecutor(max_workers=max(settings.NUM_THREADS, 1)) as pool:
        records = list(pool.map(runner, cells))
    rows = []
    per_weight = len(config.seeds)
    for i, lambda_pd in enumerate(config.lambda_pd_sweep):
        group = records[i * per_weight : (i + 1) * per_weight]
        row = aggregate(lambda_pd, group)
        if not row.complete:
            logger.warning(
                "sweep: lambda_pd %g completed %s of %s runs",
                lambda_pd,
                row.completed,
                row.runs,
            )
        rows.append(row)
    return rows, records
