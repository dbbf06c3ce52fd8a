"""
Experiment harness.
Runs the drift-aware pipeline next to a baseline without retraining, and
benchmarks factorization accuracy and runtime against the latent dimension.
"""

import logging
import time
from typing import Any, Dict, List, Optional, Sequence

import attrs
import numpy as np
from matplotlib.figure import Figure

from profiler.config import PipelineConfig
from profiler.detection import Decision
from profiler.factorization import FactorizationResult, MatrixLike, NmfOptions, factorize
from profiler.formats import LatentInstance
from profiler.pipeline import IntervalReport, Pipeline

logger: logging.RootLogger = logging.getLogger(__name__)

TIMELINE_COLUMNS: List[str] = [
    "interval",
    "changed_hosts",
    "mode",
    "decision",
    "accuracy_dendrift",
    "accuracy_baseline",
    "nmf_error",
]

BENCH_COLUMNS: List[str] = ["k", "error", "seconds", "iterations"]


def run_experiment(
    config: PipelineConfig,
    stream: Sequence[LatentInstance],
    baseline: bool = True,
) -> List[Dict[str, Any]]:
    """
    One timeline row per interval. The baseline pass keeps logging changed
    hosts but never retrains.
    """
    if any(instance.labels is None for instance in stream):
        raise ValueError("Expecting ground-truth labels on every instance!")
    drift_aware: Pipeline = Pipeline(attrs.evolve(config, drift_handling=True))
    plain: Optional[Pipeline] = Pipeline(attrs.evolve(config, drift_handling=False)) if baseline else None

    rows: List[Dict[str, Any]] = []
    for instance in stream:
        report: IntervalReport = drift_aware.process_interval(instance)
        reference: Optional[IntervalReport] = plain.process_interval(instance) if plain else None
        rows.append(
            {
                "interval": report.interval,
                "changed_hosts": report.changed_hosts,
                "mode": report.mode.value,
                "decision": report.decision.value,
                "accuracy_dendrift": report.accuracy,
                "accuracy_baseline": reference.accuracy if reference else None,
                "nmf_error": report.nmf_error,
            }
        )
    logger.info("Experiment finished: resets at %s.", drift_aware.resets)
    return rows


def plot_timeline(rows: List[Dict[str, Any]], prefix: str) -> List[str]:
    """
    Writes the changed-host and accuracy charts as SVG files.
    """
    intervals: np.ndarray = np.array([row["interval"] for row in rows])
    paths: List[str] = []

    # Changed hosts with detected change starts and confirmed drifts.
    figure = Figure(figsize=(8, 3))
    axis = figure.subplots()
    axis.plot(intervals, [row["changed_hosts"] for row in rows], color="tab:blue", label="changed hosts")
    for row in rows:
        if row["decision"] == Decision.DRIFT_CONFIRMED.value:
            axis.axvline(row["interval"], color="tab:red", linestyle="--")
        elif row["decision"] == Decision.OUTLIER_CONFIRMED.value:
            axis.axvline(row["interval"], color="tab:gray", linestyle=":")
    axis.set_xlabel("interval")
    axis.set_ylabel("changed hosts")
    figure.tight_layout()
    paths.append(f"{prefix}_changes.svg")
    figure.savefig(paths[-1], format="svg", metadata={"Date": None})

    # Accuracy of both runs.
    figure = Figure(figsize=(8, 3))
    axis = figure.subplots()
    for column, colour in (("accuracy_dendrift", "tab:green"), ("accuracy_baseline", "tab:orange")):
        values: List[float] = [np.nan if row[column] is None else row[column] for row in rows]
        if not np.all(np.isnan(values)):
            axis.plot(intervals, values, color=colour, label=column.split("_")[1])
    axis.set_ylim(0.0, 1.05)
    axis.set_xlabel("interval")
    axis.set_ylabel("accuracy")
    axis.legend(loc="lower left")
    figure.tight_layout()
    paths.append(f"{prefix}_accuracy.svg")
    figure.savefig(paths[-1], format="svg", metadata={"Date": None})
    return paths


def nmf_bench(
    M: MatrixLike,
    ranks: Sequence[int],
    max_iterations: int = 200,
    tolerance: float = 1e-4,
    seed: int = 0,
) -> List[Dict[str, Any]]:
    """
    Reconstruction error and runtime per latent dimension.
    """
    rows: List[Dict[str, Any]] = []
    for k in ranks:
        started: float = time.perf_counter()
        options: NmfOptions = NmfOptions(k=k, max_iterations=max_iterations, tolerance=tolerance, seed=seed)
        result: FactorizationResult = factorize(M, options)
        seconds: float = time.perf_counter() - started
        logger.info("k=%s: error %.6g in %.3fs.", k, result.error, seconds)
        rows.append({"k": k, "error": result.error, "seconds": seconds, "iterations": result.iterations_used})
    return rows
