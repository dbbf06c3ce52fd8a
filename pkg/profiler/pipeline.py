"""
Drift-aware profiling pipeline.
Per interval: latent vectors (NMF or a latent stream), drift mode machine,
retraining on a confirmed drift, DenStream merge, periodic pruning and
final clusters.
"""

import logging
import time
from typing import Dict, List, Optional, Union

import attrs
import numpy as np
from sklearn.metrics.cluster import contingency_matrix

from profiler.clustering import NOISE, ClusterModel, OfflineClustering
from profiler.config import PipelineConfig
from profiler.detection import Decision, DriftState, Mode, resolve_drift_threshold
from profiler.errors import DimensionError, TimeOrderError
from profiler.events import HostProcessMatrix
from profiler.factorization import FactorizationResult, NmfOptions, factorize, latent_labels
from profiler.formats import LatentInstance

logger: logging.RootLogger = logging.getLogger(__name__)

IntervalInput = Union[HostProcessMatrix, LatentInstance]


@attrs.frozen(eq=False)
class IntervalReport:
    """
    Outcome of one interval.
    """

    interval: int
    mode: Mode
    changed_hosts: int
    decision: Decision
    reset: bool
    assignments: Optional[np.ndarray]
    n_clusters: Optional[int]
    accuracy: Optional[float]
    nmf_error: Optional[float]
    timings: Dict[str, float]


def accuracy(assignments: np.ndarray, truth: np.ndarray) -> float:
    """
    Share of hosts whose cluster's majority label is their own label.
    Noise hosts count as wrong.
    """
    assignments = np.asarray(assignments)
    truth = np.asarray(truth)
    if len(truth) == 0:
        raise ValueError("Cannot score an empty host set!")
    if assignments.shape != truth.shape:
        raise DimensionError(f"Expecting {truth.shape} assignments, got {assignments.shape}")
    clusters: np.ndarray = np.unique(assignments)
    table: np.ndarray = contingency_matrix(truth, assignments)
    clustered: np.ndarray = clusters != NOISE
    if not np.any(clustered):
        return 0.0
    return float(table[:, clustered].max(axis=0).sum()) / len(truth)


class Pipeline:
    """
    Sequential per-interval loop; the host roster and the latent dimension
    are fixed by the first interval.
    """

    def __init__(self, config: PipelineConfig) -> None:
        """
        Pipeline constructor.
        """
        self.config: PipelineConfig = config
        self.model: ClusterModel = ClusterModel(config.denstream)
        self.state: Optional[DriftState] = None
        self.last_interval: Optional[int] = None
        self.last_factors: Optional[FactorizationResult] = None
        self.last_clustering: Optional[OfflineClustering] = None
        self.resets: List[int] = []

    def __repr__(self) -> str:
        """
        String serializer.
        """
        return f"Pipeline(interval={self.last_interval}, resets={len(self.resets)})"

    def _factorize(self, matrix: HostProcessMatrix) -> FactorizationResult:
        """
        Host latent vectors of one matrix, warm started from the previous interval.
        """
        options: NmfOptions = NmfOptions(
            k=self.config.n_features,
            max_iterations=self.config.nmf_max_iterations,
            tolerance=self.config.nmf_tolerance,
            seed=self.config.seed,
            warm_start=self.last_factors if self.config.warm_start else None,
        )
        self.last_factors = factorize(matrix, options)
        return self.last_factors

    def _drift_state(self, H: np.ndarray) -> DriftState:
        """
        Detector banks sized by the first interval.
        """
        if self.state is None:
            n_hosts, n_features = H.shape
            self.state = DriftState(
                n_hosts,
                n_features,
                change_threshold=self.config.change_threshold,
                drift_threshold=resolve_drift_threshold(self.config.drift_threshold, n_hosts),
                delta=self.config.pht_delta,
            )
            logger.info("Tracking %s hosts x %s features.", n_hosts, n_features)
        elif H.shape != self.state.primary.shape:
            raise DimensionError(f"Expecting {self.state.primary.shape} latent values, got {H.shape}")
        return self.state

    def final_clusters(self) -> OfflineClustering:
        """
        On-demand offline clustering.
        """
        self.last_clustering = self.model.offline_cluster()
        return self.last_clustering

    def process_interval(self, item: IntervalInput) -> IntervalReport:
        """
        Runs one interval of the profiling loop.
        """
        timings: Dict[str, float] = {}
        started: float = time.perf_counter()
        nmf_error: Optional[float] = None
        t: int = item.interval if isinstance(item, HostProcessMatrix) else item.index
        if self.last_interval is not None and t <= self.last_interval:
            raise TimeOrderError(f"Interval {t} does not follow {self.last_interval}")
        if isinstance(item, HostProcessMatrix):
            factors: FactorizationResult = self._factorize(item)
            H: np.ndarray = factors.H
            truth: Optional[np.ndarray] = latent_labels(H)
            nmf_error = factors.error
        else:
            H = np.asarray(item.rows, dtype=float)
            truth = item.labels
        timings["nmf"] = time.perf_counter() - started

        # Drift detection and retraining.
        started = time.perf_counter()
        state: DriftState = self._drift_state(H)
        decision: Decision = state.step(H)
        reset: bool = decision is Decision.DRIFT_CONFIRMED and self.config.drift_handling
        if reset:
            logger.info("Interval %s: drift confirmed, retraining.", t)
            self.model.reset()
            state.reset_banks()
            self.resets.append(t)
        elif decision is Decision.OUTLIER_CONFIRMED:
            logger.info("Interval %s: temporary change, keeping the model.", t)
        timings["detection"] = time.perf_counter() - started

        # Stream clustering.
        started = time.perf_counter()
        self.model.merge(H, t)
        if self.config.pruning and t % self.model.pruning_period == 0:
            self.model.prune(t)
        assignments: Optional[np.ndarray] = None
        n_clusters: Optional[int] = None
        score: Optional[float] = None
        every: int = self.config.cluster_every
        if every and t % every == 0:
            clustering: OfflineClustering = self.final_clusters()
            assignments = clustering.assign(H)
            n_clusters = clustering.n_clusters
            if truth is not None:
                score = accuracy(assignments, truth)
        timings["clustering"] = time.perf_counter() - started

        self.last_interval = t
        logger.debug("Interval %s timings: %s", t, timings)
        return IntervalReport(
            interval=t,
            mode=state.mode,
            changed_hosts=state.changed_hosts,
            decision=decision,
            reset=reset,
            assignments=assignments,
            n_clusters=n_clusters,
            accuracy=score,
            nmf_error=nmf_error,
            timings=timings,
        )


def process_interval(pipeline: Pipeline, item: IntervalInput) -> IntervalReport:
    """
    Runs one interval of pipeline.
    """
    return pipeline.process_interval(item)
