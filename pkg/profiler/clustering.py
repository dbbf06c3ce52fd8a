"""
DenStream stream clustering.
Points are summarized into decaying micro-clusters; potential micro-clusters
are grouped into final clusters by a weighted DBSCAN on their centers.
"""

import enum
import logging
import math
from typing import List, Optional, Tuple

import attrs
import numpy as np
from scipy.spatial.distance import cdist
from sklearn.cluster import DBSCAN

from profiler.errors import DimensionError, TimeOrderError

logger: logging.RootLogger = logging.getLogger(__name__)

NOISE: int = -1


@attrs.define(eq=False)
class MicroCluster:
    """
    Weighted linear sum, weighted squared sum and weight of nearby points.
    """

    cf1: np.ndarray
    cf2: np.ndarray
    weight: float
    created_at: int
    last_update: int

    @classmethod
    def from_point(cls, x: np.ndarray, t: int) -> "MicroCluster":
        """
        Micro-cluster holding a single point of weight 1.
        """
        x = np.asarray(x, dtype=float)
        return cls(cf1=x.copy(), cf2=x * x, weight=1.0, created_at=t, last_update=t)

    @property
    def center(self) -> np.ndarray:
        """
        Weighted mean of the members.
        """
        return self.cf1 / self.weight

    @property
    def radius(self) -> float:
        """
        Root of the weighted variance summed over dimensions.
        """
        if self.weight <= 0:
            return 0.0
        squared: float = float(np.sum(self.cf2) / self.weight - np.sum(self.center ** 2))
        return math.sqrt(max(squared, 0.0))

    def merged(self, x: np.ndarray) -> "MicroCluster":
        """
        Copy of this micro-cluster with x added at weight 1.
        """
        return attrs.evolve(self, cf1=self.cf1 + x, cf2=self.cf2 + x * x, weight=self.weight + 1.0)


def fading(decay_rate: float, elapsed: float) -> float:
    """
    Fading factor 2^(-lambda * elapsed).
    """
    return 2.0 ** (-decay_rate * elapsed)


def decay_to(mc: MicroCluster, t: int, decay_rate: float) -> MicroCluster:
    """
    Fades the statistics of mc from its last update to t.
    """
    if t < mc.last_update:
        raise TimeOrderError(f"Cannot decay from {mc.last_update} back to {t}")
    if t == mc.last_update:
        return mc
    factor: float = fading(decay_rate, t - mc.last_update)
    return attrs.evolve(
        mc,
        cf1=mc.cf1 * factor,
        cf2=mc.cf2 * factor,
        weight=mc.weight * factor,
        last_update=t,
    )


@attrs.frozen
class DenStreamParams:
    """
    DenStream parameters.
    The offline DBSCAN radius defaults to 2 epsilon and its density to mu.
    """

    decay_rate: float = attrs.field(default=0.1, validator=attrs.validators.gt(0))
    epsilon: float = attrs.field(default=0.5, validator=attrs.validators.gt(0))
    beta: float = attrs.field(default=0.8, validator=[attrs.validators.gt(0), attrs.validators.le(1)])
    mu: float = attrs.field(default=3.0, validator=attrs.validators.gt(0))
    offline_eps: float = attrs.field(
        default=attrs.Factory(lambda self: 2.0 * self.epsilon, takes_self=True),
        validator=attrs.validators.gt(0),
    )
    offline_min_weight: float = attrs.field(
        default=attrs.Factory(lambda self: self.mu, takes_self=True),
        validator=attrs.validators.gt(0),
    )

    def __attrs_post_init__(self) -> None:
        """
        The pruning period is only finite when beta * mu > 1.
        """
        if self.beta * self.mu <= 1:
            raise ValueError(f"Expecting beta * mu > 1, got {self.beta * self.mu}")

    @property
    def potential_weight(self) -> float:
        """
        Minimum weight of a potential micro-cluster.
        """
        return self.beta * self.mu

    @property
    def pruning_period(self) -> int:
        """
        Minimal time span T_p between two pruning passes.
        """
        ratio: float = self.potential_weight / (self.potential_weight - 1.0)
        return max(1, math.ceil(math.log2(ratio) / self.decay_rate))

    def outlier_threshold(self, t: int, created_at: int) -> float:
        """
        Lower weight limit xi of an outlier micro-cluster created at created_at.
        """
        period: int = self.pruning_period
        return (fading(self.decay_rate, t - created_at + period) - 1.0) / (fading(self.decay_rate, period) - 1.0)


class MergeOutcome(enum.Enum):
    """
    Where a point ended up.
    """

    ABSORBED_BY_POTENTIAL = "absorbed-by-potential"
    ABSORBED_BY_OUTLIER = "absorbed-by-outlier"
    NEW_OUTLIER = "new-outlier"
    PROMOTED = "promoted"


def dbscan(points: np.ndarray, weights: np.ndarray, eps: float, min_weight: float) -> np.ndarray:
    """
    Weighted DBSCAN.

    A point is core when the weights of the points within eps (itself
    included) add up to at least min_weight. Noise is labelled -1.
    """
    if eps <= 0 or min_weight <= 0:
        raise ValueError("Expecting positive eps and min_weight!")
    points = np.asarray(points, dtype=float)
    weights = np.asarray(weights, dtype=float)
    n: int = len(points)
    if n == 0:
        return np.full(0, NOISE, dtype=int)
    if weights.shape != (n,):
        raise DimensionError(f"Expecting {n} weights, got {weights.shape}")

    # Scaled weights turn the summed-weight core test into min_samples=1.
    model: DBSCAN = DBSCAN(eps=eps, min_samples=1, algorithm="brute")
    return model.fit_predict(points, sample_weight=weights / min_weight).astype(int)


@attrs.frozen(eq=False)
class OfflineClustering:
    """
    Final clusters: one label per potential micro-cluster.
    """

    centers: np.ndarray
    weights: np.ndarray
    labels: np.ndarray
    eps: float

    @property
    def n_clusters(self) -> int:
        """
        Number of non-noise clusters.
        """
        return len(set(self.labels.tolist()) - {NOISE})

    def assign(self, X: np.ndarray) -> np.ndarray:
        """
        Cluster of the nearest clustered micro-cluster center within eps,
        noise when there is none.
        """
        X = np.asarray(X, dtype=float)
        result: np.ndarray = np.full(len(X), NOISE, dtype=int)
        clustered: np.ndarray = self.labels != NOISE
        if not np.any(clustered) or len(X) == 0:
            return result
        distances: np.ndarray = cdist(X, self.centers[clustered])
        nearest: np.ndarray = np.argmin(distances, axis=1)
        within: np.ndarray = distances[np.arange(len(X)), nearest] <= self.eps
        result[within] = self.labels[clustered][nearest[within]]
        return result


class ClusterModel:
    """
    DenStream micro-cluster model.
    Single writer: merge_point, prune and reset mutate the model.
    """

    def __init__(self, params: DenStreamParams) -> None:
        """
        Model constructor.
        """
        self.params: DenStreamParams = params
        self.pruning_period: int = params.pruning_period
        self.potential: List[MicroCluster] = []
        self.outlier_buffer: List[MicroCluster] = []
        self.time: Optional[int] = None
        self.dimension: Optional[int] = None

    def __repr__(self) -> str:
        """
        String serializer.
        """
        return f"ClusterModel(potential={len(self.potential)}, outliers={len(self.outlier_buffer)})"

    def reset(self) -> None:
        """
        Discards every micro-cluster, keeps the parameters.
        """
        logger.debug("Resetting %s.", self)
        self.potential = []
        self.outlier_buffer = []
        self.time = None
        self.dimension = None

    def total_weight(self, t: int) -> float:
        """
        Sum of every micro-cluster weight decayed to t.
        """
        return sum(
            decay_to(mc, t, self.params.decay_rate).weight for mc in self.potential + self.outlier_buffer
        )

    @staticmethod
    def _nearest(group: List[MicroCluster], x: np.ndarray) -> Optional[int]:
        """
        Index of the nearest center, lowest creation time on ties.
        """
        if not group:
            return None
        centers: np.ndarray = np.array([mc.center for mc in group])
        distances: np.ndarray = np.linalg.norm(centers - x, axis=1)
        closest: np.ndarray = np.flatnonzero(distances == distances.min())
        return int(min(closest, key=lambda index: (group[index].created_at, index)))

    def _try_merge(self, group: List[MicroCluster], x: np.ndarray, t: int) -> Optional[int]:
        """
        Merges x into the nearest micro-cluster of group if the radius stays
        within epsilon. Returns the index of the absorbing micro-cluster.
        """
        index: Optional[int] = self._nearest(group, x)
        if index is None:
            return None
        decayed: MicroCluster = decay_to(group[index], t, self.params.decay_rate)
        candidate: MicroCluster = decayed.merged(x)
        if candidate.radius <= self.params.epsilon:
            group[index] = candidate
            return index
        group[index] = decayed
        return None

    def merge_point(self, x: np.ndarray, t: int) -> MergeOutcome:
        """
        Adds one point at time t.
        """
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or not np.all(np.isfinite(x)):
            raise ValueError("Expecting a finite vector!")
        if self.dimension is not None and x.shape[0] != self.dimension:
            raise DimensionError(f"Expecting {self.dimension} features, got {x.shape[0]}")
        if self.time is not None and t < self.time:
            raise TimeOrderError(f"Cannot merge at {t} after {self.time}")
        self.dimension = x.shape[0]
        self.time = t

        if self._try_merge(self.potential, x, t) is not None:
            return MergeOutcome.ABSORBED_BY_POTENTIAL

        index: Optional[int] = self._try_merge(self.outlier_buffer, x, t)
        if index is not None:
            if self.outlier_buffer[index].weight > self.params.potential_weight:
                self.potential.append(self.outlier_buffer.pop(index))
                return MergeOutcome.PROMOTED
            return MergeOutcome.ABSORBED_BY_OUTLIER

        self.outlier_buffer.append(MicroCluster.from_point(x, t))
        return MergeOutcome.NEW_OUTLIER

    def merge(self, X: np.ndarray, t: int) -> List[MergeOutcome]:
        """
        Adds every row of X at time t.
        """
        return [self.merge_point(x, t) for x in np.asarray(X, dtype=float)]

    def prune(self, t: int) -> None:
        """
        Drops potential micro-clusters lighter than beta * mu and outlier
        micro-clusters lighter than their creation-dependent limit.
        """
        decay_rate: float = self.params.decay_rate
        before: Tuple[int, int] = (len(self.potential), len(self.outlier_buffer))
        self.time = t if self.time is None else max(self.time, t)
        self.potential = [
            mc
            for mc in (decay_to(mc, t, decay_rate) for mc in self.potential)
            if mc.weight >= self.params.potential_weight
        ]
        self.outlier_buffer = [
            mc
            for mc in (decay_to(mc, t, decay_rate) for mc in self.outlier_buffer)
            if mc.weight >= self.params.outlier_threshold(t, mc.created_at)
        ]
        logger.debug(
            "Pruned at %s: potential %s -> %s, outliers %s -> %s.",
            t,
            before[0],
            len(self.potential),
            before[1],
            len(self.outlier_buffer),
        )

    def offline_cluster(self) -> OfflineClustering:
        """
        Runs DBSCAN over the potential micro-cluster centers, weighted as of
        the latest merge or prune.
        """
        dimension: int = self.dimension or 0
        current: List[MicroCluster] = [decay_to(mc, self.time, self.params.decay_rate) for mc in self.potential]
        centers: np.ndarray = np.array([mc.center for mc in current]) if current else np.empty((0, dimension))
        weights: np.ndarray = np.array([mc.weight for mc in current], dtype=float)
        labels: np.ndarray = dbscan(centers, weights, self.params.offline_eps, self.params.offline_min_weight)
        return OfflineClustering(centers=centers, weights=weights, labels=labels, eps=self.params.offline_eps)
