"""
Drifted-stream synthesis.
Stable concepts are Gaussian mixtures; the post-drift mixture is redrawn until
its Jensen-Shannon distance to the pre-drift mixture matches the requested
magnitude. Instances are then sampled for abrupt, gradual or incremental
drift.
"""

import enum
import logging
import math
from typing import Any, Dict, Iterator, List, Optional, Tuple

import attrs
import numpy as np
from scipy.spatial.distance import pdist
from scipy.special import logsumexp
from scipy.stats import multivariate_normal

from profiler.errors import BudgetExhaustedError, DimensionError
from profiler.formats import LatentInstance, manifest_path, write_instances, write_manifest

logger: logging.RootLogger = logging.getLogger(__name__)

SCREEN_SLACK: float = 0.1


def _check_mixture(instance: "MixtureModel", attribute: Any, value: np.ndarray) -> None:
    """
    Weights sum to one and covariances are symmetric positive-definite.
    """
    if not math.isclose(float(np.sum(instance.weights)), 1.0, abs_tol=1e-9) or np.any(instance.weights <= 0):
        raise ValueError(f"Mixture weights must be positive and sum to 1: {instance.weights}")
    for covariance in instance.covariances:
        if not np.allclose(covariance, covariance.T):
            raise ValueError("Covariance is not symmetric!")
        if np.any(np.linalg.eigvalsh(covariance) <= 0):
            raise ValueError("Covariance is not positive-definite!")


@attrs.frozen(eq=False)
class MixtureModel:
    """
    Weighted multivariate normal components of one stable concept.
    """

    means: np.ndarray
    covariances: np.ndarray
    weights: np.ndarray = attrs.field(validator=_check_mixture)

    @property
    def n_components(self) -> int:
        """
        Number of components.
        """
        return len(self.weights)

    @property
    def dimension(self) -> int:
        """
        Number of latent features.
        """
        return self.means.shape[1]

    def draw_components(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """
        Component ids of n draws.
        """
        return rng.choice(self.n_components, size=n, p=self.weights)

    def sample_components(
        self,
        components: np.ndarray,
        rng: np.random.Generator,
        offsets: Optional[np.ndarray] = None,
        persistence: float = 0.0,
    ) -> np.ndarray:
        """
        One draw from the given component of every row.

        Rows with a standard normal offset keep it with weight persistence;
        fresh noise makes up the rest of the unit variance.
        """
        noise: np.ndarray = rng.standard_normal((len(components), self.dimension))
        if offsets is not None:
            noise = persistence * offsets + math.sqrt(1.0 - persistence ** 2) * noise
        X: np.ndarray = np.empty_like(noise)
        for component in range(self.n_components):
            rows: np.ndarray = components == component
            factor: np.ndarray = np.linalg.cholesky(self.covariances[component])
            X[rows] = self.means[component] + noise[rows] @ factor.T
        return X

    def sample(self, n: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
        """
        n draws and their component ids.
        """
        components: np.ndarray = self.draw_components(n, rng)
        return self.sample_components(components, rng), components

    def logpdf(self, X: np.ndarray) -> np.ndarray:
        """
        Natural log density of every row of X.
        """
        X = np.atleast_2d(X)
        if X.shape[1] != self.dimension:
            raise DimensionError(f"Expecting {self.dimension} features, got {X.shape[1]}")
        terms: np.ndarray = np.column_stack(
            [
                np.log(weight) + np.atleast_1d(multivariate_normal.logpdf(X, mean=mean, cov=covariance))
                for mean, covariance, weight in zip(self.means, self.covariances, self.weights)
            ]
        )
        return logsumexp(terms, axis=1)


def gen_mix_model(
    n_clusters: int,
    n_features: int,
    rng: np.random.Generator,
    mean_range: Tuple[float, float] = (0.0, 10.0),
    sigma_range: Tuple[float, float] = (0.3, 1.0),
    min_separation: float = 0.0,
    max_tries: int = 1000,
) -> MixtureModel:
    """
    Equal-weight mixture with uniform means and isotropic covariances.
    Means are redrawn until every pair lies at least min_separation apart.
    """
    if n_clusters < 1:
        raise ValueError(f"Expecting at least one cluster, got {n_clusters}")
    if n_features < 1:
        raise ValueError(f"Expecting at least one feature, got {n_features}")
    for _ in range(max_tries):
        means: np.ndarray = rng.uniform(mean_range[0], mean_range[1], size=(n_clusters, n_features))
        if n_clusters == 1 or pdist(means).min() >= min_separation:
            break
    else:
        raise ValueError(f"Cannot place {n_clusters} means {min_separation} apart within {mean_range}")
    sigmas: np.ndarray = rng.uniform(sigma_range[0], sigma_range[1], size=n_clusters)
    covariances: np.ndarray = np.array([sigma ** 2 * np.eye(n_features) for sigma in sigmas])
    return MixtureModel(means=means, covariances=covariances, weights=np.full(n_clusters, 1.0 / n_clusters))


def js_distance(a: MixtureModel, b: MixtureModel, n_samples: int = 100000, seed: int = 0) -> float:
    """
    Monte-Carlo estimate of the base-2 Jensen-Shannon distance, in [0, 1].
    """
    if a.dimension != b.dimension:
        raise DimensionError(f"Mixtures differ in dimension: {a.dimension} vs {b.dimension}")
    if n_samples < 1:
        raise ValueError(f"Expecting at least one sample, got {n_samples}")
    rng: np.random.Generator = np.random.default_rng(seed)
    n_a: int = max(1, n_samples // 2)
    n_b: int = max(1, n_samples - n_a)
    divergence: float = 0.0
    for model, n in ((a, n_a), (b, n_b)):
        X, _ = model.sample(n, rng)
        log_a: np.ndarray = a.logpdf(X)
        log_b: np.ndarray = b.logpdf(X)
        log_m: np.ndarray = np.logaddexp(log_a, log_b) - math.log(2.0)
        own: np.ndarray = log_a if model is a else log_b
        divergence += 0.5 * float(np.mean(own - log_m)) / math.log(2.0)
    return math.sqrt(min(max(divergence, 0.0), 1.0))


class DriftType(enum.Enum):
    """
    How the post-drift concept takes over.
    """

    ABRUPT = "abrupt"
    GRADUAL = "gradual"
    INCREMENTAL = "incremental"


@attrs.frozen
class StreamSpec:
    """
    Generator parameters.
    With instances_before >= total_instances the stream never drifts.
    """

    drift_type: DriftType = attrs.field(default=DriftType.ABRUPT, converter=DriftType)
    drift_duration: int = attrs.field(default=0, validator=attrs.validators.ge(0))
    drift_magnitude: float = attrs.field(default=0.6, validator=[attrs.validators.ge(0), attrs.validators.le(1)])
    drift_precision: float = attrs.field(default=0.05, validator=attrs.validators.ge(0))
    clusters_before: int = attrs.field(default=2, validator=attrs.validators.ge(1))
    clusters_after: int = attrs.field(default=2, validator=attrs.validators.ge(1))
    latent_features: int = attrs.field(default=2, validator=attrs.validators.ge(1))
    instance_size: int = attrs.field(default=200, validator=attrs.validators.ge(1))
    instances_before: int = attrs.field(default=50, validator=attrs.validators.ge(1))
    total_instances: int = attrs.field(default=100, validator=attrs.validators.ge(1))
    seed: int = 0
    js_samples: int = attrs.field(default=100000, validator=attrs.validators.ge(1))
    max_attempts: int = attrs.field(default=500, validator=attrs.validators.ge(1))
    screen_samples: int = attrs.field(default=2000, validator=attrs.validators.ge(0))
    mean_low: float = 0.0
    mean_high: float = 10.0
    sigma_low: float = 0.3
    sigma_high: float = 1.0
    min_separation: float = attrs.field(default=0.0, validator=attrs.validators.ge(0))
    sticky_hosts: bool = True
    host_persistence: float = attrs.field(default=0.0, validator=[attrs.validators.ge(0), attrs.validators.le(1)])

    def __attrs_post_init__(self) -> None:
        """
        Abrupt drifts have no duration.
        """
        if self.drift_type is DriftType.ABRUPT and self.drift_duration != 0:
            raise ValueError(f"Abrupt drifts take no time, got a duration of {self.drift_duration}")

    @property
    def drifts(self) -> bool:
        """
        Whether the stream reaches the post-drift concept window at all.
        """
        return self.instances_before < self.total_instances

    @property
    def drift_window(self) -> Tuple[int, int]:
        """
        First instance of the drift and first instance of the new concept.
        """
        return self.instances_before, self.instances_before + self.drift_duration


@attrs.frozen(eq=False)
class ModelPair:
    """
    Accepted concepts and their measured distance.
    """

    pre: MixtureModel
    post: MixtureModel
    distance: float
    attempts: int


def gen_model_pair(spec: StreamSpec, rng: Optional[np.random.Generator] = None) -> ModelPair:
    """
    Draws the pre-drift mixture once, then redraws the post-drift mixture
    until the distance lies within drift_magnitude +/- drift_precision.
    """
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    means: Tuple[float, float] = (spec.mean_low, spec.mean_high)
    sigmas: Tuple[float, float] = (spec.sigma_low, spec.sigma_high)
    pre: MixtureModel = gen_mix_model(
        spec.clusters_before, spec.latent_features, rng, means, sigmas, spec.min_separation
    )
    if not spec.drifts:
        logger.debug("Stream never drifts: keeping a single concept.")
        return ModelPair(pre=pre, post=pre, distance=0.0, attempts=0)

    # A zero-magnitude band with the same cluster count accepts the pre-drift concept itself.
    if spec.drift_magnitude - spec.drift_precision <= 0 and spec.clusters_before == spec.clusters_after:
        return ModelPair(pre=pre, post=pre, distance=0.0, attempts=0)

    closest: float = math.inf
    for attempt in range(1, spec.max_attempts + 1):
        post: MixtureModel = gen_mix_model(
            spec.clusters_after, spec.latent_features, rng, means, sigmas, spec.min_separation
        )
        samples: List[int] = [spec.js_samples]
        if 0 < spec.screen_samples < spec.js_samples:
            samples.insert(0, spec.screen_samples)
        for n_samples in samples:
            distance: float = js_distance(pre, post, n_samples, seed=spec.seed + attempt)
            # Rough estimates only discard clear misses.
            slack: float = SCREEN_SLACK if n_samples < spec.js_samples else 0.0
            if abs(distance - spec.drift_magnitude) > spec.drift_precision + slack:
                break
        else:
            logger.info("Accepted post-drift concept after %s attempts: distance %.4f.", attempt, distance)
            return ModelPair(pre=pre, post=post, distance=distance, attempts=attempt)
        logger.debug("Attempt %s: distance %.4f.", attempt, distance)
        if abs(distance - spec.drift_magnitude) < abs(closest - spec.drift_magnitude):
            closest = distance
    logger.warning("No post-drift concept within %s attempts.", spec.max_attempts)
    raise BudgetExhaustedError(
        f"No distance within {spec.drift_magnitude} +/- {spec.drift_precision} after {spec.max_attempts} attempts",
        closest_distance=closest,
    )


class StreamGenerator:
    """
    Sequential instance generator.

    With sticky hosts, every row keeps its mixture component and its position
    within the component for a whole concept: host_persistence weighs a fixed
    standard normal offset per row against the noise redrawn per instance.
    """

    def __init__(self, spec: StreamSpec, pair: Optional[ModelPair] = None) -> None:
        """
        Generator constructor.
        """
        self.spec: StreamSpec = spec
        self._rng: np.random.Generator = np.random.default_rng(spec.seed)
        self.pair: ModelPair = pair if pair is not None else gen_model_pair(spec, self._rng)
        self.emitted: int = 0
        size: int = spec.instance_size
        self._pre_components: np.ndarray = self.pair.pre.draw_components(size, self._rng)
        self._post_components: np.ndarray = self.pair.post.draw_components(size, self._rng)
        self._pre_offsets: np.ndarray = self._rng.standard_normal((size, self.pair.pre.dimension))
        self._post_offsets: np.ndarray = self._rng.standard_normal((size, self.pair.post.dimension))

    def __repr__(self) -> str:
        """
        String serializer.
        """
        return f"StreamGenerator({self.emitted}/{self.spec.total_instances})"

    def __iter__(self) -> Iterator[LatentInstance]:
        """
        Remaining instances.
        """
        while self.emitted < self.spec.total_instances:
            yield self.next_instance()

    def _sample(self, post: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Rows flagged in post come from the post-drift concept, the others
        from the pre-drift one.
        """
        spec: StreamSpec = self.spec
        rows: np.ndarray = np.empty((spec.instance_size, self.pair.pre.dimension))
        labels: np.ndarray = np.empty(spec.instance_size, dtype=int)
        concepts = (
            (self.pair.pre, ~post, self._pre_components, self._pre_offsets, 0),
            (self.pair.post, post, self._post_components, self._post_offsets, spec.clusters_before),
        )
        for model, flagged, sticky, offsets, first_label in concepts:
            if not np.any(flagged):
                continue
            if spec.sticky_hosts:
                components: np.ndarray = sticky[flagged]
                rows[flagged] = model.sample_components(
                    components, self._rng, offsets[flagged], spec.host_persistence
                )
            else:
                components = model.draw_components(int(np.count_nonzero(flagged)), self._rng)
                rows[flagged] = model.sample_components(components, self._rng)
            labels[flagged] = components + first_label
        return rows, labels

    def next_instance(self) -> LatentInstance:
        """
        Samples the next instance of the stream.
        """
        spec: StreamSpec = self.spec
        s: int = self.emitted
        if s >= spec.total_instances:
            raise IndexError(f"Stream exhausted after {spec.total_instances} instances")
        start, end = spec.drift_window
        post: np.ndarray = np.zeros(spec.instance_size, dtype=bool)
        if s >= end:
            post[:] = True
        elif s >= start and spec.drift_type is DriftType.GRADUAL:
            post[:] = self._rng.random() < (s - start) / spec.drift_duration
        elif s >= start:
            # Incremental: a fresh random subset of rows follows the new concept.
            weight: float = (s - start) / spec.drift_duration
            n_pre: int = math.floor((1.0 - weight) * spec.instance_size + 0.5)
            post[self._rng.permutation(spec.instance_size)[n_pre:]] = True
        rows, labels = self._sample(post)
        self.emitted += 1
        return LatentInstance(index=s, rows=rows, labels=labels)


def next_instance(generator: StreamGenerator) -> LatentInstance:
    """
    Samples the next instance of generator.
    """
    return generator.next_instance()


def inject_spike(instances: List[LatentInstance], at: int, shift: float, n_hosts: int) -> List[LatentInstance]:
    """
    Adds shift to every feature of the first n_hosts rows of instance at.
    """
    if not 0 <= at < len(instances):
        raise IndexError(f"No instance {at} in a stream of {len(instances)}")
    result: List[LatentInstance] = list(instances)
    target: LatentInstance = instances[at]
    rows: np.ndarray = target.rows.copy()
    rows[:n_hosts] += shift
    result[at] = attrs.evolve(target, rows=rows)
    return result


def generate_stream(
    spec: StreamSpec,
    path: str,
    spike: Optional[Tuple[int, float, int]] = None,
) -> Dict[str, Any]:
    """
    Writes the stream CSV and its manifest; returns the manifest values.
    spike is an optional (at, shift, n_hosts) outlier injection.
    """
    generator: StreamGenerator = StreamGenerator(spec)
    instances: List[LatentInstance] = list(generator)
    if spike is not None:
        instances = inject_spike(instances, *spike)
    write_instances(instances, path)

    start, end = spec.drift_window
    manifest: Dict[str, Any] = {
        key: (value.value if isinstance(value, enum.Enum) else value) for key, value in attrs.asdict(spec).items()
    }
    manifest.update(
        {
            "measured_js": f"{generator.pair.distance:.6f}",
            "drift_start": start,
            "drift_end": end,
        }
    )
    if spike is not None:
        manifest["spike_at"], manifest["spike_shift"], manifest["spike_hosts"] = spike
    write_manifest(manifest, manifest_path(path))
    return manifest
