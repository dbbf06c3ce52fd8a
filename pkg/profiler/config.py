"""
Configuration.
Values are layered: preset settings, then a key=value config file, then
command-line flags. The merged flat mapping is structured into attrs records
with cattrs.
"""

import logging
from typing import Any, Dict, Mapping, Optional, Tuple

import attrs
import cattrs

from profiler.clustering import DenStreamParams
from profiler.formats import read_key_values
from profiler.settings import BetaSettings
from profiler.settings import ChangeThresholdSettings
from profiler.settings import DecayRateSettings
from profiler.settings import DriftThresholdSettings
from profiler.settings import EpsilonSettings
from profiler.settings import HostPersistenceSettings
from profiler.settings import JsSamplesSettings
from profiler.settings import LatentFeaturesSettings
from profiler.settings import MeanRangeSettings
from profiler.settings import MinSeparationSettings
from profiler.settings import MuSettings
from profiler.settings import NmfIterationsSettings
from profiler.settings import NmfToleranceSettings
from profiler.settings import PhtDeltaSettings
from profiler.settings import RejectionBudgetSettings
from profiler.settings import SigmaRangeSettings
from profiler.synthesis import StreamSpec

logger: logging.RootLogger = logging.getLogger(__name__)

ROSTER_POLICIES = ("first-interval", "all-intervals")


@attrs.frozen
class PipelineConfig:
    """
    Drift-aware profiling parameters.
    cluster_every = 0 only produces final clusters on demand.
    """

    n_features: int = attrs.field(default=2, validator=attrs.validators.ge(1))
    change_threshold: float = attrs.field(default=50.0, validator=attrs.validators.gt(0))
    drift_threshold: float = attrs.field(default=50, validator=attrs.validators.gt(0))
    pht_delta: float = attrs.field(default=0.005, validator=attrs.validators.ge(0))
    denstream: DenStreamParams = attrs.field(factory=DenStreamParams)
    nmf_max_iterations: int = attrs.field(default=200, validator=attrs.validators.ge(1))
    nmf_tolerance: float = attrs.field(default=1e-4, validator=attrs.validators.ge(0))
    warm_start: bool = True
    roster: str = attrs.field(default="first-interval", validator=attrs.validators.in_(ROSTER_POLICIES))
    pruning: bool = True
    cluster_every: int = attrs.field(default=1, validator=attrs.validators.ge(0))
    drift_handling: bool = True
    seed: int = 0


# Flag names (dashes or underscores) to record fields; "denstream." nests.
PIPELINE_KEYS: Dict[str, str] = {
    "nf": "n_features",
    "thc": "change_threshold",
    "thd": "drift_threshold",
    "delta": "pht_delta",
    "lambda_decay": "denstream.decay_rate",
    "epsilon": "denstream.epsilon",
    "beta": "denstream.beta",
    "mu": "denstream.mu",
    "offline_eps": "denstream.offline_eps",
    "offline_min_weight": "denstream.offline_min_weight",
    "nmf_iterations": "nmf_max_iterations",
    "nmf_tolerance": "nmf_tolerance",
    "warm_start": "warm_start",
    "roster": "roster",
    "pruning": "pruning",
    "cluster_every": "cluster_every",
    "seed": "seed",
}

STREAM_KEYS: Dict[str, str] = {
    "drift_type": "drift_type",
    "dd": "drift_duration",
    "md": "drift_magnitude",
    "pd": "drift_precision",
    "cb": "clusters_before",
    "ca": "clusters_after",
    "nf": "latent_features",
    "si": "instance_size",
    "nb": "instances_before",
    "total": "total_instances",
    "seed": "seed",
    "js_samples": "js_samples",
    "max_attempts": "max_attempts",
    "screen_samples": "screen_samples",
    "mean_low": "mean_low",
    "mean_high": "mean_high",
    "sigma_low": "sigma_low",
    "sigma_high": "sigma_high",
    "min_separation": "min_separation",
    "sticky_hosts": "sticky_hosts",
    "host_persistence": "host_persistence",
}


def parse_bool(value: Any, _: type) -> bool:
    """
    Accepts booleans and the usual spellings of them.
    """
    if isinstance(value, bool):
        return value
    text: str = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"Not a boolean: '{value}'")


converter: cattrs.Converter = cattrs.Converter(detailed_validation=False)
converter.register_structure_hook(bool, parse_bool)


def normalize_key(key: str) -> str:
    """
    Flag and config-file keys accept dashes or underscores.
    """
    return key.strip().lstrip("-").replace("-", "_")


def preset_values(preset: str) -> Dict[str, Any]:
    """
    Pipeline defaults of a preset.
    """
    return {
        "nf": LatentFeaturesSettings.get(preset),
        "thc": ChangeThresholdSettings.get(preset),
        "thd": DriftThresholdSettings.get(preset),
        "delta": PhtDeltaSettings.get(preset),
        "lambda_decay": DecayRateSettings.get(preset),
        "epsilon": EpsilonSettings.get(preset),
        "beta": BetaSettings.get(preset),
        "mu": MuSettings.get(preset),
        "nmf_iterations": NmfIterationsSettings.get(preset),
        "nmf_tolerance": NmfToleranceSettings.get(preset),
    }


def merge_layers(*layers: Optional[Mapping[str, Any]]) -> Dict[str, Any]:
    """
    Later layers override earlier ones; None values are ignored.
    """
    merged: Dict[str, Any] = {}
    for layer in layers:
        for key, value in (layer or {}).items():
            if value is not None:
                merged[normalize_key(key)] = value
    return merged


def _nest(values: Mapping[str, Any], keys: Mapping[str, str], ignore: tuple = ()) -> Dict[str, Any]:
    """
    Maps flat keys to (possibly nested) record fields.
    """
    nested: Dict[str, Any] = {}
    for key, value in values.items():
        if key not in keys:
            if key in ignore:
                continue
            raise KeyError(f"Unknown configuration key: '{key}'")
        target: Dict[str, Any] = nested
        *parents, leaf = keys[key].split(".")
        for parent in parents:
            target = target.setdefault(parent, {})
        target[leaf] = value
    return nested


def build_pipeline_config(
    preset: str = "default",
    path: Optional[str] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> PipelineConfig:
    """
    Preset, then config file, then flags.
    """
    file_values: Optional[Dict[str, str]] = read_key_values(path) if path else None
    merged: Dict[str, Any] = merge_layers(preset_values(preset), file_values, overrides)
    logger.debug("Pipeline configuration: %s", merged)
    return converter.structure(_nest(merged, PIPELINE_KEYS, ignore=tuple(STREAM_KEYS)), PipelineConfig)


def stream_preset_values(preset: str) -> Dict[str, Any]:
    """
    Generator defaults of a preset.
    """
    means: Tuple[float, float] = MeanRangeSettings.get(preset)
    sigmas: Tuple[float, float] = SigmaRangeSettings.get(preset)
    return {
        "js_samples": JsSamplesSettings.get(preset),
        "max_attempts": RejectionBudgetSettings.get(preset),
        "mean_low": means[0],
        "mean_high": means[1],
        "sigma_low": sigmas[0],
        "sigma_high": sigmas[1],
        "min_separation": MinSeparationSettings.get(preset),
        "host_persistence": HostPersistenceSettings.get(preset),
    }


def build_stream_spec(
    preset: str = "default",
    path: Optional[str] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> StreamSpec:
    """
    Preset, then config file, then flags.
    """
    file_values: Optional[Dict[str, str]] = read_key_values(path) if path else None
    merged: Dict[str, Any] = merge_layers(stream_preset_values(preset), file_values, overrides)
    logger.debug("Stream configuration: %s", merged)
    return converter.structure(_nest(merged, STREAM_KEYS, ignore=tuple(PIPELINE_KEYS)), StreamSpec)
