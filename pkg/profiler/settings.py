"""
Profiler presets.
Values are keyed by preset name: "synthetic" reproduces the generated-stream
set-up, "eventlog" the process-execution log set-up.
"""

import logging
from typing import Any, List, Tuple

logger: logging.RootLogger = logging.getLogger(__name__)


class Settings:
    """
    Parent class for settings: one class attribute per preset, plus an
    optional "default" used for presets the class does not name.
    """

    @classmethod
    def get(cls, preset: str) -> Any:
        """
        Value of preset, falling back to the class default.
        """
        for name in (preset, "default"):
            value: Any = cls.__dict__.get(name)
            if value is not None:
                logger.debug("%s[%s] = %s", cls.__name__, name, value)
                return value
        raise KeyError(f"{cls.__name__} has neither a '{preset}' preset nor a default")


class LatentFeaturesSettings(Settings):
    """
    Number of host latent features (N_f).
    """

    synthetic: int = 2
    eventlog: int = 10
    default: int = 2


class DecayRateSettings(Settings):
    """
    DenStream forgetting rate (lambda_decay).
    """

    synthetic: float = 0.1
    eventlog: float = 0.1
    default: float = 0.1


class EpsilonSettings(Settings):
    """
    Maximum micro-cluster radius.
    """

    synthetic: float = 0.5
    eventlog: float = 0.1
    default: float = 0.5


class BetaSettings(Settings):
    """
    Potential micro-cluster weight factor.
    """

    synthetic: float = 0.8
    eventlog: float = 1.0
    default: float = 0.8


class MuSettings(Settings):
    """
    Core weight threshold.
    """

    synthetic: float = 3.0
    eventlog: float = 9.0
    default: float = 3.0


class PhtDeltaSettings(Settings):
    """
    Minimal magnitude of changes tracked by every Page-Hinckley detector.
    """

    default: float = 0.005


class ChangeThresholdSettings(Settings):
    """
    Page-Hinckley alarm threshold (Th_c).
    """

    synthetic: float = 0.25
    eventlog: float = 50.0
    default: float = 50.0


class DriftThresholdSettings(Settings):
    """
    Minimum number of changed hosts for a drift (Th_d).
    A value below 1 is a fraction of the host roster.
    """

    default: float = 50


class NmfIterationsSettings(Settings):
    """
    Maximum number of multiplicative updates.
    """

    default: int = 200


class NmfToleranceSettings(Settings):
    """
    Relative error change below which factorization stops.
    """

    default: float = 1e-4


class NmfBenchRanksSettings(Settings):
    """
    Latent dimensions swept by the factorization benchmark.
    """

    eventlog: List[int] = [2, 5, 10, 20, 30]
    default: List[int] = [2, 5, 10, 20, 30]


class JsSamplesSettings(Settings):
    """
    Monte-Carlo sample count of the Jensen-Shannon estimate.
    """

    default: int = 100000


class RejectionBudgetSettings(Settings):
    """
    Maximum attempts to draw a post-drift mixture at the requested distance.
    """

    synthetic: int = 20000
    default: int = 500


class MeanRangeSettings(Settings):
    """
    Range of the mixture component means.
    """

    synthetic: Tuple[float, float] = (0.0, 7.0)
    default: Tuple[float, float] = (0.0, 10.0)


class SigmaRangeSettings(Settings):
    """
    Range of the mixture component standard deviations.
    """

    synthetic: Tuple[float, float] = (0.2, 0.4)
    default: Tuple[float, float] = (0.3, 1.0)


class MinSeparationSettings(Settings):
    """
    Minimum distance between the means of one mixture.
    """

    synthetic: float = 3.5
    default: float = 0.0


class HostPersistenceSettings(Settings):
    """
    Weight of the fixed per-host position in every generated row.
    """

    synthetic: float = 0.999
    default: float = 0.0
