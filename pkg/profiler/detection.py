"""
Drift detection.
One two-sided Page-Hinckley detector per (host, latent feature), a primary
and a spare bank, and the Normal/Change mode machine telling drifts from
outliers.
"""

import enum
import logging
import math
from typing import Optional, Tuple

import attrs
import numpy as np

from profiler.errors import DimensionError

logger: logging.RootLogger = logging.getLogger(__name__)


@attrs.define
class PhtDetector:
    """
    Two-sided, mean-centered Page-Hinckley test on a scalar stream.
    An alarming detector resets itself.
    """

    delta: float = attrs.field(default=0.005, validator=attrs.validators.ge(0))
    threshold: float = attrs.field(default=50.0, validator=attrs.validators.gt(0))
    n: int = 0
    running_mean: float = 0.0
    cum_pos: float = 0.0
    min_cum_pos: float = 0.0
    cum_neg: float = 0.0
    max_cum_neg: float = 0.0

    def reset(self) -> None:
        """
        Forgets every sample.
        """
        self.n = 0
        self.running_mean = 0.0
        self.cum_pos = 0.0
        self.min_cum_pos = 0.0
        self.cum_neg = 0.0
        self.max_cum_neg = 0.0

    def update(self, x: float) -> bool:
        """
        Adds x and tells whether the mean moved by more than the threshold.
        """
        if not math.isfinite(x):
            raise ValueError(f"Expecting a finite sample, got {x}")
        self.n += 1
        self.running_mean += (x - self.running_mean) / self.n
        deviation: float = x - self.running_mean
        self.cum_pos += deviation - self.delta / 2.0
        self.min_cum_pos = min(self.min_cum_pos, self.cum_pos)
        self.cum_neg += deviation + self.delta / 2.0
        self.max_cum_neg = max(self.max_cum_neg, self.cum_neg)
        alarm: bool = (
            self.cum_pos - self.min_cum_pos >= self.threshold or self.max_cum_neg - self.cum_neg >= self.threshold
        )
        if alarm:
            self.reset()
        return alarm


def pht_update(detector: PhtDetector, x: float) -> bool:
    """
    Feeds one sample to a detector.
    """
    return detector.update(x)


class DetectorBank:
    """
    Page-Hinckley detectors of every (host, feature) cell.
    Statistics are stored as arrays and updated together, with exactly the
    recurrence of PhtDetector.
    """

    def __init__(self, n_hosts: int, n_features: int, delta: float = 0.005, threshold: float = 50.0) -> None:
        """
        Bank constructor.
        """
        if n_hosts < 1 or n_features < 1:
            raise DimensionError(f"Expecting a non-empty bank, got {n_hosts} x {n_features}")
        if threshold <= 0 or delta < 0:
            raise ValueError("Expecting a positive threshold and a non-negative delta!")
        self.shape: Tuple[int, int] = (n_hosts, n_features)
        self.delta: float = delta
        self.threshold: float = threshold
        self.reset()

    def __repr__(self) -> str:
        """
        String serializer.
        """
        return f"DetectorBank({self.shape[0]} x {self.shape[1]})"

    def reset(self) -> None:
        """
        Returns every detector to its freshly constructed state.
        """
        self.n: np.ndarray = np.zeros(self.shape, dtype=np.int64)
        self.running_mean: np.ndarray = np.zeros(self.shape)
        self.cum_pos: np.ndarray = np.zeros(self.shape)
        self.min_cum_pos: np.ndarray = np.zeros(self.shape)
        self.cum_neg: np.ndarray = np.zeros(self.shape)
        self.max_cum_neg: np.ndarray = np.zeros(self.shape)

    def detector(self, host: int, feature: int) -> PhtDetector:
        """
        Snapshot of one detector.
        """
        return PhtDetector(
            delta=self.delta,
            threshold=self.threshold,
            n=int(self.n[host, feature]),
            running_mean=float(self.running_mean[host, feature]),
            cum_pos=float(self.cum_pos[host, feature]),
            min_cum_pos=float(self.min_cum_pos[host, feature]),
            cum_neg=float(self.cum_neg[host, feature]),
            max_cum_neg=float(self.max_cum_neg[host, feature]),
        )

    def update(self, H: np.ndarray) -> np.ndarray:
        """
        Feeds H[i, j] to detector (i, j); returns the alarm matrix.
        """
        H = np.asarray(H, dtype=float)
        if H.shape != self.shape:
            raise DimensionError(f"Expecting {self.shape} latent values, got {H.shape}")
        if not np.all(np.isfinite(H)):
            raise ValueError("Expecting finite latent values!")
        self.n += 1
        self.running_mean += (H - self.running_mean) / self.n
        deviation: np.ndarray = H - self.running_mean
        self.cum_pos += deviation - self.delta / 2.0
        np.minimum(self.min_cum_pos, self.cum_pos, out=self.min_cum_pos)
        self.cum_neg += deviation + self.delta / 2.0
        np.maximum(self.max_cum_neg, self.cum_neg, out=self.max_cum_neg)
        alarms: np.ndarray = (self.cum_pos - self.min_cum_pos >= self.threshold) | (
            self.max_cum_neg - self.cum_neg >= self.threshold
        )

        # Alarming detectors start over.
        for statistic in (self.running_mean, self.cum_pos, self.min_cum_pos, self.cum_neg, self.max_cum_neg):
            statistic[alarms] = 0.0
        self.n[alarms] = 0
        return alarms


def alarming_hosts(bank: DetectorBank, H: np.ndarray) -> np.ndarray:
    """
    Updates the bank with H; True for hosts with at least one alarming feature.
    """
    return bank.update(H).any(axis=1)


def count_changed_hosts(bank: DetectorBank, H: np.ndarray) -> int:
    """
    Updates the bank with H and counts hosts with at least one alarming feature.
    """
    return int(np.count_nonzero(alarming_hosts(bank, H)))


def resolve_drift_threshold(value: float, n_hosts: int) -> int:
    """
    Absolute changed-host count; values below 1 are a fraction of the roster.
    """
    if value <= 0:
        raise ValueError(f"Expecting a positive drift threshold, got {value}")
    if value < 1:
        return max(1, math.ceil(value * n_hosts))
    if value > n_hosts:
        logger.warning("Drift threshold %s exceeds the roster size %s: drifts cannot be detected.", value, n_hosts)
    return int(math.ceil(value))


class Mode(enum.Enum):
    """
    Detection mode.
    """

    NORMAL = "normal"
    CHANGE = "change"


class Decision(enum.Enum):
    """
    Outcome of one interval.
    """

    STAY_NORMAL = "stay-normal"
    ENTER_CHANGE = "enter-change"
    OUTLIER_CONFIRMED = "outlier-confirmed"
    DRIFT_CONFIRMED = "drift-confirmed"


class DriftState:
    """
    Primary and spare detector banks with the mode flag.

    The primary bank marks the start and the end of a change period. The
    spare bank is only fed in Normal mode, so when a change period ends it
    compares the new data against the concept before the change.
    """

    def __init__(
        self,
        n_hosts: int,
        n_features: int,
        change_threshold: float = 50.0,
        drift_threshold: int = 50,
        delta: float = 0.005,
    ) -> None:
        """
        State constructor.
        """
        if drift_threshold < 1:
            raise ValueError(f"Expecting a drift threshold of at least 1 host, got {drift_threshold}")
        self.mode: Mode = Mode.NORMAL
        self.change_threshold: float = change_threshold
        self.drift_threshold: int = drift_threshold
        self.primary: DetectorBank = DetectorBank(n_hosts, n_features, delta, change_threshold)
        self.spare: DetectorBank = DetectorBank(n_hosts, n_features, delta, change_threshold)
        self.changed_hosts: Optional[int] = None

    def __repr__(self) -> str:
        """
        String serializer.
        """
        return f"DriftState(mode={self.mode.value}, banks={self.primary.shape})"

    def step(self, H: np.ndarray) -> Decision:
        """
        Runs one interval of the mode machine.
        On DRIFT_CONFIRMED the caller resets the cluster model and the banks.
        """
        alarming: np.ndarray = alarming_hosts(self.primary, H)
        changed: int = int(np.count_nonzero(alarming))
        if self.mode is Mode.NORMAL:
            if changed >= self.drift_threshold:
                self.mode = Mode.CHANGE
                decision: Decision = Decision.ENTER_CHANGE
            else:
                self.spare.update(H)
                decision = Decision.STAY_NORMAL
        elif changed >= self.drift_threshold:
            decision = Decision.ENTER_CHANGE
        else:
            self.mode = Mode.NORMAL
            # Hosts alarming on both banks count once.
            alarming |= alarming_hosts(self.spare, H)
            changed = int(np.count_nonzero(alarming))
            decision = Decision.DRIFT_CONFIRMED if changed >= self.drift_threshold else Decision.OUTLIER_CONFIRMED
        self.changed_hosts = changed
        logger.debug("Changed hosts: %s, mode: %s, decision: %s.", changed, self.mode.value, decision.value)
        return decision

    def reset_banks(self) -> None:
        """
        Zeroes both banks and returns to Normal mode.
        """
        self.primary.reset()
        self.spare.reset()
        self.mode = Mode.NORMAL


def step_mode(state: DriftState, H: np.ndarray) -> Decision:
    """
    Runs one interval of the mode machine on state.
    """
    return state.step(H)


def reset_banks(state: DriftState) -> None:
    """
    Zeroes both banks of state.
    """
    state.reset_banks()
