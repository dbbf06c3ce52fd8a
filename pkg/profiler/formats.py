"""
File formats.
Latent-instance CSV, generator manifest, cluster snapshot and drift timeline.
"""

import logging
import os
from typing import Any, Dict, Iterable, List, Optional

import attrs
import numpy as np
import pandas as pd

from profiler.clustering import OfflineClustering
from profiler.errors import DimensionError

logger: logging.RootLogger = logging.getLogger(__name__)

FLOAT_FORMAT: str = "%.10g"


@attrs.frozen(eq=False)
class LatentInstance:
    """
    Host latent vectors of one interval, optionally with ground truth.
    """

    index: int
    rows: np.ndarray
    labels: Optional[np.ndarray] = None

    def __attrs_post_init__(self) -> None:
        """
        Labels, when present, cover every row.
        """
        if self.rows.ndim != 2:
            raise DimensionError(f"Expecting a matrix of latent vectors, got {self.rows.shape}")
        if self.labels is not None and len(self.labels) != len(self.rows):
            raise DimensionError(f"Expecting {len(self.rows)} labels, got {len(self.labels)}")


def manifest_path(path: str) -> str:
    """
    Manifest file sitting next to a stream file.
    """
    return os.path.splitext(path)[0] + ".manifest"


def write_instances(instances: Iterable[LatentInstance], path: str) -> None:
    """
    Writes "instance,host,f0..f{k-1}[,label]", one row per host per instance.
    """
    frames: List[pd.DataFrame] = []
    for instance in instances:
        frame: pd.DataFrame = pd.DataFrame(
            instance.rows,
            columns=[f"f{index}" for index in range(instance.rows.shape[1])],
        )
        frame.insert(0, "host", np.arange(len(instance.rows)))
        frame.insert(0, "instance", instance.index)
        if instance.labels is not None:
            frame["label"] = np.asarray(instance.labels, dtype=int)
        frames.append(frame)
    if not frames:
        raise ValueError("Nothing to write!")
    logger.info("Writing %s instances: %s", len(frames), path)
    pd.concat(frames, ignore_index=True).to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def read_instances(path: str) -> List[LatentInstance]:
    """
    Reads a latent-instance CSV, one LatentInstance per instance index.
    """
    logger.info("Reading instances: %s", path)
    frame: pd.DataFrame = pd.read_csv(path)
    if "instance" not in frame.columns or "host" not in frame.columns:
        raise ValueError(f"Missing 'instance' or 'host' column in {path}")
    features: List[str] = [column for column in frame.columns if column.startswith("f")]
    if not features:
        raise DimensionError(f"No latent feature columns in {path}")
    instances: List[LatentInstance] = []
    for index, group in frame.groupby("instance", sort=True):
        group = group.sort_values("host")
        labels: Optional[np.ndarray] = group["label"].to_numpy(dtype=int) if "label" in group else None
        instances.append(
            LatentInstance(index=int(index), rows=group[features].to_numpy(dtype=float), labels=labels)
        )
    return instances


def write_manifest(values: Dict[str, Any], path: str) -> None:
    """
    Writes key=value lines.
    """
    with open(path, "w", encoding="utf-8") as stream:
        for key, value in values.items():
            stream.write(f"{key}={value}\n")


def read_key_values(path: str) -> Dict[str, str]:
    """
    Reads key=value lines, skipping blanks and '#' comments.
    """
    values: Dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as stream:
        for line_number, line in enumerate(stream, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{line_number}: expecting key=value, got '{line}'")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
    return values


def write_snapshot(clustering: OfflineClustering, path: str) -> None:
    """
    Writes "cluster_id,weight,center_f0..center_f{k-1}", one row per
    potential micro-cluster; noise uses cluster id -1.
    """
    dimension: int = clustering.centers.shape[1] if clustering.centers.ndim == 2 else 0
    frame: pd.DataFrame = pd.DataFrame(
        clustering.centers.reshape(len(clustering.labels), dimension),
        columns=[f"center_f{index}" for index in range(dimension)],
    )
    frame.insert(0, "weight", clustering.weights)
    frame.insert(0, "cluster_id", clustering.labels.astype(int))
    logger.info("Writing cluster snapshot: %s", path)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def write_table(rows: List[Dict[str, Any]], columns: List[str], path: str) -> None:
    """
    Writes a list of records as CSV with a fixed column order.
    """
    logger.info("Writing %s rows: %s", len(rows), path)
    pd.DataFrame(rows, columns=columns).to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
