"""
Profiler runs.
One run per command-line subcommand, driven as load(), execute(), export().
"""

import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from profiler.base import BaseRun
from profiler.clustering import OfflineClustering
from profiler.config import PipelineConfig
from profiler.events import EventRecord, HostProcessMatrix
from profiler.events import build_matrix, default_roster, ingest_event_log, intervals, process_catalog
from profiler.events import synthesize_event_log, write_event_log
from profiler.experiment import BENCH_COLUMNS, TIMELINE_COLUMNS, nmf_bench, plot_timeline, run_experiment
from profiler.formats import LatentInstance, read_instances, write_snapshot, write_table
from profiler.pipeline import IntervalReport, Pipeline
from profiler.settings import NmfBenchRanksSettings
from profiler.synthesis import StreamSpec, generate_stream

logger: logging.RootLogger = logging.getLogger(__name__)

REPORT_COLUMNS: List[str] = [
    "interval",
    "changed_hosts",
    "mode",
    "decision",
    "reset",
    "n_clusters",
    "accuracy",
    "nmf_error",
]


def event_matrices(events: List[EventRecord], roster: str) -> List[HostProcessMatrix]:
    """
    One matrix per interval over a fixed host roster and process catalog.
    """
    days: List[int] = intervals(events)
    if not days:
        raise ValueError("The event log holds no records!")
    hosts: Tuple[str, ...] = (
        default_roster(events, days[0])
        if roster == "first-interval"
        else tuple(sorted({event.host_id for event in events}))
    )
    processes: Tuple[str, ...] = process_catalog(events)
    logger.info("Roster of %s hosts, %s processes, %s intervals.", len(hosts), len(processes), len(days))
    return [build_matrix(events, day, hosts, processes) for day in days]


class GenerateRun(BaseRun):
    """
    Synthesizes a drifted latent stream.
    """

    def __init__(self, spec: StreamSpec, output: str, spike: Optional[Tuple[int, float, int]] = None) -> None:
        """
        Run constructor.
        """
        super().__init__()
        self._spec: StreamSpec = spec
        self._output: str = output
        self._spike: Optional[Tuple[int, float, int]] = spike
        self._manifest: Dict[str, Any] = {}

    def execute(self) -> None:
        """
        Generating and writing the stream with its manifest.
        """
        logger.info("Generating stream: %s", self._spec)
        if not self._output:
            raise AttributeError("Unknown output path!")
        self._manifest = generate_stream(self._spec, self._output, self._spike)

    def export(self) -> None:
        """
        Reporting the accepted concepts.
        """
        logger.info(
            "Stream written: %s (distance %s, drift window [%s, %s]).",
            self._output,
            self._manifest.get("measured_js"),
            self._manifest.get("drift_start"),
            self._manifest.get("drift_end"),
        )


class GenerateEventsRun(BaseRun):
    """
    Synthesizes a process-execution event log.
    """

    def __init__(self, output: str, **options) -> None:
        """
        Run constructor.
        """
        super().__init__()
        self._output: str = output
        self._options: Dict[str, Any] = {key: value for key, value in options.items() if value is not None}
        self._events: List[EventRecord] = []

    def execute(self) -> None:
        """
        Sampling execution counts.
        """
        logger.info("Synthesizing event log: %s", self._options)
        self._events = synthesize_event_log(**self._options)

    def export(self) -> None:
        """
        Writing the event log.
        """
        logger.info("Exporting %s events: %s", len(self._events), self._output)
        if not self._output:
            raise AttributeError("Unknown output path!")
        write_event_log(self._events, self._output)


class ProfileRun(BaseRun):
    """
    Profiles hosts from an event log or a latent stream.
    """

    def __init__(
        self,
        config: PipelineConfig,
        output: str,
        events: Optional[str] = None,
        stream: Optional[str] = None,
        snapshot: Optional[str] = None,
        assignments: Optional[str] = None,
    ) -> None:
        """
        Run constructor.
        """
        super().__init__()
        if bool(events) == bool(stream):
            raise ValueError("Expecting exactly one of an event log or a latent stream!")

        # Run attributes.
        self._config: PipelineConfig = config
        self._events_path: Optional[str] = events
        self._stream_path: Optional[str] = stream
        self._output: str = output
        self._snapshot: Optional[str] = snapshot
        self._assignments: Optional[str] = assignments

        # Run results.
        self._items: List[Any] = []
        self._reports: List[IntervalReport] = []
        self._clustering: Optional[OfflineClustering] = None

    def load(self) -> None:
        """
        Reading the input intervals.
        """
        logger.info("Loading inputs at: %s.", self)
        if self._events_path:
            self._items = event_matrices(ingest_event_log(self._events_path), self._config.roster)
        else:
            self._items = read_instances(self._stream_path)

    def execute(self) -> None:
        """
        Running the profiling loop.
        """
        logger.info("Profiling %s intervals.", len(self._items))
        if not self._items:
            raise AttributeError("No intervals loaded!")
        pipeline: Pipeline = Pipeline(self._config)
        self._reports = [pipeline.process_interval(item) for item in self._items]
        self._clustering = pipeline.final_clusters()

    def export(self) -> None:
        """
        Writing interval reports, the cluster snapshot and host assignments.
        """
        logger.info("Exporting reports: %s", self._output)
        write_table(
            [
                {
                    "interval": report.interval,
                    "changed_hosts": report.changed_hosts,
                    "mode": report.mode.value,
                    "decision": report.decision.value,
                    "reset": int(report.reset),
                    "n_clusters": report.n_clusters,
                    "accuracy": report.accuracy,
                    "nmf_error": report.nmf_error,
                }
                for report in self._reports
            ],
            REPORT_COLUMNS,
            self._output,
        )
        if self._snapshot:
            write_snapshot(self._clustering, self._snapshot)
        if self._assignments:
            rows: List[Dict[str, Any]] = []
            for item, report in zip(self._items, self._reports):
                if report.assignments is None:
                    continue
                hosts: Sequence[Any] = item.hosts if isinstance(item, HostProcessMatrix) else range(len(item.rows))
                rows.extend(
                    {"interval": report.interval, "host": host, "cluster_id": int(cluster)}
                    for host, cluster in zip(hosts, report.assignments)
                )
            write_table(rows, ["interval", "host", "cluster_id"], self._assignments)


class EvalRun(BaseRun):
    """
    Compares drift-aware profiling with a baseline that never retrains.
    """

    def __init__(self, config: PipelineConfig, stream: str, output: str, plots: Optional[str] = None) -> None:
        """
        Run constructor.
        """
        super().__init__()
        self._config: PipelineConfig = config
        self._stream_path: str = stream
        self._output: str = output
        self._plots: Optional[str] = plots
        self._instances: List[LatentInstance] = []
        self._rows: List[Dict[str, Any]] = []

    def load(self) -> None:
        """
        Reading the labelled stream.
        """
        logger.info("Loading stream at: %s.", self)
        if not self._stream_path:
            raise AttributeError("Unknown stream path!")
        self._instances = read_instances(self._stream_path)

    def execute(self) -> None:
        """
        Running both pipelines.
        """
        self._rows = run_experiment(self._config, self._instances, baseline=True)

    def export(self) -> None:
        """
        Writing the timeline and the figures.
        """
        write_table(self._rows, TIMELINE_COLUMNS, self._output)
        if self._plots:
            for path in plot_timeline(self._rows, self._plots):
                logger.info("Figure written: %s", path)


class NmfBenchRun(BaseRun):
    """
    Factorization error and runtime against the latent dimension.
    """

    def __init__(
        self,
        output: str,
        ranks: Optional[Sequence[int]] = None,
        events: Optional[str] = None,
        interval: int = 0,
        rows: int = 200,
        columns: int = 500,
        seed: int = 0,
        max_iterations: int = 200,
        tolerance: float = 1e-4,
    ) -> None:
        """
        Run constructor.
        """
        super().__init__()
        self._output: str = output
        self._ranks: List[int] = list(ranks or NmfBenchRanksSettings.get("default"))
        self._events_path: Optional[str] = events
        self._interval: int = interval
        self._shape: Tuple[int, int] = (rows, columns)
        self._seed: int = seed
        self._max_iterations: int = max_iterations
        self._tolerance: float = tolerance
        self._matrix: Optional[Any] = None
        self._rows: List[Dict[str, Any]] = []

    def load(self) -> None:
        """
        Building the benchmark matrix.
        """
        if self._events_path:
            logger.info("Benchmarking interval %s of %s.", self._interval, self._events_path)
            self._matrix = build_matrix(ingest_event_log(self._events_path), self._interval)
        else:
            logger.info("Benchmarking a seeded %s x %s matrix.", *self._shape)
            self._matrix = np.random.default_rng(self._seed).random(self._shape)

    def execute(self) -> None:
        """
        Factorizing once per rank.
        """
        self._rows = nmf_bench(self._matrix, self._ranks, self._max_iterations, self._tolerance, self._seed)

    def export(self) -> None:
        """
        Writing the benchmark table.
        """
        write_table(self._rows, BENCH_COLUMNS, self._output)
