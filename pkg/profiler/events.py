"""
Event ingestion.
Process-execution tuples (host, process, date, count) are read from a
comma-separated log and turned into one host-process count matrix per day.
"""

import logging
from collections import defaultdict
from typing import DefaultDict, Dict, Iterable, List, Optional, Sequence, Tuple

import attrs
import numpy as np
from scipy import sparse

from profiler.errors import ParseError

logger: logging.RootLogger = logging.getLogger(__name__)


@attrs.frozen
class EventRecord:
    """
    One execution tuple of the event log.
    """

    host_id: str
    process_name: str
    date: int = attrs.field(validator=attrs.validators.ge(0))
    count: int = attrs.field(validator=attrs.validators.ge(0))


@attrs.frozen(eq=False)
class HostProcessMatrix:
    """
    Execution counts of one interval: rows are hosts, columns are processes.
    """

    interval: int
    hosts: Tuple[str, ...]
    processes: Tuple[str, ...]
    values: sparse.csr_matrix

    @property
    def shape(self) -> Tuple[int, int]:
        """
        Number of hosts and processes.
        """
        return len(self.hosts), len(self.processes)

    def dense(self) -> np.ndarray:
        """
        Counts as a dense float matrix.
        """
        return self.values.toarray().astype(float)

    def total(self) -> int:
        """
        Sum of every stored count.
        """
        return int(self.values.sum())


def parse_line(line: str, line_number: int, path: Optional[str] = None) -> EventRecord:
    """
    Parses "host_id,process_name,date,count".
    """
    fields: List[str] = [field.strip() for field in line.split(",")]
    if len(fields) != 4:
        raise ParseError(f"Expecting 4 fields, got {len(fields)}", line_number, path)
    host_id, process_name, date, count = fields
    if not host_id or not process_name:
        raise ParseError("Empty host or process identifier", line_number, path)
    try:
        date_value: int = int(date)
        count_value: int = int(count)
    except ValueError:
        raise ParseError(f"Non-integer date or count: '{date}', '{count}'", line_number, path) from None
    if date_value < 0:
        raise ParseError(f"Negative date: {date_value}", line_number, path)
    if count_value < 0:
        raise ParseError(f"Negative count: {count_value}", line_number, path)
    return EventRecord(host_id, process_name, date_value, count_value)


def ingest_event_log(path: str) -> List[EventRecord]:
    """
    Reads every record of an event log in file order.
    Blank lines and lines starting with '#' are skipped.
    """
    logger.info("Reading event log: %s", path)
    records: List[EventRecord] = []
    with open(path, "r", encoding="utf-8") as stream:
        for line_number, line in enumerate(stream, start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            records.append(parse_line(line.rstrip("\n"), line_number, path))
    logger.debug("Read %s records from %s.", len(records), path)
    return records


def write_event_log(events: Iterable[EventRecord], path: str) -> None:
    """
    Writes records in the event-log format.
    """
    with open(path, "w", encoding="utf-8") as stream:
        stream.write("# host_id,process_name,date,count\n")
        for event in events:
            stream.write(f"{event.host_id},{event.process_name},{event.date},{event.count}\n")


def default_roster(events: Iterable[EventRecord], t: int = 0) -> Tuple[str, ...]:
    """
    Hosts seen in interval t, sorted.
    """
    return tuple(sorted({event.host_id for event in events if event.date == t}))


def process_catalog(events: Iterable[EventRecord]) -> Tuple[str, ...]:
    """
    Every process seen in the log, sorted.
    """
    return tuple(sorted({event.process_name for event in events}))


def intervals(events: Iterable[EventRecord]) -> List[int]:
    """
    Distinct interval indices, ascending.
    """
    return sorted({event.date for event in events})


def build_matrix(
    events: Iterable[EventRecord],
    t: int,
    hosts: Optional[Sequence[str]] = None,
    processes: Optional[Sequence[str]] = None,
) -> HostProcessMatrix:
    """
    Builds the host-process matrix of interval t.

    Duplicate (host, process) pairs are summed. Without a roster the rows and
    columns are the sorted identifiers seen in the interval. With a roster,
    roster hosts absent from the interval get an all-zero row and hosts
    outside the roster are dropped with a warning.
    """
    if t < 0:
        raise ValueError(f"Negative interval: {t}")

    # Summing counts per (host, process) pair.
    counts: DefaultDict[Tuple[str, str], int] = defaultdict(int)
    for event in events:
        if event.date == t:
            counts[(event.host_id, event.process_name)] += event.count

    row_ids: Tuple[str, ...] = (
        tuple(sorted(hosts)) if hosts is not None else tuple(sorted({host for host, _ in counts}))
    )
    column_ids: Tuple[str, ...] = (
        tuple(sorted(processes)) if processes is not None else tuple(sorted({process for _, process in counts}))
    )
    rows: Dict[str, int] = {host: index for index, host in enumerate(row_ids)}
    columns: Dict[str, int] = {process: index for index, process in enumerate(column_ids)}

    unseen: set = {host for host, _ in counts if host not in rows}
    if unseen:
        logger.warning("Interval %s: ignoring %s hosts outside the roster: %s", t, len(unseen), sorted(unseen))

    data: List[int] = []
    row_index: List[int] = []
    column_index: List[int] = []
    for (host, process), count in sorted(counts.items()):
        if host not in rows or process not in columns:
            continue
        data.append(count)
        row_index.append(rows[host])
        column_index.append(columns[process])
    values: sparse.csr_matrix = sparse.csr_matrix(
        (np.asarray(data, dtype=np.int64), (row_index, column_index)),
        shape=(len(row_ids), len(column_ids)),
        dtype=np.int64,
    )
    logger.debug("Interval %s matrix: %s hosts x %s processes.", t, len(row_ids), len(column_ids))
    return HostProcessMatrix(interval=t, hosts=row_ids, processes=column_ids, values=values)


def synthesize_event_log(
    n_hosts: int = 200,
    n_processes: int = 60,
    n_categories: int = 3,
    n_days: int = 30,
    change_day: Optional[int] = None,
    change_fraction: float = 0.5,
    rate: float = 20.0,
    seed: int = 0,
) -> List[EventRecord]:
    """
    Generates an event log where every host category runs its own set of
    processes with Poisson counts. From change_day onward a fraction of the
    hosts of every category also runs the processes of the next category.
    """
    if n_hosts < 1 or n_processes < n_categories or n_categories < 1:
        raise ValueError("Expecting at least one host and one process per category!")
    if not 0.0 <= change_fraction <= 1.0:
        raise ValueError(f"Change fraction out of [0, 1]: {change_fraction}")
    rng: np.random.Generator = np.random.default_rng(seed)

    # Each category favours a disjoint block of processes.
    blocks: List[np.ndarray] = np.array_split(np.arange(n_processes), n_categories)
    profiles: np.ndarray = np.full((n_categories, n_processes), 0.05 * rate)
    for category, block in enumerate(blocks):
        profiles[category, block] = rate
    categories: np.ndarray = np.arange(n_hosts) % n_categories
    changed: np.ndarray = rng.random(n_hosts) < change_fraction

    width: int = len(str(max(n_hosts, n_processes)))
    events: List[EventRecord] = []
    for day in range(n_days):
        for host in range(n_hosts):
            profile: np.ndarray = profiles[categories[host]]
            if change_day is not None and day >= change_day and changed[host]:
                profile = profile + profiles[(categories[host] + 1) % n_categories]
            counts: np.ndarray = rng.poisson(profile)
            for process in np.flatnonzero(counts):
                events.append(
                    EventRecord(
                        f"h{host:0{width}d}",
                        f"p{process:0{width}d}",
                        day,
                        int(counts[process]),
                    )
                )
    logger.debug("Synthesized %s events over %s days.", len(events), n_days)
    return events
