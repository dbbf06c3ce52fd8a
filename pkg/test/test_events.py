"""
Event ingestion tests.
"""

import pytest
import numpy as np

from profiler.errors import ParseError
from profiler.events import EventRecord
from profiler.events import build_matrix, default_roster, ingest_event_log, intervals, parse_line
from profiler.events import process_catalog, synthesize_event_log, write_event_log


def test_parse_line():
    assert parse_line("h1,p1,0,3", 1) == EventRecord("h1", "p1", 0, 3)


@pytest.mark.parametrize("line", ["h1,p1,0,-2", "h1,p1,-1,2", "h1,p1,0", "h1,,0,2", "h1,p1,zero,2"])
def test_parse_line_rejects(line):
    with pytest.raises(ParseError) as error:
        parse_line(line, 7, "events.log")
    assert error.value.line_number == 7
    assert error.value.path == "events.log"
    assert str(error.value).startswith("events.log:7:")


def test_ingest_fixture(tmp_path):
    path = tmp_path / "events.log"
    path.write_text("# fixture\nh1,p1,0,3\n\nh2,p2,0,1\nh1,p2,1,4\n", encoding="utf-8")
    records = ingest_event_log(str(path))
    assert records == [
        EventRecord("h1", "p1", 0, 3),
        EventRecord("h2", "p2", 0, 1),
        EventRecord("h1", "p2", 1, 4),
    ]


def test_ingest_reports_line_number(tmp_path):
    path = tmp_path / "events.log"
    path.write_text("h1,p1,0,3\n# comment\nh1,p1,0,-2\n", encoding="utf-8")
    with pytest.raises(ParseError) as error:
        ingest_event_log(str(path))
    assert error.value.line_number == 3


def test_write_then_ingest(tmp_path):
    events = [EventRecord("h1", "p1", 0, 3), EventRecord("h2", "p1", 2, 5)]
    path = str(tmp_path / "events.log")
    write_event_log(events, path)
    assert ingest_event_log(path) == events


def test_build_matrix_placement():
    matrix = build_matrix([EventRecord("h1", "p1", 0, 3), EventRecord("h1", "p2", 0, 1)], 0)
    assert matrix.shape == (1, 2)
    assert matrix.dense().tolist() == [[3.0, 1.0]]


def test_build_matrix_sums_duplicates():
    matrix = build_matrix([EventRecord("h1", "p1", 0, 3), EventRecord("h1", "p1", 0, 2)], 0)
    assert matrix.dense()[0, 0] == 5


def test_build_matrix_filters_interval():
    matrix = build_matrix([EventRecord("h1", "p1", 1, 3), EventRecord("h2", "p1", 1, 2)], 0)
    assert matrix.shape == (0, 0)
    assert matrix.total() == 0


def test_build_matrix_negative_interval():
    with pytest.raises(ValueError):
        build_matrix([], -1)


def test_build_matrix_roster():
    events = [
        EventRecord("h2", "p1", 0, 3),
        EventRecord("h3", "p2", 1, 1),
        EventRecord("h1", "p2", 1, 2),
    ]
    roster = default_roster(events, 0)
    assert roster == ("h2",)
    catalog = process_catalog(events)
    matrix = build_matrix(events, 1, ("h1", "h2"), catalog)
    assert matrix.hosts == ("h1", "h2")
    assert matrix.processes == ("p1", "p2")
    # h3 is outside the roster and h2 did not run anything.
    assert matrix.dense().tolist() == [[0.0, 2.0], [0.0, 0.0]]


def test_matrix_total_matches_counts():
    events = synthesize_event_log(n_hosts=20, n_processes=9, n_days=3, seed=4)
    for day in intervals(events):
        expected = sum(event.count for event in events if event.date == day)
        assert build_matrix(events, day).total() == expected


def test_synthesize_event_log():
    events = synthesize_event_log(n_hosts=12, n_processes=6, n_categories=3, n_days=4, seed=1)
    assert intervals(events) == [0, 1, 2, 3]
    assert all(event.count > 0 for event in events)
    assert events == synthesize_event_log(n_hosts=12, n_processes=6, n_categories=3, n_days=4, seed=1)
    matrix = build_matrix(events, 0)
    assert np.all(matrix.dense() >= 0)


def test_synthesize_event_log_change():
    events = synthesize_event_log(
        n_hosts=30,
        n_processes=30,
        n_categories=3,
        n_days=4,
        change_day=2,
        change_fraction=1.0,
        rate=20.0,
        seed=2,
    )
    before = sum(event.count for event in events if event.date == 1)
    after = sum(event.count for event in events if event.date == 2)
    # Every host also runs a second block of processes after the change.
    assert after > 1.5 * before


def test_synthesize_event_log_rejects():
    with pytest.raises(ValueError):
        synthesize_event_log(n_hosts=0)
    with pytest.raises(ValueError):
        synthesize_event_log(change_fraction=1.5)
