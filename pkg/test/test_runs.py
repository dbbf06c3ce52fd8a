"""
Run and command-line tests.
"""

import pytest
import pandas as pd

from app import main
from profiler.config import PipelineConfig
from profiler.events import EventRecord
from profiler.experiment import TIMELINE_COLUMNS
from profiler.formats import manifest_path, read_key_values
from profiler.runs import NmfBenchRun, ProfileRun, REPORT_COLUMNS, event_matrices


FIXTURE = "h1,p1,0,3\nh1,p2,0,1\nh2,p2,0,2\n"


def _generate(tmp_path, *flags):
    path = str(tmp_path / "stream.csv")
    flags = ["--si", "60", "--nb", "6", "--total", "12", "--js-samples", "5000", "--max-attempts", "5000", *flags]
    code = main(["generate", "--output", path, *flags])
    assert code == 0
    return path


def test_generate(tmp_path):
    path = _generate(tmp_path, "--drift-type", "incremental", "--dd", "4", "--seed", "2")
    frame = pd.read_csv(path)
    assert len(frame) == 60 * 12
    manifest = read_key_values(manifest_path(path))
    assert manifest["drift_type"] == "incremental"
    assert manifest["drift_end"] == "10"


def test_generate_synthetic_preset(tmp_path):
    path = _generate(tmp_path, "--preset", "synthetic", "--md", "0", "--host-persistence", "0.99")
    manifest = read_key_values(manifest_path(path))
    assert (manifest["mean_low"], manifest["mean_high"]) == ("0.0", "7.0")
    assert (manifest["sigma_low"], manifest["sigma_high"]) == ("0.2", "0.4")
    assert manifest["min_separation"] == "3.5"
    assert manifest["host_persistence"] == "0.99"
    assert manifest["screen_samples"] == "2000"


def test_generate_with_spike(tmp_path):
    path = _generate(tmp_path, "--nb", "12", "--spike-at", "3", "--spike-shift", "50", "--spike-hosts", "20")
    assert read_key_values(manifest_path(path))["spike_at"] == "3"


def test_generate_rejects(tmp_path):
    assert main(["generate", "--output", str(tmp_path / "bad.csv"), "--drift-type", "abrupt", "--dd", "5"]) == 1


def test_generate_events(tmp_path):
    path = tmp_path / "events.log"
    flags = ["--hosts", "12", "--processes", "6", "--days", "3"]
    assert main(["generate-events", "--output", str(path), *flags]) == 0
    assert path.read_text(encoding="utf-8").startswith("# host_id,process_name,date,count\n")


def test_profile_event_log(tmp_path):
    events = tmp_path / "events.log"
    events.write_text(FIXTURE, encoding="utf-8")
    outputs = []
    for name in ("first", "second"):
        report = str(tmp_path / f"{name}.csv")
        snapshot = str(tmp_path / f"{name}_clusters.csv")
        code = main(
            ["profile", "--events", str(events), "--output", report, "--snapshot", snapshot, "--mu", "1.5"]
        )
        assert code == 0
        with open(report, "rb") as stream:
            outputs.append(stream.read())
    assert outputs[0] == outputs[1]
    frame = pd.read_csv(str(tmp_path / "first.csv"))
    assert frame.columns.tolist() == REPORT_COLUMNS
    assert len(frame) == 1
    assert frame["decision"].tolist() == ["stay-normal"]


def test_profile_stream(tmp_path):
    stream = _generate(tmp_path)
    report = str(tmp_path / "report.csv")
    assignments = str(tmp_path / "assignments.csv")
    assert main(["profile", "--stream", stream, "--output", report, "--assignments", assignments]) == 0
    assert len(pd.read_csv(report)) == 12
    frame = pd.read_csv(assignments)
    assert frame.columns.tolist() == ["interval", "host", "cluster_id"]
    assert len(frame) == 60 * 12


def test_profile_missing_input(tmp_path):
    assert main(["profile", "--events", str(tmp_path / "missing.log"), "--output", str(tmp_path / "r.csv")]) == 1


def test_profile_requires_one_source():
    with pytest.raises(ValueError):
        ProfileRun(PipelineConfig(), "report.csv")
    with pytest.raises(SystemExit) as error:
        main(["profile", "--output", "report.csv"])
    assert error.value.code == 2


def test_eval(tmp_path):
    stream = _generate(tmp_path)
    timeline = str(tmp_path / "timeline.csv")
    plots = str(tmp_path / "fig")
    code = main(["eval", "--preset", "synthetic", "--stream", stream, "--output", timeline, "--plots", plots])
    assert code == 0
    frame = pd.read_csv(timeline)
    assert frame.columns.tolist() == TIMELINE_COLUMNS
    assert len(frame) == 12
    assert (tmp_path / "fig_changes.svg").exists()
    assert (tmp_path / "fig_accuracy.svg").exists()


def test_nmf_bench(tmp_path):
    output = str(tmp_path / "bench.csv")
    flags = ["--rows", "30", "--columns", "40", "--nmf-tolerance", "0", "--ranks", "2", "5", "10"]
    code = main(["nmf-bench", "--output", output, *flags])
    assert code == 0
    frame = pd.read_csv(output)
    assert frame["k"].tolist() == [2, 5, 10]
    errors = frame["error"].tolist()
    assert errors[0] > errors[1] > errors[2]


def test_nmf_bench_default_ranks():
    run = NmfBenchRun("bench.csv", rows=40, columns=40, max_iterations=5)
    run.load()
    run.execute()
    assert [row["k"] for row in run._rows] == [2, 5, 10, 20, 30]


def test_event_matrices_roster():
    events = [EventRecord("h1", "p1", 0, 1), EventRecord("h2", "p2", 1, 4)]
    first = event_matrices(events, "first-interval")
    assert [matrix.hosts for matrix in first] == [("h1",), ("h1",)]
    assert first[1].total() == 0
    every = event_matrices(events, "all-intervals")
    assert every[1].hosts == ("h1", "h2")
    assert every[1].processes == ("p1", "p2")
    with pytest.raises(ValueError):
        event_matrices([], "first-interval")
