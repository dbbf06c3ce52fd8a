"""
Profiling pipeline tests.
"""

import attrs
import pytest
import numpy as np

from profiler.clustering import NOISE, ClusterModel
from profiler.config import PipelineConfig
from profiler.detection import Decision
from profiler.errors import DimensionError, TimeOrderError
from profiler.events import build_matrix, default_roster, intervals, process_catalog, synthesize_event_log
from profiler.formats import LatentInstance
from profiler.pipeline import Pipeline, accuracy, process_interval
from profiler.synthesis import StreamGenerator, StreamSpec, inject_spike


def test_accuracy_identity_and_permutation():
    truth = np.array([0, 0, 1, 1, 2])
    assert accuracy(truth, truth) == 1.0
    assert accuracy(np.array([7, 7, 3, 3, 5]), truth) == 1.0


def test_accuracy_majority():
    truth = np.array([0, 0, 0, 1, 1, 1])
    assert accuracy(np.array([0, 0, 0, 0, 1, 1]), truth) == pytest.approx(5 / 6)
    assert accuracy(np.array([NOISE, 0, 0, 1, 1, 1]), truth) == pytest.approx(5 / 6)
    assert accuracy(np.full(6, NOISE), truth) == 0.0


def test_accuracy_coin():
    rng = np.random.default_rng(0)
    truth = np.repeat([0, 1], 5000)
    assert accuracy(rng.integers(0, 2, size=10000), truth) == pytest.approx(0.5, abs=0.05)


def test_accuracy_rejects():
    with pytest.raises(ValueError):
        accuracy(np.array([]), np.array([]))
    with pytest.raises(DimensionError):
        accuracy(np.zeros(3), np.zeros(4))


def test_stationary_stream(make_stream):
    pipeline = Pipeline(PipelineConfig())
    stream = make_stream(instances_before=30, total_instances=30)
    reports = [pipeline.process_interval(instance) for instance in stream]
    assert {report.decision for report in reports} == {Decision.STAY_NORMAL}
    assert not any(report.reset for report in reports)
    assert all(report.accuracy == 1.0 for report in reports)
    assert all(report.n_clusters == 2 for report in reports)
    assert all(report.nmf_error is None for report in reports)
    assert set(reports[0].timings) == {"nmf", "detection", "clustering"}


def test_abrupt_drift_is_retrained(make_stream):
    pipeline = Pipeline(PipelineConfig())
    reports = [process_interval(pipeline, instance) for instance in make_stream()]
    decisions = [report.decision for report in reports]
    assert decisions[:20] == [Decision.STAY_NORMAL] * 20
    assert len(pipeline.resets) == 1
    reset_at = pipeline.resets[0]
    assert 25 <= reset_at <= 40
    assert reports[reset_at].reset
    assert Decision.ENTER_CHANGE in decisions[20:reset_at]
    assert Decision.OUTLIER_CONFIRMED not in decisions
    assert all(report.accuracy == 1.0 for report in reports[reset_at:])
    assert reports[-1].n_clusters == 2


def test_reset_keeps_only_new_micro_clusters(make_stream):
    pipeline = Pipeline(PipelineConfig())
    for instance in make_stream():
        report = pipeline.process_interval(instance)
        if report.reset:
            micro_clusters = pipeline.model.potential + pipeline.model.outlier_buffer
            assert micro_clusters
            assert all(mc.created_at >= report.interval for mc in micro_clusters)


def test_spike_is_not_retrained(make_stream):
    stream = inject_spike(make_stream(instances_before=40, total_instances=40), 15, 100.0, 80)
    pipeline = Pipeline(PipelineConfig())
    reports = [pipeline.process_interval(instance) for instance in stream]
    assert reports[15].decision is Decision.ENTER_CHANGE
    assert reports[15].changed_hosts == 80
    assert reports[16].decision is Decision.OUTLIER_CONFIRMED
    assert not pipeline.resets
    assert Decision.DRIFT_CONFIRMED not in [report.decision for report in reports]


def test_drift_machinery_is_inert_without_handling(make_stream):
    config = PipelineConfig(change_threshold=float("inf"), drift_handling=False)
    pipeline = Pipeline(config)
    model = ClusterModel(config.denstream)
    for instance in make_stream():
        report = pipeline.process_interval(instance)
        model.merge(instance.rows, instance.index)
        if instance.index % model.pruning_period == 0:
            model.prune(instance.index)
        assert report.changed_hosts == 0
        assert np.array_equal(report.assignments, model.offline_cluster().assign(instance.rows))


def test_fractional_drift_threshold(make_stream):
    pipeline = Pipeline(PipelineConfig(drift_threshold=0.25))
    pipeline.process_interval(make_stream(total_instances=1)[0])
    assert pipeline.state.drift_threshold == 50


def test_on_demand_clustering(make_stream):
    pipeline = Pipeline(PipelineConfig(cluster_every=0))
    report = pipeline.process_interval(make_stream(total_instances=1)[0])
    assert report.assignments is None and report.accuracy is None and report.n_clusters is None
    assert pipeline.final_clusters().n_clusters == 2


def test_cluster_every(make_stream):
    pipeline = Pipeline(PipelineConfig(cluster_every=3))
    reports = [pipeline.process_interval(instance) for instance in make_stream(total_instances=7)]
    assert [report.accuracy is not None for report in reports] == [True, False, False, True, False, False, True]


def test_pipeline_rejects(make_stream):
    stream = make_stream(total_instances=2)
    pipeline = Pipeline(PipelineConfig())
    pipeline.process_interval(stream[1])
    with pytest.raises(TimeOrderError):
        pipeline.process_interval(stream[0])
    with pytest.raises(DimensionError):
        pipeline.process_interval(LatentInstance(index=5, rows=np.zeros((10, 2))))


def test_event_log_pipeline():
    events = synthesize_event_log(n_hosts=30, n_processes=9, n_categories=3, n_days=6, seed=5)
    roster = default_roster(events, 0)
    catalog = process_catalog(events)
    config = attrs.evolve(PipelineConfig(n_features=3, drift_threshold=0.5), nmf_max_iterations=50)
    pipeline = Pipeline(config)
    reports = [pipeline.process_interval(build_matrix(events, day, roster, catalog)) for day in intervals(events)]
    assert [report.interval for report in reports] == list(range(6))
    assert all(report.nmf_error is not None and report.nmf_error >= 0 for report in reports)
    assert all(0.0 <= report.accuracy <= 1.0 for report in reports)
    assert pipeline.state.primary.shape == (30, 3)


def test_generated_stream_is_quiet_before_the_drift():
    spec = StreamSpec(
        drift_magnitude=0.6,
        instance_size=200,
        instances_before=50,
        total_instances=55,
        js_samples=20000,
    )
    pipeline = Pipeline(PipelineConfig())
    reports = [pipeline.process_interval(instance) for instance in StreamGenerator(spec)]
    assert [report.decision for report in reports[:50]] == [Decision.STAY_NORMAL] * 50
    assert all(0.0 <= report.accuracy <= 1.0 for report in reports)
