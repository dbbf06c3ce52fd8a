"""
Configuration tests.
"""

import pytest

from profiler.clustering import DenStreamParams
from profiler.config import PipelineConfig, build_pipeline_config, build_stream_spec, merge_layers, parse_bool
from profiler.settings import ChangeThresholdSettings, EpsilonSettings, LatentFeaturesSettings
from profiler.settings import MuSettings, Settings
from profiler.synthesis import DriftType


def test_settings_fallback():
    assert EpsilonSettings.get("eventlog") == 0.1
    assert EpsilonSettings.get("synthetic") == 0.5
    assert EpsilonSettings.get("unknown") == 0.5
    # Presets are class attributes, not inherited helpers.
    assert EpsilonSettings.get("get") == 0.5
    assert ChangeThresholdSettings.get("synthetic") == 0.25
    with pytest.raises(KeyError):
        Settings.get("synthetic")


def test_default_preset():
    config = build_pipeline_config()
    assert config == PipelineConfig()
    assert config.denstream == DenStreamParams()
    assert config.denstream.pruning_period == 8


def test_eventlog_preset():
    config = build_pipeline_config("eventlog")
    assert config.n_features == LatentFeaturesSettings.get("eventlog") == 10
    assert config.denstream.epsilon == 0.1
    assert config.denstream.beta == 1.0
    assert config.denstream.mu == MuSettings.get("eventlog")
    assert config.denstream.offline_eps == pytest.approx(0.2)


def test_layers(tmp_path):
    path = tmp_path / "profile.conf"
    path.write_text(
        "# DenStream\nlambda-decay=0.2\nepsilon=0.3\nthd=0.03\nwarm_start=false\nmd=0.4\n\n",
        encoding="utf-8",
    )
    config = build_pipeline_config("synthetic", str(path), {"epsilon": 0.7, "nf": None})
    assert config.denstream.decay_rate == 0.2
    assert config.denstream.epsilon == 0.7
    assert config.drift_threshold == 0.03
    assert config.warm_start is False
    assert config.n_features == 2


def test_unknown_key(tmp_path):
    path = tmp_path / "profile.conf"
    path.write_text("bogus=1\n", encoding="utf-8")
    with pytest.raises(KeyError):
        build_pipeline_config(path=str(path))


def test_malformed_line(tmp_path):
    path = tmp_path / "profile.conf"
    path.write_text("epsilon 0.3\n", encoding="utf-8")
    with pytest.raises(ValueError):
        build_pipeline_config(path=str(path))


def test_invalid_values():
    with pytest.raises(ValueError):
        build_pipeline_config(overrides={"beta": 0.2, "mu": 2})
    with pytest.raises(ValueError):
        build_pipeline_config(overrides={"roster": "sometimes"})
    with pytest.raises(ValueError):
        build_pipeline_config(overrides={"pruning": "maybe"})


def test_stream_spec(tmp_path):
    path = tmp_path / "stream.conf"
    path.write_text("drift-type=gradual\ndd=10\nsticky-hosts=no\nepsilon=0.4\n", encoding="utf-8")
    spec = build_stream_spec(path=str(path), overrides={"md": 0.4, "seed": 3})
    assert spec.drift_type is DriftType.GRADUAL
    assert spec.drift_duration == 10
    assert spec.drift_magnitude == 0.4
    assert spec.sticky_hosts is False
    assert spec.seed == 3
    assert spec.js_samples == 100000
    assert spec.max_attempts == 500


def test_stream_spec_rejects():
    with pytest.raises(ValueError):
        build_stream_spec(overrides={"drift_type": "abrupt", "dd": 5})


def test_merge_layers():
    assert merge_layers({"lambda-decay": 1}, None, {"lambda_decay": 2, "mu": None}) == {"lambda_decay": 2}


@pytest.mark.parametrize("value, expected", [(True, True), ("yes", True), ("0", False), ("Off", False)])
def test_parse_bool(value, expected):
    assert parse_bool(value, bool) is expected


def test_stream_presets():
    default = build_stream_spec()
    assert (default.mean_low, default.mean_high, default.sigma_low, default.sigma_high) == (0.0, 10.0, 0.3, 1.0)
    assert default.host_persistence == 0.0 and default.min_separation == 0.0
    synthetic = build_stream_spec("synthetic", overrides={"host_persistence": 0.9})
    assert (synthetic.mean_high, synthetic.sigma_high, synthetic.min_separation) == (7.0, 0.4, 3.5)
    assert synthetic.host_persistence == 0.9
    assert synthetic.max_attempts == 20000
    assert build_pipeline_config("synthetic").change_threshold == 0.25
