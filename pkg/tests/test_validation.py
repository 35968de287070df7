"""
Tests for structural and semantic validation of run configurations.
"""

from app.validation import validate_config


def _config(**sections):
    config = {
        "model": {"birth_rate": 2.0, "lifespan": {"family": "exponential", "rate": 1.0}},
        "immigration": {"theta": 2.0, "model": {"kind": "I"}},
        "run": {"t": 1.0, "replicates": 10, "seed": 42},
    }
    config.update(sections)
    return config


def test_valid_config_passes():
    assert validate_config(_config(), "simulate") == []


def test_missing_model():
    config = _config()
    del config["model"]
    errors = validate_config(config)
    assert any("'model'" in e for e in errors)


def test_unknown_family():
    errors = validate_config(_config(model={"birth_rate": 1.0, "lifespan": {"family": "weibull"}}))
    assert any("invalid family 'weibull'" in e for e in errors)


def test_non_positive_rates():
    errors = validate_config(_config(model={"birth_rate": 0, "lifespan": {"family": "exponential", "rate": -1}}))
    assert any("'birth_rate' must be > 0" in e for e in errors)
    assert any("'rate' must be > 0" in e for e in errors)


def test_uniform_bounds():
    errors = validate_config(_config(model={"birth_rate": 1.0, "lifespan": {"family": "uniform", "lo": 2, "hi": 1}}))
    assert any("lo < hi" in e for e in errors)


def test_subcritical_model_only_flagged_when_eta_needed():
    config = _config(model={"birth_rate": 1.0, "lifespan": {"family": "exponential", "rate": 2.0}})
    assert validate_config(config) == []
    errors = validate_config(config, "params")
    assert any("subcritical" in e for e in errors)


def test_probabilities_must_sum_to_one():
    config = _config(immigration={"theta": 1.0, "model": {"kind": "II", "p": [0.5, 0.4]}})
    errors = validate_config(config)
    assert any("sum to 1" in e for e in errors)


def test_geometric_tail_needs_head_below_one():
    ok = _config(immigration={"theta": 1.0, "model": {"kind": "II", "p": [0.5], "tail_ratio": 0.5}})
    assert validate_config(ok) == []
    bad = _config(immigration={"theta": 1.0, "model": {"kind": "II", "p": [1.0], "tail_ratio": 0.5}})
    assert any("sum below 1" in e for e in validate_config(bad))


def test_zero_theta():
    errors = validate_config(_config(immigration={"theta": 0, "model": {"kind": "I"}}, run={"suite": "gem"}))
    assert any("'theta' must be > 0" in e for e in errors)


def test_fisher_log_series_theta_mismatch():
    scheme = {"kind": "III", "abundance": {"family": "fisher_log_series", "a": 2.0}}
    errors = validate_config(_config(immigration={"theta": 1.0, "model": scheme}))
    assert any("forces theta" in e for e in errors)


def test_run_settings():
    errors = validate_config(_config(run={"replicates": 0, "seed": -1, "suite": "everything", "h": 0}))
    assert any("'replicates'" in e for e in errors)
    assert any("'seed'" in e for e in errors)
    assert any("unknown suite 'everything'" in e for e in errors)
    assert any("'h' must be > 0" in e for e in errors)


def test_simulate_needs_immigration():
    config = _config()
    del config["immigration"]
    assert validate_config(config) == []
    assert any("immigration" in e for e in validate_config(config, "simulate"))


def test_not_an_object():
    assert validate_config([1, 2]) == ["configuration must be a JSON object"]
