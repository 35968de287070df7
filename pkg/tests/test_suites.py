"""
Tests for suite orchestration at reduced sample sizes. The full-size runs
are what `splitting-trees validate` executes; here only structure and
determinism are checked.
"""

import pytest

from app.errors import ConfigError
from app.services.runner import default_config
from app.services.suites import SUITE_NAMES, TRANSIENT_SCENARIOS, run_suite, suite_summary

CONFIG = default_config()


def test_suite_names():
    assert SUITE_NAMES == ("scale", "transient", "limits", "gem", "model2", "model3", "spine", "lemmas", "all")


def test_unknown_suite():
    with pytest.raises(ConfigError):
        run_suite("nope", CONFIG, seed=1)


def test_lemmas_suite_is_deterministic():
    first = run_suite("lemmas", CONFIG, seed=42, scale=0.02)
    second = run_suite("lemmas", CONFIG, seed=42, scale=0.02)
    parallel = run_suite("lemmas", CONFIG, seed=42, workers=2, scale=0.02)
    assert [r.to_json() for r in first] == [r.to_json() for r in second] == [r.to_json() for r in parallel]
    assert all(r.name.startswith("lemmas.") for r in first)
    assert len(first) == 6


def test_spine_suite_reports():
    reports = run_suite("spine", CONFIG, seed=42, scale=0.02)
    names = [r.name for r in reports]
    assert "spine.matches_rejection" in names
    assert "spine.dominates_yule" in names
    assert "spine.yule_second_moment" in names
    # exact identities hold at any sample size
    for report in reports:
        if report.name.startswith("spine.tilted_mass") or report.name == "spine.dominates_yule":
            assert report.passed, report.name


def test_summary_shape():
    reports = run_suite("model2", CONFIG, seed=3, scale=0.05)
    summary = suite_summary(reports)
    assert set(summary) == {"passed", "tests"}
    assert len(summary["tests"]) == len(reports)
    assert "model2.tail_types" in [r.name for r in reports]


def test_transient_suite_covers_every_lifespan_family():
    reports = run_suite("transient", CONFIG, seed=7, scale=0.05)
    x_t = {r.name: r for r in reports if r.name.startswith("transient.x_t.")}
    assert set(x_t) == {f"transient.x_t.{name}" for name, _, _ in TRANSIENT_SCENARIOS}
    assert {name for name, _, _ in TRANSIENT_SCENARIOS} == {"exponential", "immortal", "fixed", "gamma", "uniform"}
    for report in x_t.values():
        assert report.kind == "chi2"
        assert report.n == 500
        assert report.metadata["bins"] >= 2
