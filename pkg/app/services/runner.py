"""
Command orchestration shared by the CLI and the HTTP routes: config
parsing, then params / scale / simulate / validate / estimate.
"""

import json
import logging
import math
from functools import partial
from typing import Any, Optional

from pydantic import ValidationError

from app.errors import ConfigError
from app.reader import read_abundances
from app.schemas import AlphaEstimate, PopulationSnapshot, RunConfig, RunSettings, TestReport
from app.services import model_core
from app.services.estimation import abundances_to_fractions, estimate_alpha
from app.services.immigration import simulate_immigration
from app.services.replicates import run_replicates
from app.services.scale_function import default_horizon, solve_scale
from app.services.suites import EXPONENTIAL, run_suite, suite_summary
from app.validation import validate_config

logger = logging.getLogger(__name__)

SCALE_COLUMNS = ("t", "W", "Wprime", "exp_scaled")
SIMULATE_COLUMNS = ("replicate", "model", "t", "type_label", "immigration_time", "abundance", "total")


def parse_config(raw: Any, command: Optional[str] = None, **overrides) -> RunConfig:
    """Validate a raw config dict, apply run overrides that are not None, parse."""
    errors = validate_config(raw, command)
    if errors:
        for error in errors:
            logger.warning("config: %s", error)
        raise ConfigError(errors, context=command)

    run = {**raw.get("run", {}), **{k: v for k, v in overrides.items() if v is not None}}
    try:
        return RunConfig.model_validate({**raw, "run": run})
    except ValidationError as exc:
        messages = [f"{'.'.join(str(p) for p in e['loc'])}: {e['msg']}" for e in exc.errors()]
        for message in messages:
            logger.warning("config: %s", message)
        raise ConfigError(messages, context=command) from exc


def format_number(x: float) -> str:
    return f"{x:.17g}"


def params_payload(config: RunConfig) -> dict[str, float]:
    return model_core.malthusian(config.model).as_public_dict()


def scale_rows(config: RunConfig) -> list[tuple[float, float, float, float]]:
    params = model_core.malthusian(config.model)
    run = config.run
    horizon = run.horizon if run.horizon is not None else default_horizon(params, run.t)
    grid = solve_scale(config.model, params, horizon, run.h)
    times = grid.times
    scaled = [math.exp(-params.eta * t) * w for t, w in zip(times, grid.values)]
    return list(zip(times.tolist(), grid.values.tolist(), grid.derivs.tolist(), scaled))


def simulate_snapshots(config: RunConfig, seed: int, workers: int = 1) -> list[PopulationSnapshot]:
    if config.immigration is None:
        raise ConfigError(["'simulate' needs an 'immigration' section"], context="simulate")
    task = partial(simulate_immigration, config.model, config.immigration, config.run.t)
    logger.info("simulating %d replicates to t=%g (seed=%d)", config.run.replicates, config.run.t, seed)
    return run_replicates(task, config.run.replicates, seed, workers)


def simulate_rows(snapshots: list[PopulationSnapshot]) -> list[tuple]:
    rows = []
    for replicate, snapshot in enumerate(snapshots):
        for family in snapshot.families:
            rows.append(
                (
                    replicate,
                    snapshot.model,
                    format_number(snapshot.t),
                    family.type_label,
                    format_number(family.immigration_time),
                    family.abundance,
                    snapshot.total,
                )
            )
    return rows


def run_validation(
    config: RunConfig, suite: str, seed: int, workers: int = 1, scale: float = 1.0
) -> tuple[list[TestReport], dict]:
    reports = run_suite(suite, config, seed, workers=workers, scale=scale)
    return reports, suite_summary(reports)


def estimate_from_bytes(filename: str, data: bytes) -> AlphaEstimate:
    """A JSON list of age-ranked fractions, or an abundance file."""
    try:
        parsed = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError):
        parsed = None
    if isinstance(parsed, list):
        return estimate_alpha(parsed)
    return estimate_alpha(abundances_to_fractions(read_abundances(filename, data)))


def default_config() -> RunConfig:
    """Config used by `validate` when none is given: the exponential suite model."""
    return RunConfig(model=EXPONENTIAL, run=RunSettings())
