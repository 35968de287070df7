"""
Structural + semantic validation for run configurations.
Catches both missing fields and model inconsistencies (e.g. a subcritical
model handed to a command that needs the Malthusian parameter).
"""

import math
from typing import Optional

VALID_FAMILIES = {"exponential", "dirac", "dirac_infinite", "uniform", "gamma"}
VALID_MODELS = {"I", "II", "III"}
VALID_ABUNDANCES = {"fisher_log_series"}
VALID_SUITES = {"scale", "transient", "limits", "gem", "model2", "model3", "spine", "lemmas", "all"}
SUPERCRITICAL_COMMANDS = {"params", "scale", "simulate", "validate"}


def validate_config(config: dict, command: Optional[str] = None) -> list[str]:
    """
    Validate a run configuration dict before it is parsed into RunConfig.

    Runs structural checks (required sections, known families, positive
    rates) and semantic checks (probabilities summing to one, theta matching
    the abundance law, supercriticality when `command` needs η).

    Returns a list of error strings. Empty list means the config is valid.
    """
    errors: list[str] = []
    if not isinstance(config, dict):
        return ["configuration must be a JSON object"]

    for key in config:
        if key not in ("model", "immigration", "run"):
            errors.append(f"Unknown top-level field: '{key}'")

    # --- model ---
    model = config.get("model")
    if model is None:
        errors.append("Missing required top-level field: 'model'")
    elif not isinstance(model, dict):
        errors.append("'model' must be an object")
    else:
        errors.extend(_validate_model(model, command))

    # --- immigration ---
    immigration = config.get("immigration")
    if immigration is not None:
        if not isinstance(immigration, dict):
            errors.append("'immigration' must be an object")
        else:
            errors.extend(_validate_immigration(immigration))
    elif command == "simulate":
        errors.append("'simulate' needs an 'immigration' section")

    # --- run ---
    run = config.get("run", {})
    if not isinstance(run, dict):
        errors.append("'run' must be an object")
    else:
        errors.extend(_validate_run(run))

    return errors


def _positive(section: dict, field: str, prefix: str, required: bool = True) -> list[str]:
    value = section.get(field)
    if value is None:
        return [f"{prefix}: missing required field '{field}'"] if required else []
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return [f"{prefix}: '{field}' must be a number"]
    if not value > 0:
        return [f"{prefix}: '{field}' must be > 0, got {value}"]
    return []


def _validate_model(model: dict, command: Optional[str]) -> list[str]:
    prefix = "Model"
    errors = _positive(model, "birth_rate", prefix)

    lifespan = model.get("lifespan")
    if not isinstance(lifespan, dict):
        errors.append(f"{prefix}: 'lifespan' must be an object with a 'family' field")
        return errors

    family = lifespan.get("family")
    lp = f"{prefix} lifespan"
    if family not in VALID_FAMILIES:
        errors.append(f"{lp}: invalid family '{family}'. Must be one of: {sorted(VALID_FAMILIES)}")
        return errors

    if family == "exponential":
        errors.extend(_positive(lifespan, "rate", lp))
    elif family == "dirac":
        errors.extend(_positive(lifespan, "a", lp))
    elif family == "gamma":
        errors.extend(_positive(lifespan, "shape", lp))
        errors.extend(_positive(lifespan, "rate", lp))
    elif family == "uniform":
        lo, hi = lifespan.get("lo"), lifespan.get("hi")
        if not isinstance(lo, (int, float)) or not isinstance(hi, (int, float)):
            errors.append(f"{lp}: 'lo' and 'hi' must be numbers")
        elif not (0 <= lo < hi and math.isfinite(hi)):
            errors.append(f"{lp}: need 0 <= lo < hi < inf, got lo={lo}, hi={hi}")

    if errors or command not in SUPERCRITICAL_COMMANDS:
        return errors

    # Semantic: commands that use η need m > 1
    m = _mean_offspring(model["birth_rate"], lifespan)
    if not m > 1:
        errors.append(f"{prefix}: subcritical model (mean offspring m={m:.6g} <= 1); '{command}' needs m > 1")
    return errors


def _mean_offspring(b: float, lifespan: dict) -> float:
    family = lifespan["family"]
    if family == "exponential":
        return b / lifespan["rate"]
    if family == "dirac":
        return b * lifespan["a"]
    if family == "dirac_infinite":
        return math.inf
    if family == "uniform":
        return b * (lifespan["lo"] + lifespan["hi"]) / 2
    return b * lifespan["shape"] / lifespan["rate"]


def _validate_immigration(immigration: dict) -> list[str]:
    prefix = "Immigration"
    errors = _positive(immigration, "theta", prefix)

    scheme = immigration.get("model", {"kind": "I"})
    if not isinstance(scheme, dict):
        return errors + [f"{prefix}: 'model' must be an object with a 'kind' field"]
    kind = scheme.get("kind")
    if kind not in VALID_MODELS:
        return errors + [f"{prefix}: invalid kind '{kind}'. Must be one of: {sorted(VALID_MODELS)}"]

    if kind == "II":
        errors.extend(_validate_types(scheme, f"{prefix} model II"))
    elif kind == "III":
        abundance = scheme.get("abundance")
        ap = f"{prefix} model III"
        if not isinstance(abundance, dict) or abundance.get("family") not in VALID_ABUNDANCES:
            errors.append(f"{ap}: 'abundance' must be one of: {sorted(VALID_ABUNDANCES)}")
        else:
            a_errors = _positive(abundance, "a", ap)
            errors.extend(a_errors)
            theta = immigration.get("theta")
            # Semantic: the Fisher log-series fixes θ = ∫ x f(x) dx = 1/a
            if not a_errors and isinstance(theta, (int, float)) and theta > 0:
                expected = 1.0 / abundance["a"]
                if abs(theta - expected) > 1e-9 * expected:
                    errors.append(f"{ap}: Fisher log-series with a={abundance['a']} forces theta={expected:.6g}, got {theta}")
    return errors


def _validate_types(scheme: dict, prefix: str) -> list[str]:
    p = scheme.get("p")
    if not isinstance(p, list) or not p:
        return [f"{prefix}: 'p' must be a non-empty list of probabilities"]
    if any(isinstance(x, bool) or not isinstance(x, (int, float)) or not x > 0 for x in p):
        return [f"{prefix}: every entry of 'p' must be a positive number"]

    total = math.fsum(p)
    ratio = scheme.get("tail_ratio")
    if ratio is None:
        if abs(total - 1.0) > 1e-12:
            return [f"{prefix}: 'p' must sum to 1, got {total!r}"]
        return []
    if not isinstance(ratio, (int, float)) or not 0 < ratio < 1:
        return [f"{prefix}: 'tail_ratio' must lie in (0, 1)"]
    if not total < 1:
        return [f"{prefix}: a geometric tail needs 'p' to sum below 1"]
    return []


def _validate_run(run: dict) -> list[str]:
    prefix = "Run"
    errors: list[str] = []

    replicates = run.get("replicates", 1)
    if isinstance(replicates, bool) or not isinstance(replicates, int) or replicates < 1:
        errors.append(f"{prefix}: 'replicates' must be an integer >= 1, got {replicates!r}")

    seed = run.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        errors.append(f"{prefix}: 'seed' must be an unsigned 64-bit integer, got {seed!r}")

    t = run.get("t", 1.0)
    if isinstance(t, bool) or not isinstance(t, (int, float)) or t < 0:
        errors.append(f"{prefix}: 't' must be a number >= 0, got {t!r}")

    for field in ("h", "horizon"):
        errors.extend(_positive(run, field, prefix, required=False))

    workers = run.get("workers", 1)
    if isinstance(workers, bool) or not isinstance(workers, int) or workers < 1:
        errors.append(f"{prefix}: 'workers' must be an integer >= 1, got {workers!r}")

    suite = run.get("suite")
    if suite is not None and suite not in VALID_SUITES:
        errors.append(f"{prefix}: unknown suite '{suite}'. Must be one of: {sorted(VALID_SUITES)}")
    return errors
