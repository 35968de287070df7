"""
API endpoints mirroring the command line.

POST /api/params: η, c, m and the extinction probability
POST /api/scale: tabulated scale function
POST /api/simulate: one population snapshot per replicate
POST /api/validate: validation suite reports, optionally saved
POST /api/estimate: θ/b from an uploaded abundance file
"""

import json
import logging
import os
from pathlib import Path
from typing import Any

from fastapi import APIRouter, Body, File, HTTPException, Query, UploadFile

from app.errors import SplittingTreeError
from app.schemas import AlphaEstimate, PopulationSnapshot
from app.services import runner

_CONFIGS_DIR = Path(os.environ.get("CONFIGS_DIR", "./configs"))

logger = logging.getLogger(__name__)

router = APIRouter()


def _domain_error(exc: SplittingTreeError) -> HTTPException:
    logger.warning("request rejected: %s", exc)
    return HTTPException(status_code=422, detail=str(exc))


@router.post("/params")
def params(config: dict[str, Any] = Body(..., description="Run configuration {model, immigration, run}")) -> dict:
    try:
        return runner.params_payload(runner.parse_config(config, "params"))
    except SplittingTreeError as exc:
        raise _domain_error(exc)
    except Exception:
        logger.exception("params failed")
        raise HTTPException(status_code=500, detail="Parameter computation failed.")


@router.post("/scale")
def scale(config: dict[str, Any] = Body(...)) -> dict:
    """Columns t, W, Wprime, exp_scaled of the solved grid."""
    try:
        rows = runner.scale_rows(runner.parse_config(config, "scale"))
    except SplittingTreeError as exc:
        raise _domain_error(exc)
    except Exception:
        logger.exception("scale solve failed")
        raise HTTPException(status_code=500, detail="Scale function solve failed.")
    return {name: [row[i] for row in rows] for i, name in enumerate(runner.SCALE_COLUMNS)}


@router.post("/simulate", response_model=list[PopulationSnapshot])
def simulate(config: dict[str, Any] = Body(...)) -> list[PopulationSnapshot]:
    try:
        parsed = runner.parse_config(config, "simulate")
        return runner.simulate_snapshots(parsed, parsed.run.seed, parsed.run.workers)
    except SplittingTreeError as exc:
        raise _domain_error(exc)
    except Exception:
        logger.exception("simulation failed")
        raise HTTPException(status_code=500, detail="Simulation failed.")


@router.post("/validate")
def validate(
    config: dict[str, Any] = Body(...),
    save: bool = Query(False, description="Save the report to configs/report_{suite}_{seed}.json"),
) -> dict:
    """
    Run the suite named in run.suite (default all). The summary carries
    `passed` and the per-test reports.
    """
    try:
        parsed = runner.parse_config(config, "validate")
        suite = parsed.run.suite or "all"
        _, summary = runner.run_validation(parsed, suite, parsed.run.seed, parsed.run.workers)
    except SplittingTreeError as exc:
        raise _domain_error(exc)
    except Exception:
        logger.exception("validation suite failed to run")
        raise HTTPException(status_code=500, detail="Validation suite failed to run.")

    saved = False
    if save:
        try:
            _CONFIGS_DIR.mkdir(parents=True, exist_ok=True)
            output_path = _CONFIGS_DIR / f"report_{suite}_{parsed.run.seed}.json"
            with open(output_path, "w", encoding="utf-8") as fh:
                json.dump(summary, fh, indent=2)
            logger.info("Saved report to %s", output_path)
            saved = True
        except Exception:
            logger.exception("Failed to save report for suite=%s", suite)
    return {**summary, "saved": saved}


@router.post("/estimate", response_model=AlphaEstimate)
async def estimate(
    abundance_file: UploadFile = File(..., description="JSON list of fractions, CSV or whitespace abundance table"),
) -> AlphaEstimate:
    try:
        file_bytes = await abundance_file.read()
    except Exception:
        raise HTTPException(status_code=422, detail="Failed to read uploaded file.")
    finally:
        await abundance_file.close()

    try:
        return runner.estimate_from_bytes(abundance_file.filename or "", file_bytes)
    except SplittingTreeError as exc:
        raise _domain_error(exc)
    except Exception:
        logger.exception("estimate failed for %s", abundance_file.filename)
        raise HTTPException(status_code=500, detail="Estimation failed.")
