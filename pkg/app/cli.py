"""
Command line: splitting-trees {params,scale,simulate,validate,estimate}.

Exit codes: 0 success, 1 a validation suite failed, 2 bad input or a
numerical failure (any SplittingTreeError).
"""

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

from app.errors import ConfigError, SplittingTreeError
from app.rng import fresh_seed
from app.schemas import RunConfig
from app.services import runner

logger = logging.getLogger(__name__)

_ENV_PATH = Path(__file__).parent.parent / ".env"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="run configuration JSON {model, immigration, run}")
    common.add_argument("--seed", type=int, default=None, help="unsigned 64-bit seed (overrides run.seed)")
    common.add_argument("--reseed", action="store_true", help="draw a fresh seed from OS entropy")
    common.add_argument("--replicates", type=int, default=None, help="number of replicates (overrides run.replicates)")
    common.add_argument("--t", type=float, default=None, help="observation time (overrides run.t)")
    common.add_argument("--out", type=Path, default=None, help="output file (default run.out, else stdout)")
    common.add_argument(
        "--workers",
        type=int,
        default=int(os.environ.get("WORKERS", "1")),
        help="worker processes for replicates (default $WORKERS or 1)",
    )
    common.add_argument("--log-level", default=None, help="logging level (default $LOG_LEVEL or INFO)")

    parser = argparse.ArgumentParser(prog="splitting-trees", description="Splitting trees with Poissonian immigration")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("params", parents=[common], help="print eta, c, m and the extinction probability")
    sub.add_parser("scale", parents=[common], help="tabulate the scale function W as CSV")
    sub.add_parser("simulate", parents=[common], help="simulate the immigration model, one CSV row per family")
    validate = sub.add_parser("validate", parents=[common], help="run a validation suite, JSON report")
    validate.add_argument("--suite", default=None, help="scale, transient, limits, gem, model2, model3, spine, lemmas or all")
    validate.add_argument(
        "--sample-scale", type=float, default=1.0, help="fraction of the full sample sizes (quick runs)"
    )
    estimate = sub.add_parser("estimate", parents=[common], help="estimate theta/b from family fractions")
    estimate.add_argument("input", type=Path, help="JSON list of age-ranked fractions, or an abundance file")
    return parser


def _load_config(args: argparse.Namespace) -> RunConfig:
    if args.config is None:
        if args.command != "validate":
            raise ConfigError([f"'{args.command}' needs --config"])
        raw: dict = {"model": runner.default_config().model.model_dump()}
    else:
        try:
            raw = json.loads(args.config.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError([f"cannot read {args.config}: {exc}"]) from exc
    return runner.parse_config(
        raw,
        args.command,
        seed=args.seed,
        replicates=args.replicates,
        t=args.t,
        suite=getattr(args, "suite", None),
        workers=args.workers,
    )


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")
        logger.info("wrote %s", out)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _seed(args: argparse.Namespace, config: RunConfig) -> int:
    if args.reseed:
        seed = fresh_seed()
        logger.info("reseeded: seed=%d", seed)
        return seed
    return config.run.seed


def run(args: argparse.Namespace) -> int:
    if args.command == "estimate":
        try:
            data = args.input.read_bytes()
        except OSError as exc:
            raise ConfigError([f"cannot read {args.input}: {exc}"]) from exc
        estimate = runner.estimate_from_bytes(args.input.name, data)
        _emit(json.dumps(estimate.model_dump(), indent=2) + "\n", args.out)
        return 0

    config = _load_config(args)
    workers = config.run.workers
    out = args.out if args.out is not None else (Path(config.run.out) if config.run.out else None)

    if args.command == "params":
        _emit(json.dumps(runner.params_payload(config), indent=2) + "\n", out)
        return 0

    if args.command == "scale":
        rows = [[runner.format_number(x) for x in row] for row in runner.scale_rows(config)]
        _emit(_csv(runner.SCALE_COLUMNS, rows), out)
        return 0

    if args.command == "simulate":
        snapshots = runner.simulate_snapshots(config, _seed(args, config), workers)
        _emit(_csv(runner.SIMULATE_COLUMNS, runner.simulate_rows(snapshots)), out)
        return 0

    suite = config.run.suite or "all"
    _, summary = runner.run_validation(config, suite, _seed(args, config), workers, args.sample_scale)
    _emit(json.dumps(summary, indent=2) + "\n", out)
    return 0 if summary["passed"] else 1


def main(argv: Optional[list[str]] = None) -> int:
    load_dotenv(dotenv_path=_ENV_PATH)
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=(args.log_level or os.environ.get("LOG_LEVEL", "INFO")).upper())
    try:
        return run(args)
    except SplittingTreeError as exc:
        print(f"splitting-trees: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
