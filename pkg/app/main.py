"""
dualbell CLI – dispatcher for the sub-commands in app/commands/.

Human-readable results go to stdout with 9 significant digits; ``--json``
prints the full-precision RunReport instead and ``--output PATH`` writes it
to a file. Failures print {"error", "invariant", "detail"} on stdout.

Exit codes:
  0  success
  2  validation error (bad file, violated invariant)
  3  seesaw did not converge (only with --strict)
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from app import __version__
from app.commands import COMMANDS
from app.commands.common import CommandOutput
from app.errors import DualBellError
from app.schemas import RUN_REPORT_SCHEMA
from app.telemetry import configure_telemetry, get_tracer, new_run_id

logger = logging.getLogger("dualbell.cli")

# ---------------------------------------------------------------------------
# Configuration (env vars)
# ---------------------------------------------------------------------------
SEED_ENV = "DUALBELL_SEED"
FALLBACK_SEED = 1234


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV, str(FALLBACK_SEED))
    try:
        return int(raw)
    except ValueError:
        logger.warning('{"event":"bad_seed_env","value":"%s","fallback":%d}', raw, FALLBACK_SEED)
        return FALLBACK_SEED


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    shared.add_argument("--output", default=None, metavar="PATH", help="write the RunReport JSON here")
    shared.add_argument("--json", action="store_true", help="print the RunReport JSON instead of text")
    shared.add_argument("--strict", action="store_true", help="exit 3 when a seesaw search did not converge")

    parser = argparse.ArgumentParser(
        prog="dualbell",
        description="Entanglement of effects via the dual Bell-CHSH inequality.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for module in COMMANDS.values():
        module.register(subparsers, [shared])
    return parser


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def _jsonable(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def build_report(command: str, run_id: str, output: CommandOutput) -> dict:
    report = {
        "command": command,
        "run_id": run_id,
        "inputs": [record.to_dict() for record in output.inputs],
        "config": output.config,
        "results": output.results,
        "version": __version__,
    }
    report = json.loads(json.dumps(report, default=_jsonable))
    jsonschema.validate(instance=report, schema=RUN_REPORT_SCHEMA)
    return report


def _emit(report: dict, output: CommandOutput, args: argparse.Namespace) -> None:
    if args.output:
        Path(args.output).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        for line in output.lines:
            print(line)


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_telemetry(log_level="DEBUG" if args.verbose else None)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    if hasattr(args, "seed") and args.seed is None:
        args.seed = default_seed()

    run_id = new_run_id()
    attributes = {"run_id": run_id}
    if getattr(args, "seed", None) is not None:
        attributes["seed"] = args.seed

    with get_tracer().start_as_current_span(f"cmd_{args.command}", attributes=attributes):
        try:
            output = COMMANDS[args.command].run(args)
        except DualBellError as exc:
            logger.error(
                '{"event":"command_failed","run_id":"%s","command":"%s","error":"%s","invariant":"%s"}',
                run_id, args.command, type(exc).__name__, exc.invariant,
            )
            print(json.dumps(exc.to_dict()))
            return exc.exit_code

    report = build_report(args.command, run_id, output)
    _emit(report, output, args)
    logger.info('{"event":"command_complete","run_id":"%s","command":"%s"}', run_id, args.command)
    return 0


if __name__ == "__main__":
    sys.exit(main())
