"""
validate.py – End-to-end validation of the dualbell CLI against golden outputs.

Usage:
    python scripts/validate.py              # run all scenarios
    python scripts/validate.py --scenario 2 # run a specific scenario

Each scenario is an operator or setting file whose metadata names the
command to run. The CLI runs in-process with --output, the RunReport is
checked against the report schema, and the dotted paths listed in the
matching golden output are compared within its tolerance.
"""

from __future__ import annotations

import argparse
import json
import sys
import tempfile
from pathlib import Path
from typing import Any

import jsonschema

ROOT = Path(__file__).resolve().parent.parent
SCENARIOS_DIR = ROOT / "scripts" / "scenarios"
GOLDEN_DIR = ROOT / "scripts" / "golden_outputs"

sys.path.insert(0, str(ROOT))
from app.main import main as cli_main  # noqa: E402
from app.schemas import RUN_REPORT_SCHEMA  # noqa: E402


def discover_scenarios(only: int | None = None) -> list[Path]:
    """Return sorted list of scenario JSON files."""
    files = sorted(SCENARIOS_DIR.glob("scenario_*.json"))
    if only is not None:
        files = [f for f in files if f.name.startswith(f"scenario_{only}_")]
    if not files:
        print(f"ERROR: No scenario files found in {SCENARIOS_DIR}")
        sys.exit(1)
    return files


def lookup(report: dict, dotted: str) -> Any:
    node: Any = report
    for part in dotted.split("."):
        node = node[int(part)] if isinstance(node, list) else node[part]
    return node


def compare(report: dict, golden: dict) -> list[str]:
    """Compare golden expectations with the report. Returns errors."""
    errors: list[str] = []
    tol = float(golden.get("tolerance", 1e-9))
    for path, expected in golden["expected"].items():
        try:
            actual = lookup(report, path)
        except (KeyError, IndexError, ValueError):
            errors.append(f"{path} missing from report")
            continue
        if isinstance(expected, bool) or isinstance(expected, str):
            if actual != expected:
                errors.append(f"{path} = {actual!r}, expected {expected!r}")
        elif abs(float(actual) - float(expected)) > tol:
            errors.append(f"{path} = {actual!r}, expected {expected!r} (tol {tol:g})")
    return errors


def run_scenario(scenario_file: Path) -> tuple[bool, str]:
    """Run one scenario through the CLI. Returns (passed, message)."""
    doc = json.loads(scenario_file.read_text(encoding="utf-8"))
    command = doc.get("metadata", {}).get("command")
    golden_file = GOLDEN_DIR / scenario_file.name
    if not command:
        return False, "scenario metadata has no command"
    if not golden_file.exists():
        return False, f"no golden output {golden_file.name}"

    with tempfile.TemporaryDirectory() as tmp:
        report_path = Path(tmp) / "report.json"
        code = cli_main([command, str(scenario_file), "--output", str(report_path)])
        if code != 0:
            return False, f"exit code {code}"
        report = json.loads(report_path.read_text(encoding="utf-8"))

    try:
        jsonschema.validate(instance=report, schema=RUN_REPORT_SCHEMA)
    except jsonschema.ValidationError as exc:
        return False, f"Schema validation: {exc.message}"
    errors = compare(report, json.loads(golden_file.read_text(encoding="utf-8")))
    if errors:
        return False, "; ".join(errors)
    return True, f"{command} OK"


def main() -> None:
    parser = argparse.ArgumentParser(description="Validate dualbell scenarios against golden outputs")
    parser.add_argument("--scenario", type=int, default=None, help="Run only scenario N")
    args = parser.parse_args()

    scenarios = discover_scenarios(args.scenario)
    print(f"Running {len(scenarios)} scenario(s)\n")

    results: list[tuple[str, bool, str]] = []
    for sf in scenarios:
        passed, msg = run_scenario(sf)
        results.append((sf.stem, passed, msg))

    # ── Summary table ────────────────────────────────────────────────────────
    print(f"\n{'Scenario':<36} {'Result':<8} Details")
    print("-" * 80)
    for name, passed, msg in results:
        status = "PASS" if passed else "FAIL"
        print(f"{name:<36} {status:<8} {msg}")

    failures = sum(1 for _, p, _ in results if not p)
    print(f"\n{len(results) - failures}/{len(results)} passed")
    sys.exit(1 if failures else 0)


if __name__ == "__main__":
    main()
