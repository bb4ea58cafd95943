"""
simulate – shot-based dual Bell-CHSH experiment on two qubits.

Runs the 16 preparations per setting under the chosen noise model and
reports the D estimate, its standard error, the exact expectation under the
same noise and the raw counts. ``--calibrate TARGET`` first solves for the
depolarizing strength whose exact D equals TARGET and simulates with it.
"""

from __future__ import annotations

import argparse

from app.commands.common import CommandOutput, fmt, tolerances
from app.dual_chsh import ChshSetting
from app.errors import ValidationError
from app.experiment_sim import (
    HARDWARE_MIXED_BELL_PROBS,
    NoiseModel,
    bell_histogram,
    calibrate_depolarizing,
    exact_noisy_d,
    run_dual_chsh_experiment,
    write_histogram_csv,
)
from app.operator_io import load

DEFAULT_SHOTS = 100_000


def register(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("simulate", parents=parents, help="simulate the shot-based experiment")
    parser.add_argument("settings", nargs="*", default=["fixture:violating_setting"],
                        help="setting files (default: fixture:violating_setting)")
    parser.add_argument("--shots", type=int, default=DEFAULT_SHOTS, help="shots per preparation")
    parser.add_argument("--noise-p", type=float, default=0.0, help="per-qubit depolarizing probability")
    parser.add_argument("--readout-flip", type=float, default=0.0, help="per-bit readout flip probability")
    parser.add_argument("--calibrate", type=float, default=None, metavar="TARGET_D",
                        help="solve for --noise-p so the exact noisy D equals TARGET_D")
    parser.add_argument("--mixture", action="store_true",
                        help="prepare 1/2 as an equal mixture of |0> and |1>")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--histogram", default=None, metavar="CSV",
                        help="write Bell-outcome counts of the completely mixed preparation")


def run(args: argparse.Namespace) -> CommandOutput:
    inputs, rows, lines = [], [], []
    calibrated = None
    for index, path in enumerate(args.settings):
        setting, record = load(path)
        if not isinstance(setting, ChshSetting):
            raise ValidationError(f"{path} is not a setting file", invariant="setting_file_kind")
        inputs.append(record)
        noise_p = args.noise_p
        if args.calibrate is not None:
            noise_p = calibrate_depolarizing(setting, args.calibrate, readout_flip=args.readout_flip)
            calibrated = noise_p
        noise = NoiseModel(noise_p, args.readout_flip)
        estimate = run_dual_chsh_experiment(
            setting, args.shots, noise, seed=args.seed + 16 * index,
            mixture_preparation=args.mixture, workers=args.workers,
        )
        expected = exact_noisy_d(setting, noise)
        rows.append({
            "path": record.path,
            "d_estimate": estimate.value,
            "std_error": estimate.std_error,
            "exact_noisy_d": expected,
            "depolarizing_p": noise_p,
            "target_outcome": estimate.target_outcome,
            "per_term": [{"e": e, "std_error": err} for e, err in estimate.per_term],
            "counts": [
                {"preparation": list(r.label), "term": list(r.term), "seed": r.seed, **r.counts.to_dict()}
                for r in estimate.records
            ],
        })
        lines.append(
            f"{record.path}: D = {fmt(estimate.value)} +- {fmt(estimate.std_error)}"
            f"  (exact {fmt(expected)}, p = {fmt(noise_p)})"
        )

    results: dict = {"settings": rows}
    if args.histogram:
        noise = NoiseModel(calibrated if calibrated is not None else args.noise_p, args.readout_flip)
        counts = bell_histogram(args.shots, noise, seed=args.seed, mixture_preparation=args.mixture)
        write_histogram_csv(counts, args.histogram)
        results["histogram"] = {
            "path": args.histogram,
            **counts.to_dict(),
            "hardware_reference": dict(HARDWARE_MIXED_BELL_PROBS),
        }
        lines.append("histogram: " + "  ".join(
            f"{label}={fmt(counts.frequency(label))}" for label in counts.counts
        ))

    config = {
        "seed": args.seed,
        "shots_per_setting": args.shots,
        "noise_p": args.noise_p,
        "readout_flip": args.readout_flip,
        "calibrate": args.calibrate,
        "mixture_preparation": args.mixture,
        "workers": args.workers,
        "tolerances": tolerances(),
    }
    return CommandOutput(inputs, config, results, lines)
