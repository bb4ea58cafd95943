"""
teleport – usefulness of a 4-outcome two-qubit POVM for teleportation.
"""

from __future__ import annotations

import argparse

import numpy as np

from app.commands.common import CommandOutput, fmt, matrix_list, tolerances
from app.errors import ValidationError
from app.operator_io import load
from app.quantum_objects import Povm
from app.teleportation import (
    average_fidelity_mc,
    dual_chsh_link_details,
    max_average_fidelity,
    standard_bell_corrections,
    t_matrices,
)


def register(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("teleport", parents=parents, help="teleportation fidelity of a POVM")
    parser.add_argument("povm", help="POVM file or fixture:<name>")
    parser.add_argument("--mc-samples", type=int, default=0,
                        help="Monte Carlo cross-check with this many inputs (0 skips it)")
    parser.add_argument("--corrections", choices=["standard", "identity"], default="standard",
                        help="feedback unitaries for the Monte Carlo check")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--workers", type=int, default=1)


def run(args: argparse.Namespace) -> CommandOutput:
    povm, record = load(args.povm)
    if not isinstance(povm, Povm):
        raise ValidationError(f"{args.povm} is not a POVM file", invariant="povm_file_kind")
    report = max_average_fidelity(povm)
    links = dual_chsh_link_details(povm)
    results = {
        "f_max": report.f_max,
        "useful": report.useful,
        "threshold_margin": report.threshold_margin,
        "per_outcome_nuclear_norms": list(report.per_outcome_nuclear_norms),
        "t_matrices": [matrix_list(t) for t in t_matrices(povm)],
        "dual_chsh_link": [
            {
                "outcome": link.label,
                "max_d": link.max_d,
                "violates": link.violates,
                "nuclear_norm": link.nuclear_norm,
                "keep_probability": link.keep_probability,
            }
            for link in links
        ],
    }
    lines = [
        f"f_max: {fmt(report.f_max)}  useful: {str(report.useful).lower()}  margin: {fmt(report.threshold_margin)}",
        "nuclear norms: " + ", ".join(fmt(n) for n in report.per_outcome_nuclear_norms),
        "dual CHSH violated: " + ", ".join(str(link.violates).lower() for link in links),
    ]
    if args.mc_samples > 0:
        unitaries = standard_bell_corrections() if args.corrections == "standard" else (np.eye(2),) * 4
        mean, err = average_fidelity_mc(povm, unitaries, args.mc_samples, seed=args.seed, workers=args.workers)
        results["monte_carlo"] = {"estimate": mean, "std_error": err, "corrections": args.corrections}
        lines.append(f"monte carlo ({args.corrections}): {fmt(mean)} +- {fmt(err)}")
    config = {
        "seed": args.seed,
        "mc_samples": args.mc_samples,
        "corrections": args.corrections,
        "workers": args.workers,
        "tolerances": tolerances(),
    }
    return CommandOutput([record], config, results, lines)
