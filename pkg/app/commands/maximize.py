"""
maximize – largest D an effect reaches over all local states.

Two-qubit effects report the closed form and, next to it, the seesaw
value as a cross-check; other dimensions use the seesaw alone.
"""

from __future__ import annotations

import argparse

from app.commands.common import CommandOutput, as_effect, fmt, report_summary, tolerances
from app.dual_chsh import (
    DEFAULT_MAX_ITERS,
    DEFAULT_RESTARTS,
    DEFAULT_TOL,
    LOCAL_BOUND,
    max_d_qubit,
    maximize_d_seesaw,
)
from app.errors import NoConvergence, TraceConditionViolated
from app.operator_io import load
from app.quantum_objects import TOL_VALID, BinaryObservable, renormalize_effect, satisfies_trace_condition


def register(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("maximize", parents=parents, help="maximize D over local states")
    parser.add_argument("effect", help="effect/observable file or fixture:<name>")
    parser.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    parser.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS)
    parser.add_argument("--tol", type=float, default=DEFAULT_TOL)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--renormalize", action="store_true",
                        help="rescale M_1 by 1/tr(M_1) when the trace condition fails")


def run(args: argparse.Namespace) -> CommandOutput:
    obj, record = load(args.effect)
    observable = BinaryObservable.from_effect(as_effect(obj))
    if not satisfies_trace_condition(observable):
        if not args.renormalize:
            raise TraceConditionViolated("tr(M_1) > 1 and tr(M_-1) > 1; pass --renormalize")
        observable = renormalize_effect(observable)

    seesaw = maximize_d_seesaw(
        observable, restarts=args.restarts, max_iters=args.max_iters, tol=args.tol,
        seed=args.seed, workers=args.workers,
    )
    if args.strict and not seesaw.converged:
        raise NoConvergence(f"seesaw did not converge within {args.max_iters} sweeps (best D {seesaw.max_d:.9g})")

    results = {"keep_probability": observable.keep_probability, "seesaw": report_summary(seesaw)}
    lines = []
    if observable.dims_split == (2, 2):
        closed = max_d_qubit(observable.m_plus)
        results["closed_form"] = report_summary(closed)
        results["max_d"] = closed.max_d
        results["agreement"] = abs(closed.max_d - seesaw.max_d)
        lines.append(f"max_d (closed form): {fmt(closed.max_d)}")
    else:
        results["max_d"] = seesaw.max_d
    lines.append(f"max_d (seesaw): {fmt(seesaw.max_d)}  converged: {str(seesaw.converged).lower()}")
    lines.append(f"violates: {str(results['max_d'] > LOCAL_BOUND + TOL_VALID).lower()}")
    config = {
        "seed": args.seed,
        "restarts": args.restarts,
        "max_iters": args.max_iters,
        "tol": args.tol,
        "workers": args.workers,
        "renormalize": args.renormalize,
        "tolerances": tolerances(),
    }
    return CommandOutput([record], config, results, lines)
