"""
renormalize – coarse-grain an observable so that tr(M_1) <= 1.

Writes the rescaled observable as an operator file when --out is given and
reports the keep probability p = 1/tr(M_1).
"""

from __future__ import annotations

import argparse

from app.commands.common import CommandOutput, as_effect, fmt, tolerances
from app.operator_io import load, save
from app.quantum_objects import BinaryObservable, renormalize_effect


def register(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("renormalize", parents=parents, help="rescale an observable to satisfy the trace condition")
    parser.add_argument("effect", help="effect/observable file or fixture:<name>")
    parser.add_argument("--out", default=None, help="write the renormalized observable here")


def run(args: argparse.Namespace) -> CommandOutput:
    obj, record = load(args.effect)
    original = BinaryObservable.from_effect(as_effect(obj))
    observable = renormalize_effect(original)
    results = {
        "trace_before": original.m_plus.trace(),
        "trace_after": observable.m_plus.trace(),
        "keep_probability": observable.keep_probability,
        "changed": observable is not original,
    }
    lines = [
        f"tr(M_1): {fmt(results['trace_before'])} -> {fmt(results['trace_after'])}",
        f"keep_probability: {fmt(observable.keep_probability)}",
    ]
    if args.out:
        written = save(observable, args.out, {"keep_probability": repr(observable.keep_probability)})
        results["output"] = written.to_dict()
        lines.append(f"written: {written.path}")
    return CommandOutput([record], {"seed": None, "tolerances": tolerances()}, results, lines)
