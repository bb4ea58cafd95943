"""
classify – decide whether an effect is separable or entangled.

2x2 effects get a definite verdict from the partial transpose; other
dimensions are certified Entangled (negative partial transpose or a
violating seesaw setting) or reported Inconclusive.
"""

from __future__ import annotations

import argparse
from typing import Any

from app.commands.common import CommandOutput, as_effect, fmt, setting_summary, tolerances
from app.dual_chsh import DEFAULT_MAX_ITERS, DEFAULT_RESTARTS
from app.operator_io import load
from app.separability import DualChshEvidence, Evidence, PptEvidence, SeparableDecomposition, classify_effect


def register(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("classify", parents=parents, help="classify an effect as separable or entangled")
    parser.add_argument("effect", help="effect/observable file or fixture:<name>")
    parser.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    parser.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS)
    parser.add_argument("--seed", type=int, default=None)


def _evidence(item: Evidence) -> dict[str, Any]:
    if isinstance(item, PptEvidence):
        return {"type": "ppt", "min_eigenvalue": item.min_eigenvalue, "normalization": item.normalization}
    if isinstance(item, DualChshEvidence):
        return {
            "type": "dual_chsh",
            "d_value": item.d_value,
            "method": item.method,
            "flipped": item.flipped,
            "setting": setting_summary(item.setting),
        }
    assert isinstance(item, SeparableDecomposition)
    return {"type": "separable_decomposition", "terms": len(item.terms), "total_weight": item.total_weight}


def run(args: argparse.Namespace) -> CommandOutput:
    obj, record = load(args.effect)
    result = classify_effect(as_effect(obj), restarts=args.restarts, max_iters=args.max_iters, seed=args.seed)
    results = {
        "verdict": result.verdict.value,
        "max_d": result.max_d,
        "violates_dual_chsh": result.violates_dual_chsh,
        "keep_probability": result.keep_probability,
        "min_pt_eigenvalue": result.min_pt_eigenvalue,
        "evidence": [_evidence(e) for e in result.evidence],
    }
    lines = [
        f"verdict: {result.verdict.value}",
        f"max_d: {fmt(result.max_d)}  violates_dual_chsh: {str(result.violates_dual_chsh).lower()}",
        f"min_pt_eigenvalue: {fmt(result.min_pt_eigenvalue)}  keep_probability: {fmt(result.keep_probability)}",
    ]
    lines.extend(f"evidence: {e['type']}" for e in results["evidence"])
    config = {
        "seed": args.seed,
        "restarts": args.restarts,
        "max_iters": args.max_iters,
        "tolerances": tolerances(),
    }
    return CommandOutput([record], config, results, lines)
