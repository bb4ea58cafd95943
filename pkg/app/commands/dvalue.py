"""
dvalue – evaluate D, the four E terms and the trace condition for setting files.
"""

from __future__ import annotations

import argparse

from app.commands.common import CommandOutput, fmt, tolerances
from app.dual_chsh import ChshSetting, check_trace_condition, d_value, dual_tsirelson, e_terms
from app.errors import ValidationError
from app.operator_io import load


def register(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("dvalue", parents=parents, help="evaluate D for one or more setting files")
    parser.add_argument("settings", nargs="+", help="setting file or fixture:<name>")


def run(args: argparse.Namespace) -> CommandOutput:
    inputs, rows, lines = [], [], []
    for path in args.settings:
        setting, record = load(path)
        if not isinstance(setting, ChshSetting):
            raise ValidationError(f"{path} is not a setting file", invariant="setting_file_kind")
        inputs.append(record)
        e = e_terms(setting)
        d = d_value(setting)
        trace_ok = check_trace_condition(setting.observable)
        bound = dual_tsirelson(setting.rho_a, setting.rho_b)
        rows.append({
            "path": record.path,
            "d": d,
            "e_terms": [float(e[0, 0]), float(e[0, 1]), float(e[1, 0]), float(e[1, 1])],
            "trace_condition": trace_ok,
            "dual_tsirelson": bound,
        })
        lines.append(
            f"{record.path}: D = {fmt(d)}  E = ({', '.join(fmt(x) for x in e.reshape(-1))})"
            f"  trace_condition = {'ok' if trace_ok else 'violated'}  dual_tsirelson = {fmt(bound)}"
        )
    return CommandOutput(inputs, {"seed": None, "tolerances": tolerances()}, {"settings": rows}, lines)
