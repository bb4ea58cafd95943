"""
Helpers shared by the sub-commands: output container, number formatting,
serialization of settings and the tolerance block recorded in every report.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from app.dual_chsh import ChshSetting, MaxDReport
from app.errors import InvalidEffect
from app.linalg_core import TOL_HERM
from app.operator_io import InputRecord, Loaded, to_document
from app.quantum_objects import TOL_VALID, BinaryObservable, Effect, state_to_bloch


@dataclass
class CommandOutput:
    inputs: list[InputRecord]
    config: dict[str, Any]
    results: dict[str, Any]
    lines: list[str] = field(default_factory=list)


def fmt(x: float) -> str:
    """Nine significant digits."""
    return f"{x:.9g}"


def tolerances() -> dict[str, float]:
    return {"hermitian": TOL_HERM, "validity": TOL_VALID}


def as_effect(obj: Loaded) -> Effect:
    """M_1 of an effect or observable file."""
    if isinstance(obj, Effect):
        return obj
    if isinstance(obj, BinaryObservable):
        return obj.m_plus
    raise InvalidEffect(f"expected an effect or observable file, got {type(obj).__name__}")


def setting_summary(setting: ChshSetting) -> dict[str, Any]:
    """Bloch vectors for qubit settings, full operator documents otherwise."""
    if setting.dims == (2, 2):
        return {
            "bloch_a": [state_to_bloch(r).as_array().tolist() for r in setting.rho_a],
            "bloch_b": [state_to_bloch(r).as_array().tolist() for r in setting.rho_b],
        }
    return {"document": to_document(setting)}


def report_summary(report: MaxDReport) -> dict[str, Any]:
    return {
        "max_d": report.max_d,
        "method": report.method,
        "iterations": report.iterations,
        "converged": report.converged,
        "violates": report.violates,
        "setting": setting_summary(report.optimal_setting),
    }


def matrix_list(t: np.ndarray) -> list[list[float]]:
    return np.asarray(t, dtype=float).tolist()
