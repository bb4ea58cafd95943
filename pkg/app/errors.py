"""
Exception hierarchy for the dual Bell-CHSH toolkit.

Every error carries the CLI exit code it maps to and the name of the
invariant it reports, so the command boundary can turn any library failure
into a structured message without inspecting the message text.

  - ValidationError (exit 2)  – an input violates a documented invariant
  - NoConvergence   (exit 3)  – a numerical search ended before converging
"""

from __future__ import annotations


class DualBellError(Exception):
    """Base class for all toolkit errors."""

    exit_code: int = 1
    invariant: str = "unspecified"

    def __init__(self, detail: str, *, invariant: str | None = None) -> None:
        super().__init__(detail)
        self.detail = detail
        if invariant is not None:
            self.invariant = invariant

    def to_dict(self) -> dict:
        return {
            "error": type(self).__name__,
            "invariant": self.invariant,
            "detail": self.detail,
        }


class ValidationError(DualBellError):
    exit_code = 2
    invariant = "validation"


class NotHermitian(ValidationError):
    invariant = "hermitian"


class DimMismatch(ValidationError):
    invariant = "dimension_consistency"


class MissingSplit(ValidationError):
    invariant = "bipartite_split_present"


class NotQubit(ValidationError):
    invariant = "qubit_dimension"


class NotTwoQubit(ValidationError):
    invariant = "two_qubit_dimension"


class BlochNormExceeded(ValidationError):
    invariant = "bloch_norm_le_1"


class ProbabilityOutOfRange(ValidationError):
    invariant = "probability_in_unit_interval"


class DimTooSmall(ValidationError):
    invariant = "dimension_ge_2"


class InvalidSearchBudget(ValidationError):
    invariant = "search_budget_positive"


class TraceConditionViolated(ValidationError):
    invariant = "trace_condition"


class BudgetExceeded(ValidationError):
    invariant = "trace_budget_le_1"


class WrongOutcomeCount(ValidationError):
    invariant = "four_outcomes"


class NotUnitary(ValidationError):
    invariant = "unitary"


class UnsupportedMeasurement(ValidationError):
    invariant = "bell_projector_measurement"


class EmptyCounts(ValidationError):
    invariant = "shots_positive"


class InvalidOperatorFile(ValidationError):
    invariant = "operator_file_schema"


class InvalidState(ValidationError):
    invariant = "state_psd_trace_one"


class InvalidEffect(ValidationError):
    invariant = "effect_between_zero_and_identity"


class InvalidObservable(ValidationError):
    invariant = "observable_sums_to_identity"


class InvalidPovm(ValidationError):
    invariant = "povm_sums_to_identity"


class InvalidNoise(ValidationError):
    invariant = "noise_parameters_in_unit_interval"


class NoConvergence(DualBellError):
    exit_code = 3
    invariant = "seesaw_converged"
