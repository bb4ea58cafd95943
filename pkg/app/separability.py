"""
Positivity classifiers for bipartite operators and the effect classifier.

Three cones, from smallest to largest:
  separable positive (sum of positive products)  ->  positive  ->  POPT
(positive on pure tensors). The classifier combines the partial-transpose
test, which decides separability on 2x2 after trace normalization, with
the dual Bell-CHSH bound, which certifies entanglement in any dimension.
Outside 2x2 the classifier is one-sided: it issues Entangled certificates
or says Inconclusive, never Separable.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from app.dual_chsh import (
    DEFAULT_MAX_ITERS,
    DEFAULT_RESTARTS,
    LOCAL_BOUND,
    ChshSetting,
    check_search_budget,
    max_d_qubit,
    maximize_d_seesaw,
)
from app.errors import BudgetExceeded, DimMismatch, ValidationError
from app.linalg_core import (
    OperatorMatrix,
    bottom_eigenvector,
    contract_subsystem,
    kron,
    min_eigenvalue,
    partial_transpose,
)
from app.quantum_objects import (
    TOL_VALID,
    BinaryObservable,
    Effect,
    random_pure_vector,
    renormalize_effect,
)
from app.telemetry import get_tracer

logger = logging.getLogger("dualbell.separability")

DEFAULT_POPT_RESTARTS = 32


class Verdict(str, enum.Enum):
    SEPARABLE = "Separable"
    ENTANGLED = "Entangled"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class PptEvidence:
    """Negative eigenvalue of the partial transpose of M_1 / tr(M_1)."""

    min_eigenvalue: float
    normalization: float


@dataclass(frozen=True, eq=False)
class DualChshEvidence:
    """A setting whose D exceeds 2; ``flipped`` means the outcomes were swapped."""

    d_value: float
    setting: ChshSetting
    method: str
    flipped: bool = False


@dataclass(frozen=True, eq=False)
class SeparableDecomposition:
    """M_1 = sum_i lambda_i P^A_i (x) P^B_i with rank-1 projectors and sum lambda_i <= 1."""

    terms: tuple[tuple[float, Effect, Effect], ...]

    def __post_init__(self) -> None:
        terms = tuple(self.terms)
        weights = [lam for lam, _, _ in terms]
        if any(lam < 0 for lam in weights):
            raise ValidationError("separable decomposition weights must be nonnegative")
        if sum(weights) > 1 + TOL_VALID:
            raise BudgetExceeded(f"decomposition weights sum to {sum(weights):.12g} > 1")
        object.__setattr__(self, "terms", terms)

    @property
    def total_weight(self) -> float:
        return float(sum(lam for lam, _, _ in self.terms))

    def reconstruct(self) -> OperatorMatrix:
        d_a, d_b = self.terms[0][1].dim, self.terms[0][2].dim
        total = np.zeros((d_a * d_b, d_a * d_b), dtype=complex)
        for lam, p_a, p_b in self.terms:
            total += lam * np.kron(p_a.op.entries, p_b.op.entries)
        return OperatorMatrix(total, (d_a, d_b))


Evidence = Union[PptEvidence, DualChshEvidence, SeparableDecomposition]


@dataclass(frozen=True, eq=False)
class Classification:
    verdict: Verdict
    evidence: tuple[Evidence, ...] = field(default_factory=tuple)
    max_d: float | None = None
    violates_dual_chsh: bool | None = None
    keep_probability: float = 1.0
    min_pt_eigenvalue: float | None = None

    def __post_init__(self) -> None:
        if self.verdict is Verdict.ENTANGLED and not self.evidence:
            raise ValidationError("an Entangled verdict must carry evidence")


# ---------------------------------------------------------------------------
# Positivity tests
# ---------------------------------------------------------------------------

def is_positive(x: OperatorMatrix) -> bool:
    """X >= 0 within TOL_VALID."""
    return min_eigenvalue(x) >= -TOL_VALID


def ppt_check(x: OperatorMatrix) -> tuple[bool, float]:
    """(partial transpose is positive, its minimum eigenvalue)."""
    x.require_split()
    lowest = min_eigenvalue(partial_transpose(x, "B"))
    return lowest >= -TOL_VALID, lowest


def _product_expectation(x: OperatorMatrix, psi: np.ndarray, phi: np.ndarray) -> float:
    v = np.kron(psi, phi)
    return float(np.real(np.vdot(v, x.entries @ v)))


def popt_min(
    x: OperatorMatrix,
    restarts: int = DEFAULT_POPT_RESTARTS,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = 1e-12,
    seed: int = 0,
) -> float:
    """Heuristic min of <psi (x) phi|X|psi (x) phi> over unit vectors.

    Alternates bottom-eigenvector updates on each side; the result is an
    upper bound on the true minimum (local minima are possible).
    """
    check_search_budget(restarts, max_iters)
    d_a, d_b = x.require_split()
    best = np.inf
    for restart in range(restarts):
        rng = np.random.default_rng([seed, restart])
        phi = random_pure_vector(d_b, rng)
        current = np.inf
        for _ in range(max_iters):
            _, psi = bottom_eigenvector(contract_subsystem(x, OperatorMatrix.projector(phi), keep="A"))
            value, phi = bottom_eigenvector(contract_subsystem(x, OperatorMatrix.projector(psi), keep="B"))
            if abs(current - value) < tol:
                current = value
                break
            current = value
        best = min(best, _product_expectation(x, psi, phi))
    logger.debug('{"event":"popt_min","dims":"%dx%d","value":%.12g}', d_a, d_b, best)
    return float(best)


# ---------------------------------------------------------------------------
# Effect classification
# ---------------------------------------------------------------------------

def classify_effect(
    m1: Effect,
    restarts: int = DEFAULT_RESTARTS,
    max_iters: int = DEFAULT_MAX_ITERS,
    seed: int = 0,
) -> Classification:
    """Decision cascade for the +1 effect of a binary observable.

    1. renormalize so the trace condition holds;
    2. 2x2: PPT decides; the closed-form max D is reported alongside;
    3. otherwise: NPT => Entangled; seesaw D > 2 => Entangled with the
       setting as witness; else Inconclusive.
    """
    check_search_budget(restarts, max_iters)
    split = m1.op.require_split()
    observable = renormalize_effect(BinaryObservable.from_effect(m1))
    effect = observable.m_plus
    normalization = effect.trace()

    with get_tracer().start_as_current_span("classify_effect", attributes={"dims": f"{split[0]}x{split[1]}"}):
        ppt_ok, lowest = ppt_check(effect.op)
        evidence: list[Evidence] = []
        if not ppt_ok:
            scale = normalization if normalization > TOL_VALID else 1.0
            evidence.append(PptEvidence(min_eigenvalue=lowest / scale, normalization=normalization))

        if split == (2, 2):
            report = max_d_qubit(effect)
            if report.violates:
                evidence.append(DualChshEvidence(report.max_d, report.optimal_setting, report.method))
            verdict = Verdict.SEPARABLE if ppt_ok else Verdict.ENTANGLED
            max_d = report.max_d
        else:
            # D(flipped M) = -D(M), so the two ascents bound |D| from both sides.
            forward = maximize_d_seesaw(observable, restarts=restarts, max_iters=max_iters, seed=seed)
            backward = maximize_d_seesaw(observable.flipped(), restarts=restarts, max_iters=max_iters, seed=seed)
            flipped = backward.max_d > forward.max_d
            best = backward if flipped else forward
            max_d = best.max_d
            if best.violates:
                evidence.append(DualChshEvidence(best.max_d, best.optimal_setting, best.method, flipped))
            verdict = Verdict.ENTANGLED if evidence else Verdict.INCONCLUSIVE

    violates = max_d > LOCAL_BOUND + TOL_VALID
    logger.info(
        '{"event":"classify_effect","dims":"%dx%d","verdict":"%s","max_d":%.9g,"min_pt_eigenvalue":%.9g}',
        split[0], split[1], verdict.value, max_d, lowest,
    )
    return Classification(
        verdict=verdict,
        evidence=tuple(evidence),
        max_d=max_d,
        violates_dual_chsh=violates,
        keep_probability=observable.keep_probability,
        min_pt_eigenvalue=lowest,
    )


# ---------------------------------------------------------------------------
# Separable effects by construction
# ---------------------------------------------------------------------------

def separable_effect_from_terms(
    terms: Sequence[tuple[float, np.ndarray, np.ndarray]],
) -> tuple[Effect, SeparableDecomposition]:
    """Build sum_i lambda_i |a_i><a_i| (x) |b_i><b_i| from (lambda, a, b) triples."""
    if not terms:
        raise ValidationError("need at least one term")
    built = []
    for lam, vec_a, vec_b in terms:
        a = np.asarray(vec_a, dtype=complex)
        b = np.asarray(vec_b, dtype=complex)
        p_a = Effect(OperatorMatrix.projector(a / np.linalg.norm(a)))
        p_b = Effect(OperatorMatrix.projector(b / np.linalg.norm(b)))
        built.append((float(lam), p_a, p_b))
    dims = {(p_a.dim, p_b.dim) for _, p_a, p_b in built}
    if len(dims) != 1:
        raise DimMismatch(f"terms mix local dimensions {sorted(dims)}")
    decomposition = SeparableDecomposition(tuple(built))
    return Effect(decomposition.reconstruct()), decomposition


def random_separable_effect(
    dims: tuple[int, int],
    n_terms: int,
    trace_budget: float = 1.0,
    seed: int = 0,
) -> tuple[Effect, SeparableDecomposition]:
    """Random rank-1 product projectors with simplex weights scaled to ``trace_budget``."""
    if trace_budget > 1:
        raise BudgetExceeded(f"trace_budget {trace_budget} exceeds 1")
    if trace_budget < 0 or n_terms < 1:
        raise ValidationError("need trace_budget >= 0 and n_terms >= 1")
    d_a, d_b = dims
    rng = np.random.default_rng(seed)
    weights = rng.dirichlet(np.ones(n_terms)) * trace_budget
    terms = [(w, random_pure_vector(d_a, rng), random_pure_vector(d_b, rng)) for w in weights]
    return separable_effect_from_terms(terms)


def product_effect(p_a: Effect, p_b: Effect) -> Effect:
    return Effect(kron(p_a.op, p_b.op))
