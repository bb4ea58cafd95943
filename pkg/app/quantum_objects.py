"""
Validated quantum objects and the generalized Born rule.

States, effects, binary observables and POVMs are immutable wrappers around
OperatorMatrix whose constructors enforce the physical invariants within
TOL_VALID. Everything downstream (D values, classifiers, the simulator)
assumes those invariants and does not re-check them.

Conventions:
  - Pauli ordering (sigma_x, sigma_y, sigma_z), indexed 1..3 in T matrices.
  - Bell vectors  Phi+- = (|00> +- |11>)/sqrt2,  Psi+- = (|01> +- |10>)/sqrt2,
    always listed in the order (Phi+, Phi-, Psi+, Psi-).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from app.errors import (
    BlochNormExceeded,
    DimMismatch,
    InvalidEffect,
    InvalidObservable,
    InvalidPovm,
    InvalidState,
    NotQubit,
    ProbabilityOutOfRange,
)
from app.linalg_core import (
    OperatorMatrix,
    eigvalsh,
    hermitian_eig,
    kron,
    psd_inverse_sqrt,
)

logger = logging.getLogger("dualbell.quantum_objects")

# Eigenvalue / trace slack for validation; sits above eigensolver error.
TOL_VALID = 1e-9

SQRT2 = np.sqrt(2.0)

IDENTITY2 = OperatorMatrix.identity(2)
SIGMA_X = OperatorMatrix([[0, 1], [1, 0]])
SIGMA_Y = OperatorMatrix([[0, -1j], [1j, 0]])
SIGMA_Z = OperatorMatrix([[1, 0], [0, -1]])
PAULIS: tuple[OperatorMatrix, OperatorMatrix, OperatorMatrix] = (SIGMA_X, SIGMA_Y, SIGMA_Z)

BELL_LABELS: tuple[str, str, str, str] = ("phi_plus", "phi_minus", "psi_plus", "psi_minus")

_BELL_VECTORS = {
    "phi_plus": np.array([1, 0, 0, 1]) / SQRT2,
    "phi_minus": np.array([1, 0, 0, -1]) / SQRT2,
    "psi_plus": np.array([0, 1, 1, 0]) / SQRT2,
    "psi_minus": np.array([0, 1, -1, 0]) / SQRT2,
}


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class QuantumState:
    """Density operator: Hermitian, PSD and unit trace within TOL_VALID."""

    op: OperatorMatrix

    def __post_init__(self) -> None:
        op = OperatorMatrix.of(self.op)
        if not op.is_hermitian(TOL_VALID):
            raise InvalidState(f"state is not Hermitian (gap {op.hermiticity_gap():.3e})")
        op = op.hermitian_part()
        tr = op.trace().real
        if abs(tr - 1.0) > TOL_VALID:
            raise InvalidState(f"state trace is {tr:.12g}, expected 1")
        lowest = float(eigvalsh(op)[-1])
        if lowest < -TOL_VALID:
            raise InvalidState(f"state has negative eigenvalue {lowest:.3e}")
        object.__setattr__(self, "op", op)

    @property
    def dim(self) -> int:
        return self.op.dim

    @property
    def dims_split(self) -> tuple[int, int] | None:
        return self.op.dims_split


@dataclass(frozen=True, eq=False)
class Effect:
    """Operator X with 0 <= X <= 1 (eigenvalues within TOL_VALID of [0, 1])."""

    op: OperatorMatrix

    def __post_init__(self) -> None:
        op = OperatorMatrix.of(self.op)
        if not op.is_hermitian(TOL_VALID):
            raise InvalidEffect(f"effect is not Hermitian (gap {op.hermiticity_gap():.3e})")
        op = op.hermitian_part()
        values = eigvalsh(op)
        if values[-1] < -TOL_VALID or values[0] > 1 + TOL_VALID:
            raise InvalidEffect(
                f"effect spectrum [{values[-1]:.6g}, {values[0]:.6g}] leaves [0, 1]"
            )
        object.__setattr__(self, "op", op)

    @property
    def dim(self) -> int:
        return self.op.dim

    @property
    def dims_split(self) -> tuple[int, int] | None:
        return self.op.dims_split

    def trace(self) -> float:
        return self.op.trace().real

    def complement(self) -> "Effect":
        return Effect(OperatorMatrix.identity(self.dim, self.dims_split) - self.op)


@dataclass(frozen=True, eq=False)
class BinaryObservable:
    """Two-outcome observable {M_1, M_-1} with M_1 + M_-1 = 1.

    ``keep_probability`` records the postprocessing applied by
    renormalize_effect (1.0 when the observable was not renormalized).
    """

    m_plus: Effect
    m_minus: Effect
    keep_probability: float = 1.0

    def __post_init__(self) -> None:
        if self.m_plus.dim != self.m_minus.dim:
            raise DimMismatch("observable outcomes have different dimensions")
        total = self.m_plus.op + self.m_minus.op
        gap = total.max_abs_diff(np.eye(self.dim))
        if gap > TOL_VALID:
            raise InvalidObservable(f"M_1 + M_-1 deviates from identity by {gap:.3e}")

    @classmethod
    def from_effect(cls, m_plus: Effect, keep_probability: float = 1.0) -> "BinaryObservable":
        return cls(m_plus, m_plus.complement(), keep_probability)

    @property
    def dim(self) -> int:
        return self.m_plus.dim

    @property
    def dims_split(self) -> tuple[int, int] | None:
        return self.m_plus.dims_split or self.m_minus.dims_split

    @property
    def expectation_operator(self) -> OperatorMatrix:
        """M = M_1 - M_-1 = 2 M_1 - 1."""
        return self.m_plus.op - self.m_minus.op

    def flipped(self) -> "BinaryObservable":
        """Swap the outcome labels; D changes sign."""
        return BinaryObservable(self.m_minus, self.m_plus, self.keep_probability)


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    @classmethod
    def of(cls, values: Iterable[float]) -> "BlochVector":
        x, y, z = (float(v) for v in values)
        return cls(x, y, z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))


@dataclass(frozen=True, eq=False)
class Povm:
    """Ordered list of effects summing to the identity."""

    effects: tuple[Effect, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        effects = tuple(self.effects)
        if not effects:
            raise InvalidPovm("a POVM needs at least one effect")
        dim = effects[0].dim
        if any(e.dim != dim for e in effects):
            raise DimMismatch("POVM elements have different dimensions")
        total = np.sum([e.op.entries for e in effects], axis=0)
        gap = float(np.max(np.abs(total - np.eye(dim))))
        if gap > TOL_VALID:
            raise InvalidPovm(f"POVM elements sum to identity only within {gap:.3e}")
        object.__setattr__(self, "effects", effects)

    def __len__(self) -> int:
        return len(self.effects)

    def __iter__(self):
        return iter(self.effects)

    @property
    def dim(self) -> int:
        return self.effects[0].dim


# ---------------------------------------------------------------------------
# Born rule and standard objects
# ---------------------------------------------------------------------------

def born_probability(state: QuantumState, effect: Effect) -> float:
    """tr(rho E), clamped to [0, 1] after a TOL_VALID sanity check."""
    if state.dim != effect.dim:
        raise DimMismatch(f"state dimension {state.dim} vs effect dimension {effect.dim}")
    p = float(np.real(np.trace(state.op.entries @ effect.op.entries)))
    if p < -TOL_VALID or p > 1 + TOL_VALID:
        raise ProbabilityOutOfRange(f"Born probability {p:.12g} outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def maximally_mixed(d: int, dims_split: tuple[int, int] | None = None) -> QuantumState:
    """Completely mixed state 1/d."""
    if d < 1:
        raise DimMismatch(f"dimension must be positive, got {d}")
    return QuantumState(OperatorMatrix(np.eye(d) / d, dims_split))


def pure_state(vector: np.ndarray, dims_split: tuple[int, int] | None = None) -> QuantumState:
    v = np.asarray(vector, dtype=complex).reshape(-1)
    return QuantumState(OperatorMatrix.projector(v / np.linalg.norm(v), dims_split))


def bell_vectors() -> dict[str, np.ndarray]:
    return {label: vec.astype(complex) for label, vec in _BELL_VECTORS.items()}


def bell_states() -> tuple[QuantumState, QuantumState, QuantumState, QuantumState]:
    """Phi+, Phi-, Psi+, Psi- as two-qubit density operators."""
    return tuple(pure_state(_BELL_VECTORS[label], (2, 2)) for label in BELL_LABELS)  # type: ignore[return-value]


def bell_projector(label: str) -> Effect:
    if label not in _BELL_VECTORS:
        raise KeyError(f"unknown Bell label {label!r}; expected one of {BELL_LABELS}")
    return Effect(OperatorMatrix.projector(_BELL_VECTORS[label], (2, 2)))


def bell_povm() -> Povm:
    return Povm(tuple(bell_projector(label) for label in BELL_LABELS))


def product_state(rho_a: QuantumState, rho_b: QuantumState) -> QuantumState:
    return QuantumState(kron(rho_a.op, rho_b.op))


# ---------------------------------------------------------------------------
# Bloch vectors
# ---------------------------------------------------------------------------

def bloch_to_state(r: BlochVector) -> QuantumState:
    """rho = (1 + r.sigma)/2 for |r| <= 1."""
    if r.norm > 1 + TOL_VALID:
        raise BlochNormExceeded(f"Bloch vector norm {r.norm:.12g} exceeds 1")
    op = IDENTITY2 + r.x * SIGMA_X + r.y * SIGMA_Y + r.z * SIGMA_Z
    return QuantumState(op / 2)


def state_to_bloch(rho: QuantumState) -> BlochVector:
    if rho.dim != 2:
        raise NotQubit(f"Bloch vectors need a qubit state, got dimension {rho.dim}")
    return BlochVector.of(np.real(np.vdot(p.entries, rho.op.entries)) for p in PAULIS)


# ---------------------------------------------------------------------------
# Postprocessing and decompositions
# ---------------------------------------------------------------------------

def satisfies_trace_condition(m: BinaryObservable) -> bool:
    """tr(M_1) <= 1 or tr(M_-1) <= 1 (TOL_VALID slack)."""
    return m.m_plus.trace() <= 1 + TOL_VALID or m.m_minus.trace() <= 1 + TOL_VALID


def renormalize_effect(m: BinaryObservable) -> BinaryObservable:
    """Coarse-grain so the trace condition holds.

    Outcome +1 is kept with probability p = 1/tr(M_1) and flipped to -1
    otherwise, giving M'_1 = M_1 / tr(M_1). Observables already satisfying
    the condition are returned unchanged.
    """
    if satisfies_trace_condition(m):
        return m
    tr_plus = m.m_plus.trace()
    p = 1.0 / tr_plus
    logger.debug('{"event":"renormalize_effect","trace_m_plus":%.12g,"keep_probability":%.12g}', tr_plus, p)
    return BinaryObservable.from_effect(Effect(m.m_plus.op * p), keep_probability=m.keep_probability * p)


def rank_one_decomposition(effect: Effect) -> list[tuple[float, OperatorMatrix]]:
    """Spectral split M = sum_i lambda_i E_i into rank-1 projectors.

    The weights sum to tr(M), so the trace condition on M_1 holds exactly
    when they sum to at most one.
    """
    values, vectors = hermitian_eig(effect.op)
    terms = []
    for k, lam in enumerate(values):
        if lam > TOL_VALID:
            terms.append((float(lam), OperatorMatrix.projector(vectors[:, k], effect.dims_split)))
    return terms


# ---------------------------------------------------------------------------
# Random objects (seeded through a numpy Generator)
# ---------------------------------------------------------------------------

def random_pure_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-like unit vector from a normalized complex Gaussian."""
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_pure_state(d: int, rng: np.random.Generator) -> QuantumState:
    return pure_state(random_pure_vector(d, rng))


def random_state(d: int, rng: np.random.Generator, rank: int | None = None) -> QuantumState:
    """Ginibre-ensemble density matrix of the given rank (full rank by default)."""
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    rho = g @ g.conj().T
    return QuantumState(OperatorMatrix(rho / np.trace(rho).real))


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / SQRT2
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_effect(
    d: int,
    rng: np.random.Generator,
    dims_split: tuple[int, int] | None = None,
) -> Effect:
    """Effect with a Haar-random eigenbasis and eigenvalues uniform on [0, 1]."""
    u = random_unitary(d, rng)
    spectrum = rng.uniform(0.0, 1.0, size=d)
    return Effect(OperatorMatrix((u * spectrum) @ u.conj().T, dims_split))


def random_povm(
    n_outcomes: int,
    d: int,
    rng: np.random.Generator,
    dims_split: tuple[int, int] | None = None,
) -> Povm:
    """Random positive operators G_i symmetrized as S^{-1/2} G_i S^{-1/2}, S = sum G_i."""
    grams = []
    for _ in range(n_outcomes):
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        grams.append(OperatorMatrix(g @ g.conj().T))
    total = grams[0]
    for g in grams[1:]:
        total = total + g
    root = psd_inverse_sqrt(total)
    return Povm(tuple(
        Effect(OperatorMatrix((root @ g @ root).hermitian_part().entries, dims_split)) for g in grams
    ))
