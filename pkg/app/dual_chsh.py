"""
The dual Bell-CHSH quantity D and its maxima.

For a bipartite binary observable M = 2 M_1 - 1 and local state pairs
(rho^A_0, rho^A_1), (rho^B_0, rho^B_1):

    E(rho^A, rho^B, M) = (alpha_dA alpha_dB / 2) tr[(rho^A - 1/dA) (x) (rho^B - 1/dB) M]
    D = E00 + E01 + E10 - E11

Separable observables satisfying the trace condition obey |D| <= 2. Two-qubit
effects have the closed-form maximum 2 sqrt(s1^2 + s2^2) in terms of the top
singular values of their correlation matrix T; other dimensions go through
an alternating (seesaw) ascent over the four states.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal

import numpy as np

from app.errors import DimMismatch, DimTooSmall, InvalidSearchBudget, NotTwoQubit, TraceConditionViolated
from app.linalg_core import (
    OperatorMatrix,
    RealMatrix3,
    kron,
    operator_norm,
    real_matrix3,
    singular_values,
    top_eigenvector,
)
from app.quantum_objects import (
    PAULIS,
    TOL_VALID,
    BinaryObservable,
    BlochVector,
    Effect,
    QuantumState,
    bloch_to_state,
    random_pure_vector,
    satisfies_trace_condition,
)
from app.telemetry import get_tracer

logger = logging.getLogger("dualbell.dual_chsh")

# Sign pattern of the CHSH combination, indexed [i][j].
CHSH_SIGNS = np.array([[1.0, 1.0], [1.0, -1.0]])

DEFAULT_RESTARTS = 16
DEFAULT_MAX_ITERS = 200
DEFAULT_TOL = 1e-10

# |D| bound for separable observables, and the quantum maximum.
LOCAL_BOUND = 2.0
DUAL_TSIRELSON_BOUND = 2.0 * np.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class ChshSetting:
    rho_a: tuple[QuantumState, QuantumState]
    rho_b: tuple[QuantumState, QuantumState]
    observable: BinaryObservable

    def __post_init__(self) -> None:
        rho_a, rho_b = tuple(self.rho_a), tuple(self.rho_b)
        if len(rho_a) != 2 or len(rho_b) != 2:
            raise DimMismatch("a setting needs exactly two states per side")
        d_a, d_b = rho_a[0].dim, rho_b[0].dim
        if rho_a[1].dim != d_a or rho_b[1].dim != d_b:
            raise DimMismatch("states on the same side have different dimensions")
        _check_observable_split(self.observable, d_a, d_b)
        object.__setattr__(self, "rho_a", rho_a)
        object.__setattr__(self, "rho_b", rho_b)

    @property
    def dims(self) -> tuple[int, int]:
        return self.rho_a[0].dim, self.rho_b[0].dim


@dataclass(frozen=True, eq=False)
class TMatrix:
    """t^{nm} = tr(sigma_n (x) sigma_m M_1) of a two-qubit effect."""

    t: RealMatrix3

    def __post_init__(self) -> None:
        t = real_matrix3(self.t)
        peak = float(np.max(np.abs(t)))
        if peak > 1 + TOL_VALID:
            # Soft check: |t^{nm}| <= 1 holds for effects with tr(M_1) <= 1 only.
            logger.debug('{"event":"t_matrix_entry_above_one","max_abs":%.12g}', peak)
        object.__setattr__(self, "t", t)

    def singular_values(self) -> np.ndarray:
        return singular_values(self.t)


@dataclass(frozen=True, eq=False)
class MaxDReport:
    max_d: float
    optimal_setting: ChshSetting
    method: Literal["closed_form", "seesaw"]
    iterations: int
    converged: bool

    @property
    def violates(self) -> bool:
        return self.max_d > LOCAL_BOUND + TOL_VALID


def _check_observable_split(m: BinaryObservable, d_a: int, d_b: int) -> None:
    split = m.dims_split
    if split is None:
        if m.dim != d_a * d_b:
            raise DimMismatch(f"observable dimension {m.dim} does not match {d_a}x{d_b} states")
    elif split != (d_a, d_b):
        raise DimMismatch(f"observable split {split} does not match states {d_a}x{d_b}")


def _centered(rho: QuantumState) -> np.ndarray:
    return rho.op.entries - np.eye(rho.dim) / rho.dim


# ---------------------------------------------------------------------------
# Differences from ignorance and D
# ---------------------------------------------------------------------------

def alpha(d: int) -> float:
    """alpha_d = d / (d - 1)."""
    if d < 2:
        raise DimTooSmall(f"alpha_d needs d >= 2, got {d}")
    return d / (d - 1)


def difference_from_ignorance(rho: QuantumState, m: BinaryObservable) -> float:
    """E(rho, M) = alpha_d tr[(rho - 1/d) M] / 2, which lies in [-1, 1]."""
    if rho.dim != m.dim:
        raise DimMismatch(f"state dimension {rho.dim} vs observable dimension {m.dim}")
    value = alpha(rho.dim) * np.trace(_centered(rho) @ m.expectation_operator.entries) / 2
    return float(np.real(value))


def bipartite_difference(rho_a: QuantumState, rho_b: QuantumState, m: BinaryObservable) -> float:
    """E(rho^A, rho^B, M) = (alpha_A alpha_B / 2) tr[(rho^A - 1/dA)(x)(rho^B - 1/dB) M]."""
    d_a, d_b = rho_a.dim, rho_b.dim
    _check_observable_split(m, d_a, d_b)
    centered = np.kron(_centered(rho_a), _centered(rho_b))
    value = alpha(d_a) * alpha(d_b) / 2 * np.trace(centered @ m.expectation_operator.entries)
    return float(np.real(value))


def e_terms(setting: ChshSetting) -> np.ndarray:
    """The four E values indexed [i][j]."""
    return np.array([
        [bipartite_difference(setting.rho_a[i], setting.rho_b[j], setting.observable) for j in range(2)]
        for i in range(2)
    ])


def d_value(setting: ChshSetting) -> float:
    """D = E00 + E01 + E10 - E11."""
    return float(np.sum(CHSH_SIGNS * e_terms(setting)))


def check_trace_condition(m: BinaryObservable) -> bool:
    return satisfies_trace_condition(m)


def qubit_setting(
    a: tuple[BlochVector, BlochVector],
    b: tuple[BlochVector, BlochVector],
    observable: BinaryObservable,
) -> ChshSetting:
    """Setting from Bloch vectors a_0, a_1 (Alice) and b_0, b_1 (Bob)."""
    return ChshSetting(
        (bloch_to_state(a[0]), bloch_to_state(a[1])),
        (bloch_to_state(b[0]), bloch_to_state(b[1])),
        observable,
    )


# ---------------------------------------------------------------------------
# Two-qubit closed form
# ---------------------------------------------------------------------------

def _require_two_qubit(m1: Effect) -> None:
    if m1.dim != 4 or m1.dims_split not in (None, (2, 2)):
        raise NotTwoQubit(f"expected a 2x2 effect, got dimension {m1.dim} split {m1.dims_split}")


def t_matrix(m1: Effect) -> TMatrix:
    """Correlation matrix t^{nm} = tr(sigma_n (x) sigma_m M_1)."""
    _require_two_qubit(m1)
    t = np.array([
        [np.real(np.trace(kron(sn, sm).entries @ m1.op.entries)) for sm in PAULIS]
        for sn in PAULIS
    ])
    return TMatrix(t)


def effect_bloch_decomposition(m1: Effect) -> tuple[np.ndarray, np.ndarray, TMatrix]:
    """(r, s, T) of M_1 = (tr(M_1) 1(x)1 + r.sigma(x)1 + 1(x)s.sigma + sum t^{nm} sigma_n(x)sigma_m) / 4."""
    _require_two_qubit(m1)
    identity = OperatorMatrix.identity(2)
    r = np.array([np.real(np.trace(kron(s, identity).entries @ m1.op.entries)) for s in PAULIS])
    s_vec = np.array([np.real(np.trace(kron(identity, s).entries @ m1.op.entries)) for s in PAULIS])
    return r, s_vec, t_matrix(m1)


def max_d_qubit(m1: Effect) -> MaxDReport:
    """Closed-form maximum of D over all states: 2 sqrt(s1^2 + s2^2).

    The achieving setting uses the singular value decomposition T = U S V^T:
    b_0,1 = cos(theta) v1 +- sin(theta) v2 with tan(theta) = s2/s1, and
    a_0 = u1, a_1 = u2.
    """
    _require_two_qubit(m1)
    observable = BinaryObservable.from_effect(Effect(m1.op.with_split((2, 2))))
    if not satisfies_trace_condition(observable):
        raise TraceConditionViolated(
            f"tr(M_1) = {observable.m_plus.trace():.9g} and tr(M_-1) = {observable.m_minus.trace():.9g} "
            "both exceed 1; renormalize first"
        )
    t = t_matrix(m1).t
    u, s, vt = np.linalg.svd(t)
    theta = np.arctan2(s[1], s[0])
    b0 = np.cos(theta) * vt[0] + np.sin(theta) * vt[1]
    b1 = np.cos(theta) * vt[0] - np.sin(theta) * vt[1]
    setting = qubit_setting(
        (BlochVector.of(u[:, 0]), BlochVector.of(u[:, 1])),
        (BlochVector.of(b0), BlochVector.of(b1)),
        observable,
    )
    max_d = 2.0 * float(np.sqrt(s[0] ** 2 + s[1] ** 2))
    return MaxDReport(max_d=max_d, optimal_setting=setting, method="closed_form", iterations=0, converged=True)


# ---------------------------------------------------------------------------
# Seesaw for arbitrary dimensions
# ---------------------------------------------------------------------------

def check_search_budget(restarts: int, max_iters: int) -> None:
    if restarts < 1:
        raise InvalidSearchBudget(f"restarts must be at least 1, got {restarts}")
    if max_iters < 1:
        raise InvalidSearchBudget(f"max_iters must be at least 1, got {max_iters}")


def _top_projector(k: np.ndarray) -> np.ndarray:
    _, v = top_eigenvector(OperatorMatrix((k + k.conj().T) / 2))
    return np.outer(v, v.conj())


def _seesaw_objective(m1: np.ndarray, ca: list[np.ndarray], cb: list[np.ndarray], scale: float) -> float:
    total = 0.0
    for i in range(2):
        for j in range(2):
            total += CHSH_SIGNS[i, j] * np.real(np.trace(np.kron(ca[i], cb[j]) @ m1))
    return scale * total


def _seesaw_run(
    m1: np.ndarray,
    d_a: int,
    d_b: int,
    rng: np.random.Generator,
    max_iters: int,
    tol: float,
    history: list[float] | None = None,
) -> tuple[float, list[np.ndarray], list[np.ndarray], int, bool]:
    """One restart of the alternating ascent; returns (D, rho_a, rho_b, sweeps, converged).

    ``history``, when given, receives D at the start and after every sweep.
    """
    scale = alpha(d_a) * alpha(d_b)
    eye_a, eye_b = np.eye(d_a) / d_a, np.eye(d_b) / d_b
    blocks = m1.reshape(d_a, d_b, d_a, d_b)
    rho_a = [np.outer(v, v.conj()) for v in (random_pure_vector(d_a, rng) for _ in range(2))]
    rho_b = [np.outer(v, v.conj()) for v in (random_pure_vector(d_b, rng) for _ in range(2))]
    current = _seesaw_objective(m1, [r - eye_a for r in rho_a], [r - eye_b for r in rho_b], scale)
    if history is not None:
        history.append(current)

    for sweep in range(1, max_iters + 1):
        # D is linear in each state, so each partial maximum is a top-eigenvector projector.
        cb = [r - eye_b for r in rho_b]
        for i in range(2):
            y = CHSH_SIGNS[i, 0] * cb[0] + CHSH_SIGNS[i, 1] * cb[1]
            rho_a[i] = _top_projector(np.einsum("ijkl,lj->ik", blocks, y))
        ca = [r - eye_a for r in rho_a]
        for j in range(2):
            x = CHSH_SIGNS[0, j] * ca[0] + CHSH_SIGNS[1, j] * ca[1]
            rho_b[j] = _top_projector(np.einsum("ijkl,ki->jl", blocks, x))
        updated = _seesaw_objective(m1, ca, [r - eye_b for r in rho_b], scale)
        if history is not None:
            history.append(updated)
        if abs(updated - current) < tol:
            return updated, rho_a, rho_b, sweep, True
        current = updated
    return current, rho_a, rho_b, max_iters, False


def maximize_d_seesaw(
    m: BinaryObservable,
    restarts: int = DEFAULT_RESTARTS,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    dims: tuple[int, int] | None = None,
    workers: int = 1,
) -> MaxDReport:
    """Best D over ``restarts`` seeded alternating ascents from random pure states.

    Each restart draws from its own stream ``default_rng([seed, restart])`` so
    the result does not depend on ``workers``. A non-converged best restart is
    returned with ``converged=False`` rather than raised.
    """
    if not satisfies_trace_condition(m):
        raise TraceConditionViolated("seesaw maximization needs tr(M_1) <= 1 or tr(M_-1) <= 1")
    split = dims or m.dims_split
    if split is None:
        raise DimMismatch("observable has no dims_split; pass dims=(d_A, d_B)")
    check_search_budget(restarts, max_iters)
    d_a, d_b = split
    _check_observable_split(m, d_a, d_b)
    m1 = m.m_plus.op.entries

    def run(restart: int):
        return _seesaw_run(m1, d_a, d_b, np.random.default_rng([seed, restart]), max_iters, tol)

    with get_tracer().start_as_current_span(
        "maximize_d_seesaw", attributes={"dims": f"{d_a}x{d_b}", "restarts": restarts, "seed": seed}
    ):
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(run, range(restarts)))
        else:
            results = [run(k) for k in range(restarts)]

    best_index = int(np.argmax([r[0] for r in results]))
    best_d, rho_a, rho_b, sweeps, converged = results[best_index]
    for k, r in enumerate(results):
        logger.debug('{"event":"seesaw_restart","restart":%d,"d":%.12g,"sweeps":%d,"converged":%s}',
                     k, r[0], r[3], str(r[4]).lower())
    if not converged:
        logger.warning('{"event":"seesaw_not_converged","best_d":%.12g,"max_iters":%d}', best_d, max_iters)

    observable = m if m.dims_split == (d_a, d_b) else BinaryObservable(
        Effect(m.m_plus.op.with_split((d_a, d_b))),
        Effect(m.m_minus.op.with_split((d_a, d_b))),
        m.keep_probability,
    )
    setting = ChshSetting(
        tuple(QuantumState(OperatorMatrix(r)) for r in rho_a),
        tuple(QuantumState(OperatorMatrix(r)) for r in rho_b),
        observable,
    )
    return MaxDReport(
        max_d=float(best_d),
        optimal_setting=setting,
        method="seesaw",
        iterations=sweeps,
        converged=converged,
    )


# ---------------------------------------------------------------------------
# Dual Tsirelson bound
# ---------------------------------------------------------------------------

def chsh_state_operator(
    rho_a: tuple[QuantumState, QuantumState],
    rho_b: tuple[QuantumState, QuantumState],
) -> OperatorMatrix:
    """S = sum_ij (-1)^{ij} alpha_A alpha_B (rho^A_i - 1/dA) (x) (rho^B_j - 1/dB)."""
    d_a, d_b = rho_a[0].dim, rho_b[0].dim
    if rho_a[1].dim != d_a or rho_b[1].dim != d_b:
        raise DimMismatch("states on the same side have different dimensions")
    scale = alpha(d_a) * alpha(d_b)
    total = np.zeros((d_a * d_b, d_a * d_b), dtype=complex)
    for i in range(2):
        for j in range(2):
            total += CHSH_SIGNS[i, j] * np.kron(_centered(rho_a[i]), _centered(rho_b[j]))
    return OperatorMatrix(scale * total, (d_a, d_b))


def dual_tsirelson(
    rho_a: tuple[QuantumState, QuantumState],
    rho_b: tuple[QuantumState, QuantumState],
) -> float:
    """sqrt(||S^2||): bounds |D| over observables meeting the trace condition."""
    s = chsh_state_operator(rho_a, rho_b)
    return float(np.sqrt(operator_norm(s @ s)))

