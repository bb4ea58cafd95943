"""
Teleportation usefulness of a four-outcome two-qubit POVM {A_i}.

Alice measures the unknown qubit together with her half of |Phi+>, Bob
applies U_i on outcome i. With T_i the correlation matrix of A_i the best
average fidelity over all corrections is

    F_max = (1 + sum_i ||T_i||_1 / 12) / 2

and the measurement beats the classical 2/3 exactly when sum_i ||T_i||_1 > 4.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from app.dual_chsh import LOCAL_BOUND, max_d_qubit, t_matrix
from app.errors import NotTwoQubit, NotUnitary, ValidationError, WrongOutcomeCount
from app.linalg_core import RealMatrix3, nuclear_norm
from app.quantum_objects import (
    SIGMA_X,
    SIGMA_Z,
    TOL_VALID,
    BinaryObservable,
    Effect,
    Povm,
    bell_vectors,
    renormalize_effect,
)
from app.telemetry import get_tracer

logger = logging.getLogger("dualbell.teleportation")

CLASSICAL_FIDELITY = 2.0 / 3.0
# sum_i ||T_i||_1 at which F_max reaches 2/3.
USEFULNESS_THRESHOLD = 4.0
MC_CHUNK = 4096


@dataclass(frozen=True)
class FidelityReport:
    f_max: float
    per_outcome_nuclear_norms: tuple[float, float, float, float]
    useful: bool
    threshold_margin: float


@dataclass(frozen=True)
class OutcomeLink:
    """Dual CHSH maximum of one renormalized outcome next to its T-matrix trace norm."""

    label: int
    max_d: float
    nuclear_norm: float
    keep_probability: float

    @property
    def violates(self) -> bool:
        return self.max_d > LOCAL_BOUND + TOL_VALID


def _two_qubit_effects(povm: Povm) -> tuple[Effect, ...]:
    if len(povm) != 4:
        raise WrongOutcomeCount(f"teleportation needs a 4-outcome POVM, got {len(povm)}")
    effects = []
    for effect in povm:
        if effect.dim != 4 or effect.dims_split not in (None, (2, 2)):
            raise NotTwoQubit(f"POVM element has dimension {effect.dim} split {effect.dims_split}")
        effects.append(Effect(effect.op.with_split((2, 2))))
    return tuple(effects)


def t_matrices(povm: Povm) -> tuple[RealMatrix3, RealMatrix3, RealMatrix3, RealMatrix3]:
    return tuple(t_matrix(effect).t for effect in _two_qubit_effects(povm))  # type: ignore[return-value]


def max_average_fidelity(povm: Povm) -> FidelityReport:
    norms = tuple(nuclear_norm(t) for t in t_matrices(povm))
    total = float(sum(norms))
    margin = total - USEFULNESS_THRESHOLD
    report = FidelityReport(
        f_max=0.5 * (1.0 + total / 12.0),
        per_outcome_nuclear_norms=norms,  # type: ignore[arg-type]
        useful=margin > TOL_VALID,
        threshold_margin=margin,
    )
    logger.info('{"event":"max_average_fidelity","f_max":%.9g,"margin":%.9g}', report.f_max, margin)
    return report


def standard_bell_corrections() -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Corrections 1, Z, X, ZX for the outcome order Phi+, Phi-, Psi+, Psi-."""
    z, x = SIGMA_Z.entries, SIGMA_X.entries
    return (np.eye(2, dtype=complex), z.copy(), x.copy(), z @ x)


def _checked_unitaries(unitaries: Sequence[np.ndarray]) -> list[np.ndarray]:
    if len(unitaries) != 4:
        raise WrongOutcomeCount(f"need one correction per outcome, got {len(unitaries)}")
    checked = []
    for k, u in enumerate(unitaries):
        arr = np.asarray(u, dtype=complex)
        if arr.shape != (2, 2):
            raise NotUnitary(f"correction {k} has shape {arr.shape}, expected (2, 2)")
        gap = float(np.max(np.abs(arr @ arr.conj().T - np.eye(2))))
        if gap > TOL_VALID:
            raise NotUnitary(f"correction {k} deviates from unitarity by {gap:.3e}")
        checked.append(arr)
    return checked


def sample_bloch_sphere(n: int, rng: np.random.Generator) -> np.ndarray:
    """n uniformly distributed pure qubit vectors (rows), via normalized 3D Gaussians."""
    g = rng.normal(size=(n, 3))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    theta = np.arccos(np.clip(g[:, 2], -1.0, 1.0))
    phi = np.arctan2(g[:, 1], g[:, 0])
    return np.stack([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)], axis=1)


def teleported_fidelities(
    effects: Sequence[np.ndarray],
    unitaries: Sequence[np.ndarray],
    inputs: np.ndarray,
) -> np.ndarray:
    """sum_i p_i <phi|rho_i|phi> for each input row phi.

    p_i rho_i = U_i tr_{12}[(A_i (x) 1)(|phi><phi| (x) |Phi+><Phi+|)] U_i^dagger,
    with Alice's qubits first.
    """
    resource = bell_vectors()["phi_plus"].reshape(2, 2)
    # psi[s, p, c]: sample s, Alice pair index p = 2a + b, Bob qubit c.
    psi = np.einsum("sa,bc->sabc", inputs, resource).reshape(len(inputs), 4, 2)
    fidelities = np.zeros(len(inputs))
    for a_i, u_i in zip(effects, unitaries):
        bob = np.einsum("pq,sqc,spd->scd", a_i, psi, psi.conj())
        rotated = np.einsum("ce,sef,df->scd", u_i, bob, u_i.conj())
        fidelities += np.real(np.einsum("sc,scd,sd->s", inputs.conj(), rotated, inputs))
    return fidelities


def average_fidelity_mc(
    povm: Povm,
    feedback_unitaries: Sequence[np.ndarray],
    n_samples: int,
    seed: int = 0,
    workers: int = 1,
) -> tuple[float, float]:
    """Monte Carlo average fidelity with its standard error.

    Samples are drawn in chunks of MC_CHUNK, chunk k from
    ``default_rng([seed, k])``, so results do not depend on ``workers``.
    """
    effects = [e.op.entries for e in _two_qubit_effects(povm)]
    unitaries = _checked_unitaries(feedback_unitaries)
    if n_samples < 1:
        raise ValidationError(f"n_samples must be positive, got {n_samples}")
    sizes = [min(MC_CHUNK, n_samples - start) for start in range(0, n_samples, MC_CHUNK)]

    def run(k: int) -> np.ndarray:
        rng = np.random.default_rng([seed, k])
        return teleported_fidelities(effects, unitaries, sample_bloch_sphere(sizes[k], rng))

    with get_tracer().start_as_current_span(
        "average_fidelity_mc", attributes={"n_samples": n_samples, "seed": seed}
    ):
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                chunks = list(pool.map(run, range(len(sizes))))
        else:
            chunks = [run(k) for k in range(len(sizes))]

    values = np.concatenate(chunks)
    mean = float(np.mean(values))
    std_error = float(np.std(values, ddof=1) / np.sqrt(n_samples)) if n_samples > 1 else 0.0
    logger.info('{"event":"average_fidelity_mc","mean":%.9g,"std_error":%.3g,"n":%d}', mean, std_error, n_samples)
    return mean, std_error


def dual_chsh_link_details(povm: Povm) -> tuple[OutcomeLink, ...]:
    links = []
    for k, effect in enumerate(_two_qubit_effects(povm)):
        observable = renormalize_effect(BinaryObservable.from_effect(effect))
        report = max_d_qubit(observable.m_plus)
        norm = nuclear_norm(t_matrix(observable.m_plus).t)
        link = OutcomeLink(k, report.max_d, norm, observable.keep_probability)
        if link.violates and norm <= 1 + TOL_VALID:
            logger.error('{"event":"link_inconsistent","outcome":%d,"max_d":%.12g,"nuclear_norm":%.12g}',
                         k, link.max_d, norm)
        links.append(link)
    return tuple(links)


def dual_chsh_link(povm: Povm) -> tuple[bool, bool, bool, bool]:
    """Per outcome: does the renormalized effect violate the dual CHSH inequality?"""
    return tuple(link.violates for link in dual_chsh_link_details(povm))  # type: ignore[return-value]
