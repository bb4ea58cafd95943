"""
Shot-based simulation of the dual Bell-CHSH experiment on two qubits.

Each E term is estimated from four preparations measured in the Bell basis:

    E = 4 [p(rho^A, rho^B) - p(rho^A, 1/2) - p(1/2, rho^B) + p(1/2, 1/2)]

where p is the frequency of the Bell outcome that plays the role of M_1.
Expanding tr[(rho^A - 1/2)(x)(rho^B - 1/2)(2 M_1 - 1)] gives this estimator;
the -1 part drops out because both factors are traceless. D needs 16
preparations in total.

Noise order: per-qubit depolarizing on the prepared states, then Bell
measurement, then independent readout flips on the two measured bits
before the bits are decoded back to a Bell label.
"""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import optimize

from app.dual_chsh import CHSH_SIGNS, ChshSetting
from app.errors import (
    EmptyCounts,
    InvalidNoise,
    NotQubit,
    ProbabilityOutOfRange,
    UnsupportedMeasurement,
    ValidationError,
)
from app.linalg_core import OperatorMatrix
from app.quantum_objects import (
    BELL_LABELS,
    SQRT2,
    TOL_VALID,
    BinaryObservable,
    QuantumState,
    bell_projector,
    born_probability,
    maximally_mixed,
    product_state,
    pure_state,
)
from app.telemetry import get_tracer

logger = logging.getLogger("dualbell.experiment_sim")

# Completely mixed state measured in the Bell basis on hardware; device
# bias makes these unreproducible by isotropic noise, so they are reference data.
HARDWARE_MIXED_BELL_PROBS: dict[str, float] = {
    "phi_plus": 0.2792,
    "phi_minus": 0.2474,
    "psi_plus": 0.2552,
    "psi_minus": 0.2182,
}
HARDWARE_D_VALUE = 2.573
HARDWARE_D_ERROR = 0.035

# Bits read out after CNOT + Hadamard for each Bell label.
_BELL_BITS: dict[str, tuple[int, int]] = {
    "phi_plus": (0, 0),
    "phi_minus": (1, 0),
    "psi_plus": (0, 1),
    "psi_minus": (1, 1),
}

MIX = "mix"


@dataclass(frozen=True)
class NoiseModel:
    depolarizing_p: float = 0.0
    readout_flip: float = 0.0

    def __post_init__(self) -> None:
        for name in ("depolarizing_p", "readout_flip"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvalidNoise(f"{name} = {value} outside [0, 1]")

    @property
    def is_ideal(self) -> bool:
        return self.depolarizing_p == 0.0 and self.readout_flip == 0.0


@dataclass(frozen=True, eq=False)
class PreparationSetting:
    """One of the 16 preparations; ``label`` is e.g. ('0', 'mix') and ``term`` the (i, j) of its E."""

    rho_a: QuantumState
    rho_b: QuantumState
    label: tuple[str, str]
    term: tuple[int, int]

    def __post_init__(self) -> None:
        if self.rho_a.dim != 2 or self.rho_b.dim != 2:
            raise NotQubit("the simulator prepares qubit states only")


@dataclass(frozen=True)
class ShotCounts:
    counts: dict[str, int]
    shots: int

    def __post_init__(self) -> None:
        if sum(self.counts.values()) != self.shots:
            raise ValidationError(f"counts sum to {sum(self.counts.values())}, expected {self.shots}")

    def frequency(self, outcome: str) -> float:
        if self.shots == 0:
            raise EmptyCounts("no shots recorded")
        return self.counts.get(outcome, 0) / self.shots

    def to_dict(self) -> dict:
        return {"counts": dict(self.counts), "shots": self.shots}


@dataclass(frozen=True)
class SettingRecord:
    label: tuple[str, str]
    term: tuple[int, int]
    seed: int
    counts: ShotCounts


@dataclass(frozen=True)
class DEstimate:
    value: float
    std_error: float
    per_term: tuple[tuple[float, float], ...]
    shots_per_setting: int
    seed: int
    noise: NoiseModel = field(default_factory=NoiseModel)
    target_outcome: str = "phi_minus"
    records: tuple[SettingRecord, ...] = ()


# ---------------------------------------------------------------------------
# Measurement model
# ---------------------------------------------------------------------------

def bell_measure_probs(rho_ab: QuantumState) -> np.ndarray:
    """Born probabilities of (Phi+, Phi-, Psi+, Psi-)."""
    if rho_ab.dim != 4:
        raise NotQubit(f"Bell measurement needs a two-qubit state, got dimension {rho_ab.dim}")
    return np.array([born_probability(rho_ab, bell_projector(label)) for label in BELL_LABELS])


def apply_depolarizing(rho: QuantumState, p: float) -> QuantumState:
    """(1 - p) rho + p 1/2 on a qubit."""
    if rho.dim != 2:
        raise NotQubit(f"depolarizing channel acts on qubits, got dimension {rho.dim}")
    if not 0.0 <= p <= 1.0:
        raise InvalidNoise(f"depolarizing_p = {p} outside [0, 1]")
    return QuantumState((1 - p) * rho.op + p * maximally_mixed(2).op)


def apply_readout_flip(probs: np.ndarray, q: float) -> np.ndarray:
    """Flip each measured bit independently with probability q, then decode."""
    if q == 0.0:
        return np.asarray(probs, dtype=float)
    out = np.zeros(4)
    for k, src in enumerate(BELL_LABELS):
        for n, dst in enumerate(BELL_LABELS):
            flips = sum(a != b for a, b in zip(_BELL_BITS[src], _BELL_BITS[dst]))
            out[n] += probs[k] * q ** flips * (1 - q) ** (2 - flips)
    return out


def noisy_bell_probs(rho_a: QuantumState, rho_b: QuantumState, noise: NoiseModel) -> np.ndarray:
    noisy_a = apply_depolarizing(rho_a, noise.depolarizing_p)
    noisy_b = apply_depolarizing(rho_b, noise.depolarizing_p)
    probs = bell_measure_probs(product_state(noisy_a, noisy_b))
    return apply_readout_flip(probs, noise.readout_flip)


def sample_counts(probs: np.ndarray, shots: int, seed: int | np.random.Generator) -> ShotCounts:
    """Multinomial sample over the four Bell labels; reproducible for a fixed seed."""
    if shots < 0:
        raise ValidationError(f"shots must be nonnegative, got {shots}")
    p = np.asarray(probs, dtype=float)
    if p.shape != (len(BELL_LABELS),):
        raise ValidationError(f"expected {len(BELL_LABELS)} outcome probabilities, got shape {p.shape}")
    if np.any(p < -TOL_VALID) or abs(p.sum() - 1.0) > TOL_VALID:
        raise ProbabilityOutOfRange(f"outcome probabilities {p.tolist()} are not a distribution")
    p = np.clip(p, 0.0, None)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    draws = rng.multinomial(shots, p / p.sum())
    return ShotCounts(dict(zip(BELL_LABELS, (int(c) for c in draws))), shots)


def e_from_frequencies(p_11: float, p_1m: float, p_m1: float, p_mm: float) -> float:
    """E from the target-outcome frequencies of the (i,j), (i,mix), (mix,j), (mix,mix) preparations."""
    return 4.0 * (p_11 - p_1m - p_m1 + p_mm)


def estimate_e(
    counts_11: ShotCounts,
    counts_1m: ShotCounts,
    counts_m1: ShotCounts,
    counts_mm: ShotCounts,
    target_outcome: str,
) -> tuple[float, float]:
    """E = 4 [p11 - p1m - pm1 + pmm] with binomial error propagation."""
    records = (counts_11, counts_1m, counts_m1, counts_mm)
    if any(c.shots == 0 for c in records):
        raise EmptyCounts("every preparation needs at least one shot")
    freqs = [c.frequency(target_outcome) for c in records]
    value = e_from_frequencies(*freqs)
    variance = sum(16.0 * p * (1 - p) / c.shots for p, c in zip(freqs, records))
    return value, float(np.sqrt(variance))


# ---------------------------------------------------------------------------
# Settings
# ---------------------------------------------------------------------------

def violating_setting() -> ChshSetting:
    """rho^A_0 = |0><0|, rho^A_1 = |+><+|, rho^B_0,1 with Bloch vectors (-+1/sqrt2, 0, 1/sqrt2), M_1 = |Phi-><Phi-|."""
    c = SQRT2 / 4
    rho_b0 = QuantumState(OperatorMatrix([[(2 + SQRT2) / 4, -c], [-c, (2 - SQRT2) / 4]]))
    rho_b1 = QuantumState(OperatorMatrix([[(2 + SQRT2) / 4, c], [c, (2 - SQRT2) / 4]]))
    return ChshSetting(
        (pure_state(np.array([1, 0])), pure_state(np.array([1, 1]))),
        (rho_b0, rho_b1),
        BinaryObservable.from_effect(bell_projector("phi_minus")),
    )


def bell_target(observable: BinaryObservable) -> str:
    """Bell label whose projector equals M_1."""
    for label in BELL_LABELS:
        if observable.m_plus.op.max_abs_diff(bell_projector(label).op) <= TOL_VALID:
            return label
    raise UnsupportedMeasurement("the simulator measures in the Bell basis; M_1 must be a Bell projector")


def preparation_settings(setting: ChshSetting) -> list[PreparationSetting]:
    """The 16 preparations, four per E term in the order (i,j), (i,mix), (mix,j), (mix,mix)."""
    mixed = maximally_mixed(2)
    preps = []
    for i in range(2):
        for j in range(2):
            a, b = setting.rho_a[i], setting.rho_b[j]
            preps.extend([
                PreparationSetting(a, b, (str(i), str(j)), (i, j)),
                PreparationSetting(a, mixed, (str(i), MIX), (i, j)),
                PreparationSetting(mixed, b, (MIX, str(j)), (i, j)),
                PreparationSetting(mixed, mixed, (MIX, MIX), (i, j)),
            ])
    return preps


def _components(prep: PreparationSetting, mixture_preparation: bool) -> list[tuple[float, QuantumState, QuantumState]]:
    """Mixed sides as an equal mixture of |0><0| and |1><1| when requested."""
    if not mixture_preparation:
        return [(1.0, prep.rho_a, prep.rho_b)]
    basis = (pure_state(np.array([1, 0])), pure_state(np.array([0, 1])))
    sides_a = basis if prep.label[0] == MIX else (prep.rho_a,)
    sides_b = basis if prep.label[1] == MIX else (prep.rho_b,)
    weight = 1.0 / (len(sides_a) * len(sides_b))
    return [(weight, a, b) for a in sides_a for b in sides_b]


def simulate_preparation(
    prep: PreparationSetting,
    shots: int,
    noise: NoiseModel,
    seed: int,
    mixture_preparation: bool = False,
) -> ShotCounts:
    rng = np.random.default_rng(seed)
    components = _components(prep, mixture_preparation)
    split = rng.multinomial(shots, [w for w, _, _ in components]) if len(components) > 1 else [shots]
    totals = dict.fromkeys(BELL_LABELS, 0)
    for n_shots, (_, rho_a, rho_b) in zip(split, components):
        drawn = sample_counts(noisy_bell_probs(rho_a, rho_b, noise), int(n_shots), rng)
        for label, count in drawn.counts.items():
            totals[label] += count
    return ShotCounts(totals, shots)


# ---------------------------------------------------------------------------
# Experiment
# ---------------------------------------------------------------------------

def run_dual_chsh_experiment(
    setting: ChshSetting,
    shots_per_setting: int,
    noise: NoiseModel | None = None,
    seed: int = 0,
    mixture_preparation: bool = False,
    workers: int = 1,
) -> DEstimate:
    """Simulate all 16 preparations and aggregate D with its standard error.

    Preparation k uses seed ``seed + k``; aggregation follows preparation
    order, so the result is identical for any ``workers``.
    """
    noise = noise or NoiseModel()
    if setting.dims != (2, 2):
        raise NotQubit(f"the simulator handles two qubits, got dims {setting.dims}")
    if shots_per_setting <= 0:
        raise EmptyCounts(f"shots_per_setting must be positive, got {shots_per_setting}")
    target = bell_target(setting.observable)
    preps = preparation_settings(setting)

    def run(k: int) -> SettingRecord:
        prep = preps[k]
        counts = simulate_preparation(prep, shots_per_setting, noise, seed + k, mixture_preparation)
        return SettingRecord(prep.label, prep.term, seed + k, counts)

    with get_tracer().start_as_current_span(
        "run_dual_chsh_experiment",
        attributes={"shots_per_setting": shots_per_setting, "seed": seed, "target": target},
    ):
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                records = list(pool.map(run, range(len(preps))))
        else:
            records = [run(k) for k in range(len(preps))]

    per_term = []
    for t in range(4):
        block = records[4 * t: 4 * t + 4]
        per_term.append(estimate_e(*(r.counts for r in block), target_outcome=target))
    signs = CHSH_SIGNS.reshape(-1)
    value = float(sum(s * e for s, (e, _) in zip(signs, per_term)))
    std_error = float(np.sqrt(sum(err ** 2 for _, err in per_term)))
    logger.info(
        '{"event":"experiment_complete","d":%.9g,"std_error":%.9g,"shots_per_setting":%d,"seed":%d}',
        value, std_error, shots_per_setting, seed,
    )
    return DEstimate(
        value=value,
        std_error=std_error,
        per_term=tuple(per_term),
        shots_per_setting=shots_per_setting,
        seed=seed,
        noise=noise,
        target_outcome=target,
        records=tuple(records),
    )


def exact_e_terms(setting: ChshSetting, noise: NoiseModel | None = None) -> np.ndarray:
    """The four E values, indexed [i][j], that the estimator converges to."""
    noise = noise or NoiseModel()
    target = BELL_LABELS.index(bell_target(setting.observable))
    preps = preparation_settings(setting)
    probs = [noisy_bell_probs(p.rho_a, p.rho_b, noise)[target] for p in preps]
    return np.array([e_from_frequencies(*probs[k: k + 4]) for k in range(0, 16, 4)]).reshape(2, 2)


def exact_noisy_d(setting: ChshSetting, noise: NoiseModel | None = None) -> float:
    """Expectation of the simulator's D estimate (estimator on exact probabilities)."""
    return float(np.sum(CHSH_SIGNS * exact_e_terms(setting, noise)))


def calibrate_depolarizing(
    setting: ChshSetting,
    target_d: float = HARDWARE_D_VALUE,
    readout_flip: float = 0.0,
    xtol: float = 1e-13,
) -> float:
    """Depolarizing p in [0, 1] whose exact noisy D equals ``target_d`` (bisection)."""

    def gap(p: float) -> float:
        return exact_noisy_d(setting, NoiseModel(p, readout_flip)) - target_d

    low, high = gap(0.0), gap(1.0)
    if low < 0 or high > 0:
        raise ValidationError(
            f"target D {target_d} not bracketed by [{high + target_d:.9g}, {low + target_d:.9g}]"
        )
    p = float(optimize.bisect(gap, 0.0, 1.0, xtol=xtol))
    logger.info('{"event":"calibrated_depolarizing","target_d":%.9g,"p":%.12g}', target_d, p)
    return p


def bell_histogram(shots: int, noise: NoiseModel | None = None, seed: int = 0,
                   mixture_preparation: bool = False) -> ShotCounts:
    """Bell-basis counts for the completely mixed two-qubit preparation."""
    mixed = maximally_mixed(2)
    prep = PreparationSetting(mixed, mixed, (MIX, MIX), (0, 0))
    return simulate_preparation(prep, shots, noise or NoiseModel(), seed, mixture_preparation)


def write_histogram_csv(counts: ShotCounts, path: str | Path) -> Path:
    """Rows ``outcome,probability,count`` in Bell label order."""
    out = Path(path)
    with out.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["outcome", "probability", "count"])
        for label in BELL_LABELS:
            count = counts.counts.get(label, 0)
            writer.writerow([label, repr(count / counts.shots if counts.shots else 0.0), count])
    return out
