from __future__ import annotations

import csv

import numpy as np
import pytest

from app.dual_chsh import ChshSetting, d_value, e_terms
from app.errors import (
    EmptyCounts,
    InvalidNoise,
    NotQubit,
    ProbabilityOutOfRange,
    UnsupportedMeasurement,
    ValidationError,
)
from app.experiment_sim import (
    HARDWARE_D_VALUE,
    HARDWARE_MIXED_BELL_PROBS,
    MIX,
    NoiseModel,
    PreparationSetting,
    ShotCounts,
    apply_depolarizing,
    apply_readout_flip,
    bell_histogram,
    bell_measure_probs,
    bell_target,
    calibrate_depolarizing,
    estimate_e,
    exact_e_terms,
    exact_noisy_d,
    preparation_settings,
    run_dual_chsh_experiment,
    sample_counts,
    write_histogram_csv,
)
from app.linalg_core import OperatorMatrix
from app.quantum_objects import (
    BELL_LABELS,
    SQRT2,
    BinaryObservable,
    Effect,
    QuantumState,
    bell_projector,
    bell_states,
    maximally_mixed,
    pure_state,
    random_state,
)

ZERO = pure_state(np.array([1, 0]))


def _counts(**kwargs: int) -> ShotCounts:
    counts = {label: kwargs.get(label, 0) for label in BELL_LABELS}
    return ShotCounts(counts, sum(counts.values()))


class TestMeasurementModel:
    def test_bell_state_is_deterministic(self):
        phi_minus = bell_states()[1]
        assert np.allclose(bell_measure_probs(phi_minus), [0, 1, 0, 0])

    def test_mixed_and_product_inputs(self):
        assert np.allclose(bell_measure_probs(maximally_mixed(4)), [0.25] * 4)
        zz = QuantumState(OperatorMatrix(np.diag([1.0, 0, 0, 0])))
        assert np.allclose(bell_measure_probs(zz), [0.5, 0.5, 0, 0])

    def test_bell_measurement_needs_two_qubits(self):
        with pytest.raises(NotQubit):
            bell_measure_probs(ZERO)

    def test_depolarizing(self):
        assert np.allclose(apply_depolarizing(ZERO, 0.5).op.entries, np.diag([0.75, 0.25]))
        assert np.allclose(apply_depolarizing(ZERO, 1.0).op.entries, np.eye(2) / 2)
        with pytest.raises(NotQubit):
            apply_depolarizing(maximally_mixed(4), 0.1)

    def test_readout_flip(self):
        certain = np.array([0.0, 1.0, 0.0, 0.0])
        assert np.array_equal(apply_readout_flip(certain, 0.0), certain)
        flipped = apply_readout_flip(certain, 0.1)
        assert flipped.sum() == pytest.approx(1.0)
        # phi_minus reads 10; one flip gives 00 or 11, two flips give 01.
        assert np.allclose(flipped, [0.09, 0.81, 0.01, 0.09])
        assert np.allclose(apply_readout_flip(certain, 0.5), [0.25] * 4)

    def test_noise_model_validation(self):
        assert NoiseModel().is_ideal
        assert not NoiseModel(0.1).is_ideal
        with pytest.raises(InvalidNoise):
            NoiseModel(depolarizing_p=1.5)
        with pytest.raises(InvalidNoise):
            NoiseModel(readout_flip=-0.1)

    def test_preparation_must_be_qubits(self):
        with pytest.raises(NotQubit):
            PreparationSetting(maximally_mixed(3), ZERO, ("0", "0"), (0, 0))

    def test_hardware_reference_probabilities(self):
        assert sum(HARDWARE_MIXED_BELL_PROBS.values()) == pytest.approx(1.0)
        assert set(HARDWARE_MIXED_BELL_PROBS) == set(BELL_LABELS)


class TestCounts:
    def test_sample_counts_reproducible(self):
        probs = np.array([0.1, 0.2, 0.3, 0.4])
        first = sample_counts(probs, 1000, 42)
        assert first == sample_counts(probs, 1000, 42)
        assert sum(first.counts.values()) == 1000

    def test_sample_counts_examples(self):
        certain = sample_counts(np.array([1.0, 0, 0, 0]), 100, 0)
        assert certain.counts == {"phi_plus": 100, "phi_minus": 0, "psi_plus": 0, "psi_minus": 0}
        empty = sample_counts(np.full(4, 0.25), 0, 0)
        assert empty.shots == 0
        assert set(empty.counts.values()) == {0}

    def test_uniform_counts_within_five_sigma(self):
        shots = 1_000_000
        counts = sample_counts(np.full(4, 0.25), shots, 13)
        sigma = np.sqrt(shots * 0.25 * 0.75)
        for label in BELL_LABELS:
            assert abs(counts.counts[label] - shots / 4) <= 5 * sigma

    @pytest.mark.parametrize(
        "probs",
        [[0.3, 0.3, 0.3, 0.0], [0.0, 0.0, 0.0, 0.0], [1.2, -0.2, 0.0, 0.0]],
    )
    def test_sample_counts_rejects_non_distributions(self, probs):
        with pytest.raises(ProbabilityOutOfRange) as info:
            sample_counts(np.array(probs), 10, 0)
        assert info.value.exit_code == 2

    def test_sample_counts_needs_four_outcomes(self):
        with pytest.raises(ValidationError):
            sample_counts(np.array([0.5, 0.5]), 10, 0)

    def test_counts_must_sum_to_shots(self):
        with pytest.raises(ValidationError):
            ShotCounts({"phi_plus": 3}, 4)

    def test_frequency_of_empty_counts(self):
        with pytest.raises(EmptyCounts):
            _counts().frequency("phi_plus")

    def test_estimate_e(self):
        value, err = estimate_e(
            _counts(phi_minus=60, phi_plus=40),
            _counts(phi_minus=25, phi_plus=75),
            _counts(phi_minus=25, phi_plus=75),
            _counts(phi_minus=25, phi_plus=75),
            target_outcome="phi_minus",
        )
        assert value == pytest.approx(4 * (0.6 - 0.25 - 0.25 + 0.25))
        assert err > 0

    def test_estimate_e_rejects_empty(self):
        full = _counts(phi_minus=1)
        with pytest.raises(EmptyCounts):
            estimate_e(full, full, _counts(), full, "phi_minus")


class TestExperiment:
    def test_preparation_order(self, violating):
        labels = [p.label for p in preparation_settings(violating)]
        assert len(labels) == 16
        assert labels[:4] == [("0", "0"), ("0", MIX), (MIX, "0"), (MIX, MIX)]
        assert labels[12] == ("1", "1")

    def test_noiseless_estimate(self, violating):
        estimate = run_dual_chsh_experiment(violating, 1_000_000, seed=7)
        assert abs(estimate.value - 2 * SQRT2) <= 4 * estimate.std_error
        assert estimate.target_outcome == "phi_minus"
        assert [r.seed for r in estimate.records] == list(range(7, 23))

    def test_exact_noisy_d(self, violating):
        assert exact_noisy_d(violating) == pytest.approx(2 * SQRT2)
        for p in (0.1, 0.3, 1.0):
            assert exact_noisy_d(violating, NoiseModel(p)) == pytest.approx((1 - p) ** 2 * 2 * SQRT2)
        assert exact_noisy_d(violating, NoiseModel(0.0, 0.5)) == pytest.approx(0.0, abs=1e-12)

    def test_exact_probabilities_reproduce_each_term(self, rng):
        for k in range(50):
            label = BELL_LABELS[k % 4]
            setting = ChshSetting(
                (random_state(2, rng), random_state(2, rng, 1)),
                (random_state(2, rng, 1), random_state(2, rng)),
                BinaryObservable.from_effect(bell_projector(label)),
            )
            assert np.max(np.abs(exact_e_terms(setting) - e_terms(setting))) <= 1e-12

    def test_estimator_is_unbiased(self, violating):
        runs = [run_dual_chsh_experiment(violating, 10_000, seed=16 * r) for r in range(200)]
        mean = np.mean([run.value for run in runs])
        combined_error = np.sqrt(sum(run.std_error ** 2 for run in runs)) / len(runs)
        assert abs(mean - d_value(violating)) <= 5 * combined_error

    def test_noise_never_increases_d(self, violating):
        grid = np.linspace(0.0, 1.0, 201)
        values = np.array([exact_noisy_d(violating, NoiseModel(p)) for p in grid])
        assert np.all(np.diff(values) <= 1e-12)
        assert values[-1] == pytest.approx(0.0, abs=1e-12)

    def test_calibration(self, violating):
        p = calibrate_depolarizing(violating)
        assert p == pytest.approx(1 - np.sqrt(HARDWARE_D_VALUE / (2 * SQRT2)), abs=1e-9)
        noise = NoiseModel(p)
        assert abs(exact_noisy_d(violating, noise) - HARDWARE_D_VALUE) <= 1e-6
        estimate = run_dual_chsh_experiment(violating, 1_000_000, noise, seed=11)
        assert abs(estimate.value - HARDWARE_D_VALUE) <= 4 * estimate.std_error

    def test_calibration_target_out_of_reach(self, violating):
        with pytest.raises(ValidationError):
            calibrate_depolarizing(violating, target_d=3.0)

    def test_reproducible_and_worker_independent(self, violating):
        noise = NoiseModel(0.05, 0.01)
        serial = run_dual_chsh_experiment(violating, 5000, noise, seed=3)
        again = run_dual_chsh_experiment(violating, 5000, noise, seed=3)
        threaded = run_dual_chsh_experiment(violating, 5000, noise, seed=3, workers=4)
        assert serial.value == again.value == threaded.value
        assert [r.counts for r in serial.records] == [r.counts for r in threaded.records]
        assert run_dual_chsh_experiment(violating, 5000, noise, seed=4).value != serial.value

    def test_mixture_preparation(self, violating):
        estimate = run_dual_chsh_experiment(violating, 400_000, seed=5, mixture_preparation=True)
        assert abs(estimate.value - 2 * SQRT2) <= 4 * estimate.std_error

    def test_rejects_non_bell_measurement(self, violating):
        product = BinaryObservable.from_effect(Effect(OperatorMatrix(np.diag([1.0, 0, 0, 0]), (2, 2))))
        setting = ChshSetting(violating.rho_a, violating.rho_b, product)
        with pytest.raises(UnsupportedMeasurement):
            bell_target(product)
        with pytest.raises(UnsupportedMeasurement):
            run_dual_chsh_experiment(setting, 100)

    def test_rejects_qutrits_and_empty_runs(self, violating):
        mixed = maximally_mixed(3)
        observable = BinaryObservable.from_effect(Effect(OperatorMatrix(np.eye(9) / 9, (3, 3))))
        with pytest.raises(NotQubit):
            run_dual_chsh_experiment(ChshSetting((mixed, mixed), (mixed, mixed), observable), 100)
        with pytest.raises(EmptyCounts):
            run_dual_chsh_experiment(violating, 0)


class TestHistogram:
    @pytest.mark.parametrize("mixture", [False, True])
    def test_mixed_input_is_uniform(self, mixture):
        shots = 100_000
        counts = bell_histogram(shots, seed=1, mixture_preparation=mixture)
        sigma = np.sqrt(0.25 * 0.75 / shots)
        for label in BELL_LABELS:
            assert abs(counts.frequency(label) - 0.25) <= 5 * sigma

    def test_csv(self, tmp_path):
        counts = bell_histogram(1000, seed=2)
        out = write_histogram_csv(counts, tmp_path / "hist.csv")
        with out.open(newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["outcome", "probability", "count"]
        assert [r[0] for r in rows[1:]] == list(BELL_LABELS)
        assert sum(int(r[2]) for r in rows[1:]) == 1000
        assert sum(float(r[1]) for r in rows[1:]) == pytest.approx(1.0)
