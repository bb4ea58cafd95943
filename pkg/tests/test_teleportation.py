from __future__ import annotations

import numpy as np
import pytest

from app.errors import NotTwoQubit, NotUnitary, ValidationError, WrongOutcomeCount
from app.fixtures import noisy_povm, product_povm
from app.linalg_core import OperatorMatrix, nuclear_norm
from app.quantum_objects import Effect, Povm, bell_povm, random_povm
from app.teleportation import (
    CLASSICAL_FIDELITY,
    average_fidelity_mc,
    dual_chsh_link,
    dual_chsh_link_details,
    max_average_fidelity,
    sample_bloch_sphere,
    standard_bell_corrections,
    t_matrices,
)

IDENTITY_CORRECTIONS = [np.eye(2)] * 4


class TestMaxAverageFidelity:
    def test_bell_measurement_is_perfect(self):
        report = max_average_fidelity(bell_povm())
        assert report.f_max == pytest.approx(1.0)
        assert report.per_outcome_nuclear_norms == pytest.approx((3.0, 3.0, 3.0, 3.0))
        assert report.useful is True
        assert report.threshold_margin == pytest.approx(8.0)

    def test_product_measurement_is_classical(self):
        report = max_average_fidelity(product_povm())
        assert report.f_max == pytest.approx(CLASSICAL_FIDELITY)
        assert report.useful is False
        assert report.threshold_margin == pytest.approx(0.0, abs=1e-12)

    def test_uninformative_measurement(self):
        report = max_average_fidelity(noisy_povm())
        assert report.f_max == pytest.approx(0.5)
        assert report.per_outcome_nuclear_norms == pytest.approx((0.0,) * 4)
        assert report.threshold_margin == pytest.approx(-4.0)

    def test_t_matrices_of_bell_povm(self):
        expected = [np.diag(d) for d in ([1, -1, 1], [-1, 1, 1], [1, 1, -1], [-1, -1, -1])]
        for t, e in zip(t_matrices(bell_povm()), expected):
            assert np.allclose(t, e, atol=1e-12)

    def test_usefulness_matches_threshold(self, rng):
        for _ in range(1000):
            povm = random_povm(4, 4, rng, (2, 2))
            report = max_average_fidelity(povm)
            total = sum(nuclear_norm(t) for t in t_matrices(povm))
            assert report.useful == (total > 4 + 1e-9)
            assert report.threshold_margin == pytest.approx(total - 4, abs=1e-12)
            assert (report.f_max > CLASSICAL_FIDELITY + 1e-9) == (total > 4 + 1e-8)
            assert 0.5 - 1e-12 <= report.f_max <= 1 + 1e-12

    def test_requires_four_outcomes(self):
        half = Effect(OperatorMatrix(np.eye(4) / 2, (2, 2)))
        with pytest.raises(WrongOutcomeCount):
            max_average_fidelity(Povm((half, half)))

    def test_requires_two_qubits(self):
        quarter = Effect(OperatorMatrix(np.eye(9) / 4, (3, 3)))
        with pytest.raises(NotTwoQubit):
            max_average_fidelity(Povm((quarter,) * 4))


class TestMonteCarlo:
    def test_standard_corrections_are_perfect(self):
        mean, err = average_fidelity_mc(bell_povm(), standard_bell_corrections(), 10_000, seed=1)
        assert mean == pytest.approx(1.0, abs=1e-12)
        assert err == pytest.approx(0.0, abs=1e-12)

    def test_identity_corrections_give_one_half(self):
        mean, _ = average_fidelity_mc(bell_povm(), IDENTITY_CORRECTIONS, 10_000, seed=2)
        assert mean == pytest.approx(0.5, abs=1e-12)

    def test_never_exceeds_optimum(self, rng):
        for k in range(10):
            povm = random_povm(4, 4, rng, (2, 2))
            mean, err = average_fidelity_mc(povm, standard_bell_corrections(), 20_000, seed=k)
            assert mean <= max_average_fidelity(povm).f_max + 5 * err + 1e-12

    def test_product_measurement_reaches_two_thirds(self):
        # Bob holds |b>; flip it whenever Alice's input bit a differs.
        x = np.array([[0, 1], [1, 0]])
        mean, err = average_fidelity_mc(product_povm(), [np.eye(2), x, x, np.eye(2)], 100_000, seed=3)
        assert abs(mean - CLASSICAL_FIDELITY) <= 5 * err
        standard, _ = average_fidelity_mc(product_povm(), standard_bell_corrections(), 10_000, seed=3)
        assert standard == pytest.approx(0.5, abs=1e-12)

    def test_chunking_is_worker_independent(self):
        povm = random_povm(4, 4, np.random.default_rng(8), (2, 2))
        serial = average_fidelity_mc(povm, standard_bell_corrections(), 10_000, seed=4)
        threaded = average_fidelity_mc(povm, standard_bell_corrections(), 10_000, seed=4, workers=3)
        assert serial == threaded

    def test_rejects_non_unitary(self):
        with pytest.raises(NotUnitary):
            average_fidelity_mc(bell_povm(), [np.eye(2), np.eye(2), np.eye(2), 2 * np.eye(2)], 10)
        with pytest.raises(NotUnitary):
            average_fidelity_mc(bell_povm(), [np.eye(3)] * 4, 10)

    def test_rejects_wrong_counts(self):
        with pytest.raises(WrongOutcomeCount):
            average_fidelity_mc(bell_povm(), [np.eye(2)] * 3, 10)
        with pytest.raises(ValidationError):
            average_fidelity_mc(bell_povm(), IDENTITY_CORRECTIONS, 0)

    def test_bloch_sphere_samples_are_unit_and_isotropic(self):
        samples = sample_bloch_sphere(50_000, np.random.default_rng(0))
        assert np.allclose(np.linalg.norm(samples, axis=1), 1.0)
        z = np.abs(samples[:, 0]) ** 2 - np.abs(samples[:, 1]) ** 2
        assert abs(z.mean()) <= 0.02


class TestDualChshLink:
    def test_bell_outcomes_all_violate(self):
        assert dual_chsh_link(bell_povm()) == (True, True, True, True)
        for link in dual_chsh_link_details(bell_povm()):
            assert link.nuclear_norm == pytest.approx(3.0)
            assert link.max_d == pytest.approx(2 * np.sqrt(2))
            assert link.keep_probability == 1.0

    def test_product_outcomes_do_not(self):
        assert dual_chsh_link(product_povm()) == (False, False, False, False)
        assert dual_chsh_link(noisy_povm()) == (False, False, False, False)

    def test_violation_implies_large_nuclear_norm(self, rng):
        for _ in range(200):
            for link in dual_chsh_link_details(random_povm(4, 4, rng, (2, 2))):
                if link.violates:
                    assert link.nuclear_norm > 1
