from __future__ import annotations

import numpy as np
import pytest

from app.errors import (
    BlochNormExceeded,
    DimMismatch,
    InvalidEffect,
    InvalidObservable,
    InvalidPovm,
    InvalidState,
    NotQubit,
)
from app.linalg_core import OperatorMatrix, partial_trace
from app.quantum_objects import (
    SQRT2,
    BinaryObservable,
    BlochVector,
    Effect,
    Povm,
    QuantumState,
    bell_povm,
    bell_projector,
    bell_states,
    bloch_to_state,
    born_probability,
    maximally_mixed,
    product_state,
    rank_one_decomposition,
    random_effect,
    random_povm,
    random_pure_state,
    random_state,
    renormalize_effect,
    satisfies_trace_condition,
    state_to_bloch,
)


class TestValidation:
    def test_rejects_non_hermitian_state(self):
        with pytest.raises(InvalidState):
            QuantumState(OperatorMatrix([[0.5, 0.5], [0.0, 0.5]]))

    def test_rejects_negative_state(self):
        with pytest.raises(InvalidState):
            QuantumState(OperatorMatrix(np.diag([1.5, -0.5])))

    def test_rejects_wrong_trace(self):
        with pytest.raises(InvalidState):
            QuantumState(OperatorMatrix(np.eye(2)))

    def test_rejects_effect_above_identity(self):
        with pytest.raises(InvalidEffect):
            Effect(OperatorMatrix(np.diag([1.0 + 1e-6, 0.0])))

    def test_effect_tolerance_edge(self):
        Effect(OperatorMatrix(np.diag([1.0 + 1e-10, -1e-10])))

    def test_observable_must_sum_to_identity(self):
        half = Effect(OperatorMatrix(np.eye(2) / 2))
        with pytest.raises(InvalidObservable):
            BinaryObservable(half, Effect(OperatorMatrix(np.eye(2) / 4)))

    def test_povm_completeness(self):
        assert len(bell_povm()) == 4
        with pytest.raises(InvalidPovm):
            Povm((bell_projector("phi_plus"), bell_projector("phi_minus")))

    def test_expectation_operator(self, phi_minus_observable):
        m = phi_minus_observable.expectation_operator.entries
        assert np.allclose(m, 2 * bell_projector("phi_minus").op.entries - np.eye(4))


class TestBornRule:
    def test_examples(self):
        assert born_probability(maximally_mixed(4), bell_projector("phi_minus")) == pytest.approx(0.25)
        phi_plus = bell_states()[0]
        assert born_probability(phi_plus, bell_projector("phi_plus")) == pytest.approx(1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimMismatch):
            born_probability(maximally_mixed(2), bell_projector("phi_plus"))

    def test_outcomes_of_an_observable_sum_to_one(self, rng):
        for _ in range(50):
            d = int(rng.integers(2, 7))
            rho = random_state(d, rng)
            m = BinaryObservable.from_effect(random_effect(d, rng))
            total = born_probability(rho, m.m_plus) + born_probability(rho, m.m_minus)
            assert abs(total - 1.0) <= 1e-9


class TestBellStates:
    def test_orthogonal_and_complete(self):
        states = bell_states()
        total = sum(s.op.entries for s in states)
        assert np.allclose(total, np.eye(4))
        assert abs(np.trace(states[0].op.entries @ states[1].op.entries)) <= 1e-15

    def test_reductions_are_maximally_mixed(self):
        for state in bell_states():
            assert np.allclose(partial_trace(state.op, "A").entries, np.eye(2) / 2)

    def test_maximally_mixed(self):
        assert np.allclose(maximally_mixed(2).op.entries, np.eye(2) / 2)
        assert maximally_mixed(4).op.trace() == pytest.approx(1.0)


class TestBloch:
    def test_examples(self):
        assert np.allclose(bloch_to_state(BlochVector(0, 0, 1)).op.entries, np.diag([1, 0]))
        assert np.allclose(bloch_to_state(BlochVector(0, 0, 0)).op.entries, np.eye(2) / 2)
        rho = bloch_to_state(BlochVector(-1 / SQRT2, 0, 1 / SQRT2)).op.entries
        c = SQRT2 / 4
        assert np.allclose(rho, [[(2 + SQRT2) / 4, -c], [-c, (2 - SQRT2) / 4]], atol=1e-15)

    def test_norm_exceeded(self):
        with pytest.raises(BlochNormExceeded):
            bloch_to_state(BlochVector(1, 1, 0))

    def test_not_qubit(self):
        with pytest.raises(NotQubit):
            state_to_bloch(maximally_mixed(3))

    def test_round_trip(self, rng):
        for _ in range(1000):
            direction = rng.normal(size=3)
            r = direction / np.linalg.norm(direction) * rng.uniform() ** (1 / 3)
            back = state_to_bloch(bloch_to_state(BlochVector.of(r))).as_array()
            assert np.max(np.abs(back - r)) <= 1e-12


class TestRenormalize:
    def test_unchanged_when_condition_holds(self, phi_minus_observable):
        assert renormalize_effect(phi_minus_observable) is phi_minus_observable
        small = BinaryObservable.from_effect(Effect(bell_projector("phi_plus").op * 0.6))
        assert renormalize_effect(small) is small

    def test_divides_by_trace(self):
        m = BinaryObservable.from_effect(Effect(OperatorMatrix(np.eye(4) / 2, (2, 2))))
        out = renormalize_effect(m)
        assert np.allclose(out.m_plus.op.entries, np.eye(4) / 4)
        assert out.keep_probability == pytest.approx(0.5)
        assert out.m_plus.dims_split == (2, 2)

    def test_output_always_satisfies_condition(self, rng):
        for _ in range(200):
            m = BinaryObservable.from_effect(random_effect(9, rng, (3, 3)))
            assert satisfies_trace_condition(renormalize_effect(m))

    def test_flipped_swaps_outcomes(self, phi_minus_observable):
        flipped = phi_minus_observable.flipped()
        assert flipped.m_plus is phi_minus_observable.m_minus
        assert np.allclose(flipped.expectation_operator.entries, -phi_minus_observable.expectation_operator.entries)


class TestRandomObjects:
    def test_random_povm_is_complete(self, rng):
        povm = random_povm(4, 4, rng, (2, 2))
        total = sum(e.op.entries for e in povm)
        assert np.max(np.abs(total - np.eye(4))) <= 1e-12
        assert all(e.dims_split == (2, 2) for e in povm)

    def test_random_pure_state_and_products(self, rng):
        a = random_pure_state(2, rng)
        b = random_state(3, rng)
        assert np.real(np.trace(a.op.entries @ a.op.entries)) == pytest.approx(1.0)
        joint = product_state(a, b)
        assert joint.dims_split == (2, 3)
        assert np.allclose(partial_trace(joint.op, "B").entries, a.op.entries, atol=1e-12)
        assert np.allclose(partial_trace(joint.op, "A").entries, b.op.entries, atol=1e-12)

    def test_rank_one_decomposition_weights(self, rng):
        effect = random_effect(4, rng, (2, 2))
        terms = rank_one_decomposition(effect)
        assert sum(lam for lam, _ in terms) == pytest.approx(effect.trace())
        rebuilt = sum(lam * p.entries for lam, p in terms)
        assert np.allclose(rebuilt, effect.op.entries, atol=1e-9)
