"""Shared fixtures for the dualbell test suite."""

from __future__ import annotations

import numpy as np
import pytest

from app.experiment_sim import violating_setting
from app.quantum_objects import BinaryObservable, bell_projector


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def violating():
    return violating_setting()


@pytest.fixture
def phi_minus_observable() -> BinaryObservable:
    return BinaryObservable.from_effect(bell_projector("phi_minus"))
