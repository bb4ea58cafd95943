"""
Bundled fixtures, addressable from the CLI as ``fixture:<name>``.

Parametrized families take their parameter after ``@``, e.g.
``fixture:epsilon_effect@0.3``.
"""

from __future__ import annotations

from typing import Callable, Union

import numpy as np

from app.dual_chsh import ChshSetting
from app.errors import InvalidOperatorFile
from app.experiment_sim import violating_setting
from app.linalg_core import OperatorMatrix
from app.quantum_objects import (
    BELL_LABELS,
    BinaryObservable,
    Effect,
    Povm,
    QuantumState,
    bell_povm,
    bell_projector,
    maximally_mixed,
    random_effect,
)

Fixture = Union[QuantumState, Effect, BinaryObservable, Povm, ChshSetting]

DEFAULT_EPSILON = 0.1
RANDOM_EFFECT_SEED = 7


def epsilon_effect(epsilon: float = DEFAULT_EPSILON) -> Effect:
    """2 eps |Phi+><Phi+|: NPT for every eps > 0, dual CHSH satisfied while 4 sqrt2 eps <= 2."""
    if not 0.0 <= epsilon <= 0.5:
        raise InvalidOperatorFile(f"epsilon must lie in [0, 0.5], got {epsilon}")
    return Effect(bell_projector("phi_plus").op * (2.0 * epsilon))


def product_projector() -> Effect:
    """|00><00|."""
    return Effect(OperatorMatrix.projector([1, 0, 0, 0], (2, 2)))


def product_povm() -> Povm:
    """Computational-basis measurement {|ij><ij|}."""
    return Povm(tuple(Effect(OperatorMatrix.projector(np.eye(4)[k], (2, 2))) for k in range(4)))


def noisy_povm() -> Povm:
    """Four copies of 1/4: carries no information about the input."""
    quarter = Effect(OperatorMatrix(np.eye(4) / 4, (2, 2)))
    return Povm((quarter,) * 4)


def all_mixed_setting() -> ChshSetting:
    mixed = maximally_mixed(2)
    return ChshSetting((mixed, mixed), (mixed, mixed), BinaryObservable.from_effect(bell_projector("phi_minus")))


def random_effect_3x3(seed: int = RANDOM_EFFECT_SEED) -> Effect:
    return random_effect(9, np.random.default_rng(seed), dims_split=(3, 3))


_FIXTURES: dict[str, Callable[..., Fixture]] = {
    "violating_setting": violating_setting,
    "all_mixed_setting": all_mixed_setting,
    "epsilon_effect": epsilon_effect,
    "product_projector": product_projector,
    "product_povm": product_povm,
    "bell_povm": bell_povm,
    "noisy_povm": noisy_povm,
    "random_effect_3x3": random_effect_3x3,
}
for _label in BELL_LABELS:
    _FIXTURES[f"bell_{_label}"] = lambda label=_label: bell_projector(label)


def fixture_names() -> list[str]:
    return sorted(_FIXTURES)


def load_fixture(spec: str) -> Fixture:
    """Resolve ``name`` or ``name@param``."""
    name, _, param = spec.partition("@")
    factory = _FIXTURES.get(name)
    if factory is None:
        raise InvalidOperatorFile(f"unknown fixture {name!r}; available: {', '.join(fixture_names())}")
    if not param:
        return factory()
    if name not in ("epsilon_effect", "random_effect_3x3"):
        raise InvalidOperatorFile(f"fixture {name} takes no parameter")
    try:
        value = float(param) if name == "epsilon_effect" else int(param)
    except ValueError as exc:
        raise InvalidOperatorFile(f"bad fixture parameter {param!r} for {name}") from exc
    return factory(value)
