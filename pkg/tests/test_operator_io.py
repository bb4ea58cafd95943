from __future__ import annotations

import hashlib
import json

import numpy as np
import pytest

from app.dual_chsh import ChshSetting, d_value
from app.errors import DimMismatch, InvalidEffect, InvalidOperatorFile
from app.fixtures import epsilon_effect, fixture_names, load_fixture
from app.operator_io import encode_matrix, load, parse_document, save, to_document
from app.quantum_objects import (
    BinaryObservable,
    Effect,
    Povm,
    QuantumState,
    bell_povm,
    random_effect,
    random_state,
)


def _effect_doc(matrix, dims=(2, 2), kind="effect") -> dict:
    return {"kind": kind, "dims": list(dims), "matrix": encode_matrix(np.asarray(matrix))}


class TestDocuments:
    def test_effect_round_trip(self, rng):
        effect = random_effect(6, rng, (2, 3))
        back = parse_document(json.loads(json.dumps(to_document(effect))))
        assert isinstance(back, Effect)
        assert back.dims_split == (2, 3)
        assert np.max(np.abs(back.op.entries - effect.op.entries)) <= 1e-15

    def test_single_system_state(self, rng):
        state = random_state(3, rng)
        doc = to_document(state)
        assert doc["dims"] == [3, 1]
        back = parse_document(doc)
        assert isinstance(back, QuantumState)
        assert back.dims_split is None

    def test_observable_stores_m_plus(self):
        effect = epsilon_effect(0.2)
        doc = to_document(BinaryObservable.from_effect(effect))
        assert doc["kind"] == "observable"
        back = parse_document(doc)
        assert isinstance(back, BinaryObservable)
        assert np.allclose(back.m_plus.op.entries, effect.op.entries)

    def test_povm_and_setting(self, violating):
        povm = parse_document(to_document(bell_povm()))
        assert isinstance(povm, Povm) and len(povm) == 4
        setting = parse_document(json.loads(json.dumps(to_document(violating))))
        assert isinstance(setting, ChshSetting)
        assert d_value(setting) == pytest.approx(d_value(violating), abs=1e-12)

    def test_metadata_is_kept_out_of_the_object(self):
        doc = to_document(epsilon_effect(), {"command": "classify"})
        assert doc["metadata"] == {"command": "classify"}
        assert isinstance(parse_document(doc), Effect)


class TestValidation:
    def test_dimension_mismatch(self):
        with pytest.raises(DimMismatch) as info:
            parse_document(_effect_doc(np.eye(4) / 2, dims=(3, 3)))
        assert info.value.invariant == "matrix_dim_equals_dims_product"
        assert info.value.exit_code == 2

    @pytest.mark.parametrize(
        "doc",
        [
            {"kind": "effect", "dims": [2, 2]},
            {"kind": "banana", "dims": [2, 2], "matrix": [[[1, 0]]]},
            {"kind": "effect", "dims": [2, 2], "matrix": [[1, 0], [0, 1]]},
            {"kind": "effect", "dims": [2], "matrix": [[[1, 0]]]},
            {"kind": "povm", "dims": [2, 2], "matrix": [[[1, 0]]]},
            "not an object",
        ],
    )
    def test_schema_errors(self, doc):
        with pytest.raises(InvalidOperatorFile) as info:
            parse_document(doc)
        assert info.value.exit_code == 2

    def test_physical_validation_runs_after_parsing(self):
        with pytest.raises(InvalidEffect):
            parse_document(_effect_doc(np.eye(4) * 2))


class TestFiles:
    def test_save_and_load(self, tmp_path, rng):
        effect = random_effect(4, rng, (2, 2))
        path = tmp_path / "effect.json"
        written = save(effect, path, {"source": "test"})
        loaded, record = load(path)
        assert record.sha256 == hashlib.sha256(path.read_bytes()).hexdigest() == written.sha256
        assert np.max(np.abs(loaded.op.entries - effect.op.entries)) <= 1e-15

    def test_unreadable_and_malformed(self, tmp_path):
        with pytest.raises(InvalidOperatorFile):
            load(tmp_path / "missing.json")
        bad = tmp_path / "bad.json"
        bad.write_text("{not json", encoding="utf-8")
        with pytest.raises(InvalidOperatorFile):
            load(bad)

    def test_fixture_hash_is_stable(self):
        first, record = load("fixture:violating_setting")
        _, again = load("fixture:violating_setting")
        assert isinstance(first, ChshSetting)
        assert record.path == "fixture:violating_setting"
        assert record.sha256 == again.sha256


class TestFixtures:
    def test_every_fixture_loads(self):
        for name in fixture_names():
            assert load_fixture(name) is not None

    def test_parameters(self):
        assert load_fixture("epsilon_effect@0.25").trace() == pytest.approx(0.5)
        a = load_fixture("random_effect_3x3@3").op.entries
        b = load_fixture("random_effect_3x3@3").op.entries
        assert np.array_equal(a, b)

    @pytest.mark.parametrize(
        "spec",
        ["nope", "bell_povm@1", "epsilon_effect@abc", "epsilon_effect@0.9"],
    )
    def test_bad_fixture_specs(self, spec):
        with pytest.raises(InvalidOperatorFile):
            load_fixture(spec)
