"""
Operator files: JSON documents with complex entries stored as [re, im] pairs.

    {"kind": "effect", "dims": [2, 2], "matrix": [[[0.5, 0.0], ...], ...]}

``dims`` of [d, 1] marks a single-system object. Observables store M_1.
Setting files bundle four states and an observable under kind "setting".
Anywhere a path is accepted, ``fixture:<name>`` resolves a bundled fixture.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Union

import jsonschema
import numpy as np

from app.dual_chsh import ChshSetting
from app.errors import DimMismatch, InvalidOperatorFile
from app.fixtures import load_fixture
from app.linalg_core import OperatorMatrix
from app.quantum_objects import BinaryObservable, Effect, Povm, QuantumState
from app.schemas import OPERATOR_FILE_SCHEMA, SETTING_FILE_SCHEMA

logger = logging.getLogger("dualbell.operator_io")

FIXTURE_PREFIX = "fixture:"

QuantumObject = Union[QuantumState, Effect, BinaryObservable, Povm]
Loaded = Union[QuantumObject, ChshSetting]


@dataclass(frozen=True)
class InputRecord:
    path: str
    sha256: str

    def to_dict(self) -> dict:
        return {"path": self.path, "sha256": self.sha256}


# ---------------------------------------------------------------------------
# Matrix encoding
# ---------------------------------------------------------------------------

def encode_matrix(entries: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(entries, dtype=complex)]


def decode_matrix(rows: list) -> np.ndarray:
    width = {len(row) for row in rows}
    if len(width) != 1:
        raise InvalidOperatorFile("matrix rows have different lengths")
    arr = np.array(rows, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def _split_of(dims: list[int]) -> tuple[int, int] | None:
    d_a, d_b = dims
    return None if d_b == 1 else (d_a, d_b)


def _operator(rows: list, dims: list[int]) -> OperatorMatrix:
    entries = decode_matrix(rows)
    if entries.shape[0] != entries.shape[1]:
        raise DimMismatch(f"matrix is {entries.shape[0]}x{entries.shape[1]}, not square")
    if entries.shape[0] != dims[0] * dims[1]:
        raise DimMismatch(
            f"matrix dimension {entries.shape[0]} != dims product {dims[0]}*{dims[1]}",
            invariant="matrix_dim_equals_dims_product",
        )
    return OperatorMatrix(entries, _split_of(dims))


# ---------------------------------------------------------------------------
# Documents <-> objects
# ---------------------------------------------------------------------------

def _validate(doc: Any, schema: dict) -> None:
    try:
        jsonschema.validate(instance=doc, schema=schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InvalidOperatorFile(f"{where}: {exc.message}") from exc


def parse_document(doc: Any) -> Loaded:
    """Validate a JSON document and build the object it describes."""
    if isinstance(doc, dict) and doc.get("kind") == "setting":
        _validate(doc, SETTING_FILE_SCHEMA)
        states = {key: QuantumState(_operator(doc[key]["matrix"], doc[key]["dims"]))
                  for key in ("rho_a0", "rho_a1", "rho_b0", "rho_b1")}
        observable = doc["observable"]
        m1 = Effect(_operator(observable["matrix"], observable["dims"]))
        return ChshSetting(
            (states["rho_a0"], states["rho_a1"]),
            (states["rho_b0"], states["rho_b1"]),
            BinaryObservable.from_effect(m1),
        )

    _validate(doc, OPERATOR_FILE_SCHEMA)
    kind, dims = doc["kind"], doc["dims"]
    if kind == "povm":
        return Povm(tuple(Effect(_operator(rows, dims)) for rows in doc["matrices"]))
    op = _operator(doc["matrix"], dims)
    if kind == "state":
        return QuantumState(op)
    if kind == "effect":
        return Effect(op)
    return BinaryObservable.from_effect(Effect(op))


def _dims_of(op: OperatorMatrix) -> list[int]:
    return list(op.dims_split) if op.dims_split else [op.dim, 1]


def to_document(obj: Loaded, metadata: dict[str, str] | None = None) -> dict:
    """Inverse of parse_document."""
    if isinstance(obj, ChshSetting):
        doc: dict[str, Any] = {"kind": "setting"}
        for key, state in zip(("rho_a0", "rho_a1", "rho_b0", "rho_b1"), (*obj.rho_a, *obj.rho_b)):
            doc[key] = to_document(state)
        observable = obj.observable
        if observable.dims_split is None:
            split = obj.dims
            observable = BinaryObservable.from_effect(
                Effect(observable.m_plus.op.with_split(split)), observable.keep_probability
            )
        doc["observable"] = to_document(observable)
    elif isinstance(obj, Povm):
        first = obj.effects[0].op
        doc = {"kind": "povm", "dims": _dims_of(first), "matrices": [encode_matrix(e.op.entries) for e in obj]}
    else:
        kind = {QuantumState: "state", Effect: "effect", BinaryObservable: "observable"}[type(obj)]
        op = obj.m_plus.op if isinstance(obj, BinaryObservable) else obj.op
        doc = {"kind": kind, "dims": _dims_of(op), "matrix": encode_matrix(op.entries)}
    if metadata:
        doc["metadata"] = dict(metadata)
    return doc


def canonical_bytes(doc: dict) -> bytes:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------

def load(path: str | Path) -> tuple[Loaded, InputRecord]:
    """Load an operator/setting file or ``fixture:<name>``; returns the object and its hash record."""
    text = str(path)
    if text.startswith(FIXTURE_PREFIX):
        obj = load_fixture(text[len(FIXTURE_PREFIX):])
        digest = hashlib.sha256(canonical_bytes(to_document(obj))).hexdigest()
        logger.debug('{"event":"fixture_loaded","name":"%s"}', text)
        return obj, InputRecord(text, digest)

    file_path = Path(path)
    try:
        raw = file_path.read_bytes()
    except OSError as exc:
        raise InvalidOperatorFile(f"cannot read {file_path}: {exc.strerror}") from exc
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InvalidOperatorFile(f"{file_path} is not valid JSON: {exc}") from exc
    obj = parse_document(doc)
    logger.debug('{"event":"operator_file_loaded","path":"%s","kind":"%s"}', file_path, doc.get("kind"))
    return obj, InputRecord(str(file_path), hashlib.sha256(raw).hexdigest())


def save(obj: Loaded, path: str | Path, metadata: dict[str, str] | None = None) -> InputRecord:
    payload = json.dumps(to_document(obj, metadata), indent=2).encode("utf-8")
    file_path = Path(path)
    file_path.write_bytes(payload + b"\n")
    return InputRecord(str(file_path), hashlib.sha256(payload + b"\n").hexdigest())
