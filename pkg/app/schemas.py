"""
JSON schemas for operator files, setting files and run reports.
"""

COMPLEX_ENTRY: dict = {
    "type": "array",
    "minItems": 2,
    "maxItems": 2,
    "items": {"type": "number"},
}

MATRIX: dict = {
    "type": "array",
    "minItems": 1,
    "items": {"type": "array", "minItems": 1, "items": COMPLEX_ENTRY},
}

DIMS: dict = {
    "type": "array",
    "minItems": 2,
    "maxItems": 2,
    "items": {"type": "integer", "minimum": 1},
}

METADATA: dict = {
    "type": "object",
    "additionalProperties": {"type": "string"},
}

OPERATOR_FILE_SCHEMA: dict = {
    "type": "object",
    "required": ["kind", "dims"],
    "properties": {
        "kind": {"type": "string", "enum": ["state", "effect", "observable", "povm"]},
        "dims": DIMS,
        "matrix": MATRIX,
        "matrices": {"type": "array", "minItems": 1, "items": MATRIX},
        "metadata": METADATA,
    },
    "oneOf": [
        {"properties": {"kind": {"const": "povm"}}, "required": ["matrices"]},
        {"properties": {"kind": {"enum": ["state", "effect", "observable"]}}, "required": ["matrix"]},
    ],
    "additionalProperties": False,
}

_SINGLE_STATE: dict = {
    "type": "object",
    "required": ["kind", "dims", "matrix"],
    "properties": {
        "kind": {"const": "state"},
        "dims": DIMS,
        "matrix": MATRIX,
        "metadata": METADATA,
    },
    "additionalProperties": False,
}

SETTING_FILE_SCHEMA: dict = {
    "type": "object",
    "required": ["kind", "rho_a0", "rho_a1", "rho_b0", "rho_b1", "observable"],
    "properties": {
        "kind": {"const": "setting"},
        "rho_a0": _SINGLE_STATE,
        "rho_a1": _SINGLE_STATE,
        "rho_b0": _SINGLE_STATE,
        "rho_b1": _SINGLE_STATE,
        "observable": {
            "type": "object",
            "required": ["kind", "dims", "matrix"],
            "properties": {
                "kind": {"const": "observable"},
                "dims": DIMS,
                "matrix": MATRIX,
                "metadata": METADATA,
            },
            "additionalProperties": False,
        },
        "metadata": METADATA,
    },
    "additionalProperties": False,
}

RUN_REPORT_SCHEMA: dict = {
    "type": "object",
    "required": ["command", "run_id", "inputs", "config", "results", "version"],
    "properties": {
        "command": {
            "type": "string",
            "enum": ["dvalue", "classify", "maximize", "simulate", "teleport", "renormalize"],
        },
        "run_id": {"type": "string"},
        "inputs": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["path", "sha256"],
                "properties": {
                    "path": {"type": "string"},
                    "sha256": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
                },
            },
        },
        "config": {
            "type": "object",
            "required": ["tolerances"],
            "properties": {
                "seed": {"type": ["integer", "null"]},
                "tolerances": {
                    "type": "object",
                    "additionalProperties": {"type": "number"},
                },
            },
        },
        "results": {"type": "object"},
        "version": {"type": "string"},
    },
}

ERROR_SCHEMA: dict = {
    "type": "object",
    "required": ["error", "invariant", "detail"],
    "properties": {
        "error": {"type": "string"},
        "invariant": {"type": "string"},
        "detail": {"type": "string"},
    },
}
