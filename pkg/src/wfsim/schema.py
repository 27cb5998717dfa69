"""JSON schemas (version v1) for every ``wfsim`` subcommand's ``--format json`` output."""
from __future__ import annotations

_NUM = {"type": "number"}
_NULLABLE_INT = {"type": ["integer", "null"]}
_SETTING = {"type": "string", "pattern": "^A[01]B[01]C[01]$"}
_SIGNS = {"type": "string", "pattern": "^[+-]{3}$"}

_REPORT = {
    "type": "object",
    "required": ["schema", "theta", "I", "sigma_I", "violated", "classical_bound", "mode",
                 "shots", "seed", "w_method", "phase_correction", "correlators", "counts"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": "v1"},
        "theta": _NUM,
        "I": {"type": "number", "minimum": 0},
        "sigma_I": {"type": "number", "minimum": 0},
        "violated": {"type": "boolean"},
        "classical_bound": _NUM,
        "mode": {"enum": ["analytic", "exact", "exact_postselect", "physical_rejection"]},
        "shots": _NULLABLE_INT,
        "seed": _NULLABLE_INT,
        "w_method": {"enum": ["rotation", "unitary", None]},
        "phase_correction": {"type": ["boolean", "null"]},
        "correlators": {
            "type": "array",
            "minItems": 8,
            "maxItems": 8,
            "items": {
                "type": "object",
                "required": ["setting", "E", "sigma_E", "n"],
                "additionalProperties": False,
                "properties": {
                    "setting": _SETTING,
                    "E": _NUM,
                    "sigma_E": {"type": "number", "minimum": 0},
                    "n": _NULLABLE_INT,
                },
            },
        },
        "counts": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["setting", "counts", "valid_shots", "attempted_shots"],
                        "properties": {
                            "setting": _SETTING,
                            "counts": {
                                "type": "object",
                                "propertyNames": _SIGNS,
                                "additionalProperties": {"type": "integer", "minimum": 0},
                            },
                            "valid_shots": {"type": "integer", "minimum": 0},
                            "attempted_shots": {"type": "integer", "minimum": 0},
                        },
                    },
                },
            ]
        },
    },
}


def _doc(kind: str, body: dict) -> dict:
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "$id": f"wfsim/{kind}/v1",
        "title": f"wfsim {kind} output",
        **body,
    }


_HISTOGRAM_BIN = {
    "type": "object",
    "required": ["bits", "exact"],
    "properties": {
        "bits": {"type": "string", "pattern": "^[01]+$"},
        "exact": {"type": "number", "minimum": 0, "maximum": 1},
        "count": {"type": "integer", "minimum": 0},
        "frequency": {"type": "number", "minimum": 0, "maximum": 1},
    },
}

_HISTOGRAM = {
    "type": "object",
    "required": ["kind", "schema", "wires", "method", "shots", "seed", "valid_shots", "bins"],
    "properties": {
        "schema": {"const": "v1"},
        "wires": {"type": "array", "items": {"type": "string"}},
        "method": {"enum": ["rotation", "unitary"]},
        "shots": _NULLABLE_INT,
        "seed": _NULLABLE_INT,
        "valid_shots": _NULLABLE_INT,
        "bins": {"type": "array", "items": _HISTOGRAM_BIN},
    },
}

SCHEMAS: dict[str, dict] = {
    "run": _doc("run", {
        "oneOf": [
            {
                "type": "object",
                "required": ["kind", "report"],
                "properties": {"kind": {"const": "run"}, "report": _REPORT},
            },
            {
                "type": "object",
                "required": ["kind", "schema", "theta", "setting", "mode", "E", "sigma_E", "n"],
                "properties": {
                    "kind": {"const": "setting"},
                    "schema": {"const": "v1"},
                    "theta": _NUM,
                    "setting": _SETTING,
                    "E": _NUM,
                    "sigma_E": {"type": "number", "minimum": 0},
                    "n": _NULLABLE_INT,
                },
            },
        ]
    }),
    "sweep": _doc("sweep", {
        "type": "object",
        "required": ["kind", "reports"],
        "properties": {
            "kind": {"const": "sweep"},
            "reports": {"type": "array", "minItems": 1, "items": _REPORT},
        },
    }),
    "w-state": _doc("w-state", {
        **_HISTOGRAM,
        "properties": {**_HISTOGRAM["properties"], "kind": {"const": "w-state"}},
    }),
    "fusion-demo": _doc("fusion-demo", {
        **_HISTOGRAM,
        "required": _HISTOGRAM["required"] + ["attempted_shots", "success_ratio", "success_probability"],
        "properties": {
            **_HISTOGRAM["properties"],
            "kind": {"const": "fusion-demo"},
            "attempted_shots": {"type": "integer", "minimum": 1},
            "success_ratio": {"type": "number", "minimum": 0, "maximum": 1},
            "success_probability": {"type": "number", "minimum": 0, "maximum": 1},
        },
    }),
    "export": _doc("export", {
        "type": "object",
        "required": ["kind", "schema", "path"],
        "properties": {
            "kind": {"const": "export"},
            "schema": {"const": "v1"},
            "path": {"type": ["string", "null"]},
            "bytes": {"type": "integer"},
            "sha256": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
            "qasm": {"type": "string"},
        },
    }),
    "classical-bound": _doc("classical-bound", {
        "type": "object",
        "required": ["kind", "schema", "strategies", "max_I", "distinct_values"],
        "properties": {
            "kind": {"const": "classical-bound"},
            "schema": {"const": "v1"},
            "strategies": {"const": 64},
            "max_I": _NUM,
            "distinct_values": {"type": "array", "items": _NUM},
        },
    }),
}
