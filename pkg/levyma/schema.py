"""JSON Schema of the TOML experiment configuration.

The schema is the single description of accepted keys; :mod:`levyma.config`
validates a parsed file against it before building dataclasses, so unknown
keys and wrong types fail early with the offending key path.
"""

_NUMBER = {"type": "number"}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
_NON_NEGATIVE = {"type": "number", "minimum": 0}
_COUNT = {"type": "integer", "minimum": 1}


def _section(properties, required=()):
    schema = {"type": "object", "properties": properties, "additionalProperties": False}
    if required:
        schema["required"] = list(required)
    return schema


TEST_FUNCTION_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["bump", "box", "tail", "zero"]},
        "center": _NUMBER,
        "width": _POSITIVE,
        "lo": _NUMBER,
        "hi": _NUMBER,
        "t": _POSITIVE,
        "scale": _NUMBER,
    },
    "required": ["kind"],
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "levyma experiment configuration",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "levy": _section(
            {
                "kind": {"enum": ["gamma", "tabulated"]},
                "b": _POSITIVE,
                "a0": _NUMBER,
                "tau": _NON_NEGATIVE,
                "eps": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 0.5},
                "path": {"type": "string"},
            }
        ),
        "kernel": _section(
            {
                "kind": {"enum": ["exp_window", "indicator_cube", "tabulated"]},
                "lambda": _POSITIVE,
                "theta": _POSITIVE,
                "sides": {"type": "array", "items": _POSITIVE, "minItems": 1, "maxItems": 2},
                "panels": _COUNT,
                "path": {"type": "string"},
            }
        ),
        "sim": _section(
            {
                "delta": _POSITIVE,
                "h": _POSITIVE,
                "window_side": _COUNT,
                "dim": {"enum": [1, 2]},
                "seed": {"type": "integer", "minimum": 0},
                "gamma": _NUMBER,
                "substeps": _COUNT,
            }
        ),
        "grid": _section(
            {
                "real_half_width": _POSITIVE,
                "real_points": {"type": "integer", "minimum": 16},
                "log_s_lo": _NUMBER,
                "log_s_hi": _NUMBER,
                "log_points": {"type": "integer", "minimum": 16},
                "ecf_points_per_unit": _POSITIVE,
            }
        ),
        "estimator": _section(
            {
                "bandwidth_C": _POSITIVE,
                "bandwidth_floor": _NON_NEGATIVE,
                "eps": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 0.5},
                "eta": _NUMBER,
                "cutoff_C": _POSITIVE,
                "cutoff_exponent": _NON_NEGATIVE,
                "cutoff_floor": _NON_NEGATIVE,
                "frozen_cutoff": _POSITIVE,
                "route_tol": _POSITIVE,
            }
        ),
        "experiment": _section(
            {
                "scenario": {"enum": ["clt", "exp_window", "consistency"]},
                "window_sides": {"type": "array", "items": _COUNT, "minItems": 1},
                "reps": _COUNT,
                "seed": {"type": "integer", "minimum": 0},
                "threads": _COUNT,
                "test_functions": {"type": "array", "items": TEST_FUNCTION_SCHEMA, "minItems": 1},
                "mc_sites": _COUNT,
                "sigma_mode": {"enum": ["model_mc", "plugin"]},
                "level": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "inequality_t": _NUMBER,
                "inequality_K": _POSITIVE,
                "inequality_x": {"type": "array", "items": _NON_NEGATIVE, "minItems": 1},
                "beta1": _POSITIVE,
                "beta2": _POSITIVE,
            }
        ),
        "acceptance": {
            "type": "object",
            "additionalProperties": {"type": "string"},
        },
    },
}
