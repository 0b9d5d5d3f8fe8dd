"""JSON schema for problem-spec files."""

from __future__ import annotations

_NUM = {"type": "number"}
_COMPLEX = {
    "oneOf": [
        _NUM,
        {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
    ]
}
_ORDER = {"oneOf": [_NUM, {"type": "string", "pattern": r"^(inf|\+inf|-?\d+(/\d+)?)$"}]}

_VANISHING = {
    "type": "object",
    "additionalProperties": False,
    "required": ["t", "order"],
    "properties": {
        "t": _NUM,
        "order": {"type": "number", "minimum": 0},
        "lower": {"type": "number", "exclusiveMinimum": 0},
        "upper": {"type": "number", "exclusiveMinimum": 0},
        "sign": {"enum": [-1, 1]},
    },
}

COEFFICIENT = {
    "oneOf": [
        _NUM,
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["polynomial"],
            "properties": {"polynomial": {"type": "array", "items": _COMPLEX, "minItems": 1}},
        },
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["named"],
            "properties": {
                "named": {"enum": ["flat_exp", "gauss_flat", "power"]},
                "amplitude": _COMPLEX,
                "lam": {"type": "number", "exclusiveMinimum": 0},
                "t0": _NUM,
                "p": {"type": "number", "minimum": 0},
            },
        },
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["factored"],
            "properties": {
                "factored": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["zeros", "remainder"],
                    "properties": {
                        "zeros": {"type": "array", "items": _VANISHING},
                        "remainder": {"type": "array", "items": _COMPLEX, "minItems": 1},
                    },
                }
            },
        },
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["sampled"],
            "properties": {"sampled": {"type": "array", "items": _COMPLEX, "minItems": 4}},
        },
    ]
}

_COEFFS_EXPLICIT = {
    "type": "object",
    "additionalProperties": False,
    "required": ["a2", "a1"],
    "properties": {
        "form": {"enum": ["operator", "normal"]},
        "a2": COEFFICIENT,
        "a1": {"type": "array", "items": COEFFICIENT, "minItems": 1},
        "a0": COEFFICIENT,
        "extra_monomials": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["m", "coef"],
                "properties": {"m": {"type": "integer", "minimum": 3}, "coef": COEFFICIENT},
            },
        },
    },
}

_COEFFS_PRESET = {
    "type": "object",
    "additionalProperties": False,
    "required": ["preset"],
    "properties": {
        "preset": {"enum": ["intro", "flat-ill-posed", "flat-well-posed", "fourth-order", "heat"]},
        "k": {"type": "number", "minimum": 0},
        "ell": {"type": "number", "minimum": 0},
    },
}

GENERATOR = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["gevrey", "exponential", "single", "table", "zero"]},
        "delta": {"type": "number", "exclusiveMinimum": 0},
        "s": {"type": "number", "minimum": 1},
        "rate": {"type": "number", "exclusiveMinimum": 0},
        "axis": {"type": "integer", "minimum": 1},
        "sign": {"enum": [-1, 1]},
        "amplitude": _COMPLEX,
        "xi": {"type": "array", "items": {"type": "integer"}, "minItems": 1},
        "entries": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["xi", "value"],
                "properties": {"xi": {"type": "array", "items": {"type": "integer"}}, "value": _COMPLEX},
            },
        },
    },
}

STRUCTURE = {
    "type": "object",
    "additionalProperties": False,
    "required": ["leading"],
    "properties": {
        "leading": {
            "enum": ["somewhere-positive", "strictly-negative", "identically-zero", "degenerate", "infinite-order"]
        },
        "t_star": _NUM,
        "t": _NUM,
        "interval": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
        "drifts": {"type": "array", "items": {"enum": ["zero", "nonzero"]}},
        "zeros": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["t", "p", "q"],
                "properties": {"t": _NUM, "p": _ORDER, "q": {"type": "array", "items": _ORDER, "minItems": 1}},
            },
        },
    },
}

_NS = {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1}

PROBE = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["flat", "fourth-order", "degenerate", "parabolic", "drift", "axis"]},
        "ns": _NS,
        "t": _NUM,
        "t_star": _NUM,
        "axis": {"type": "integer", "minimum": 1},
        "sign": {"enum": [-1, 1]},
        "varsigma": {"type": "number", "exclusiveMinimum": 0},
        "delta": {"type": "number", "exclusiveMinimum": 0},
        "point": {
            "type": "object",
            "additionalProperties": False,
            "required": ["t", "p", "q"],
            "properties": {"t": _NUM, "p": _ORDER, "q": {"type": "array", "items": _ORDER, "minItems": 1}},
        },
        "Gamma": {"type": "number", "exclusiveMinimum": 0},
        "gamma": {"type": "number", "exclusiveMinimum": 0},
        "ell": {"type": "integer", "minimum": 1},
        "floor": _NUM,
        "ceiling": _NUM,
    },
}

PROBLEM = {
    "type": "object",
    "additionalProperties": False,
    "required": ["dimension", "horizon"],
    "properties": {
        "dimension": {"type": "integer", "minimum": 1, "maximum": 3},
        "horizon": {"type": "number", "exclusiveMinimum": 0},
        "coefficients": {"oneOf": [_COEFFS_EXPLICIT, _COEFFS_PRESET]},
        "structure": STRUCTURE,
        "data": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"g": GENERATOR, "f": GENERATOR},
        },
        "solve": {
            "type": "object",
            "additionalProperties": False,
            "required": ["times", "truncation"],
            "properties": {
                "times": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
                "truncation": {"type": "integer", "minimum": 1},
                "nodes_per_unit": {"type": "integer", "minimum": 1},
                "adaptive": {"type": "boolean"},
            },
        },
        "probe": PROBE,
        "oracle": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "suite": {"enum": ["random", "file"]},
                "steps": {"type": "integer", "minimum": 1},
                "tolerance": {"type": "number", "exclusiveMinimum": 0},
                "nodes_per_unit": {"type": "integer", "minimum": 1},
                "adaptive": {"type": "boolean"},
                "max_freq": {"type": "integer", "minimum": 1},
            },
        },
    },
}
