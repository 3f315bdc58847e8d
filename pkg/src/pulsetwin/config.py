"""Run configuration: schema, loading, overrides, and object assembly.

One JSON document describes a full run: device model, signal chain,
gate-set, the calibrated parameter groups, per-stage optimizer options
and the blackbox perturbation. The schema rejects unknown keys so typos
die at load time, before any simulation work happens.
"""

import json

import jsonschema
import numpy as np

from .experiment import Experiment, make_blackbox
from .gateset import gateset_from_dict
from .model import UNITS, DeviceModel
from .signals import SignalChain


class ConfigError(Exception):
    pass


_QUANTITY = {
    "type": "object",
    "properties": {
        "value": {"type": "number"},
        "min": {"type": "number"},
        "max": {"type": "number"},
        "unit": {"type": "string", "enum": list(UNITS)},
    },
    "required": ["value"],
    "additionalProperties": False,
}

_ADDRESS = {
    "oneOf": [
        {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2},
        {"type": "array", "items": {"type": "string"}, "minItems": 4, "maxItems": 4},
    ]
}

_OPT_MAP = {
    "type": "array",
    "items": {"type": "array", "items": _ADDRESS, "minItems": 1},
}

_CMAES_OPTIONS = {
    "type": "object",
    "properties": {
        "popsize": {"type": "integer", "minimum": 2},
        "maxfevals": {"type": "integer", "minimum": 1},
        "tolfun": {"type": "number"},
        "ftarget": {"type": "number"},
        "stop_at_convergence": {"type": "integer", "minimum": 1},
        "stop_at_sigma": {"type": "number"},
        "spread": {"type": "number"},
        "init_point": {"type": "boolean"},
    },
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "run_name": {"type": "string"},
        "seed": {"type": "integer"},
        "model": {
            "type": "object",
            "properties": {
                "qubits": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "properties": {
                            "name": {"type": "string"},
                            "freq": _QUANTITY,
                            "anhar": _QUANTITY,
                            "hilbert_dim": {"type": "integer", "minimum": 2},
                        },
                        "required": ["name", "freq", "anhar"],
                        "additionalProperties": False,
                    },
                },
                "drives": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "properties": {
                            "name": {"type": "string"},
                            "connected": {"type": "array", "items": {"type": "string"}},
                        },
                        "required": ["name", "connected"],
                        "additionalProperties": False,
                    },
                },
            },
            "required": ["qubits", "drives"],
            "additionalProperties": False,
        },
        "chain": {
            "type": "object",
            "properties": {
                "devices": {
                    "type": "object",
                    "additionalProperties": {
                        "type": "object",
                        "properties": {
                            "kind": {
                                "type": "string",
                                "enum": ["LO", "AWG", "DigitalToAnalog", "Mixer", "VoltsToHertz"],
                            },
                            "params": {"type": "object", "additionalProperties": {"type": "number"}},
                        },
                        "required": ["kind"],
                        "additionalProperties": False,
                    },
                },
                "chains": {
                    "type": "object",
                    "additionalProperties": {
                        "type": "object",
                        "additionalProperties": {"type": "array", "items": {"type": "string"}},
                    },
                },
            },
            "required": ["devices", "chains"],
            "additionalProperties": False,
        },
        "gateset": {
            "type": "object",
            "properties": {
                "drive": {"type": "string"},
                "target": {"type": "integer", "minimum": 0},
                "t_final": {"type": "number", "exclusiveMinimum": 0},
                "carrier_freq": {"type": "number"},
                "envelope": {
                    "type": "object",
                    "properties": {
                        name: _QUANTITY
                        for name in ("amp", "t_final", "sigma", "delta",
                                     "freq_offset", "xy_angle", "framechange")
                    },
                    "additionalProperties": False,
                },
            },
            "additionalProperties": False,
        },
        "opt_map": _OPT_MAP,
        "optimal_control": {
            "type": "object",
            "properties": {
                "maxfun": {"type": "integer", "minimum": 1},
                "eps": {"type": "number", "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
        "calibration": {
            "type": "object",
            "properties": {
                **_CMAES_OPTIONS["properties"],
                "orbit": {
                    "type": "object",
                    "properties": {
                        "rb_number": {"type": "integer", "minimum": 1},
                        "rb_length": {"type": "integer", "minimum": 1},
                        "shots": {"type": "integer", "minimum": 1},
                        "target": {"type": "integer", "minimum": 0},
                    },
                    "additionalProperties": False,
                },
            },
            "additionalProperties": False,
        },
        "model_learning": {
            "type": "object",
            "properties": {
                "opt_map": _OPT_MAP,
                "sampling": {"type": "string", "enum": ["high_std", "even", "random"]},
                "batch_sizes": {"type": "object", "additionalProperties": {"type": "integer", "minimum": 1}},
                "datafiles": {"type": "object", "additionalProperties": {"type": "string"}},
                "state_labels": {
                    "type": "array",
                    "items": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                },
                "algorithm": {"type": "string", "enum": ["cma_pre_lbfgs"]},
                "cmaes": _CMAES_OPTIONS,
                "lbfgs": {
                    "type": "object",
                    "properties": {
                        "maxfun": {"type": "integer", "minimum": 1},
                        "eps": {"type": "number", "exclusiveMinimum": 0},
                    },
                    "additionalProperties": False,
                },
            },
            "required": ["opt_map"],
            "additionalProperties": False,
        },
        "blackbox": {
            "type": "object",
            "properties": {
                "overrides": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {
                            "qubit": {"type": "string"},
                            "param": {"type": "string"},
                            "value": {"type": "number"},
                        },
                        "required": ["qubit", "param", "value"],
                        "additionalProperties": False,
                    },
                },
                "seed": {"type": "integer"},
            },
            "additionalProperties": False,
        },
    },
    "required": ["model", "chain", "gateset", "opt_map"],
    "additionalProperties": False,
}


def validate_config(cfg: dict):
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as err:
        path = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"config error at {path}: {err.message}") from err


def apply_override(cfg: dict, assignment: str):
    """Apply one --set dotted.path=value override in place.

    The value is parsed as JSON when possible, else taken as a string;
    intermediate objects must already exist (silent key invention would
    defeat the schema's typo protection; the final key may be new but is
    still schema-checked afterwards).
    """
    if "=" not in assignment:
        raise ConfigError(f"--set expects key=value, got {assignment!r}")
    path, raw = assignment.split("=", 1)
    keys = path.split(".")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = cfg
    for k in keys[:-1]:
        if not isinstance(node, dict) or k not in node:
            raise ConfigError(f"--set path {path!r}: no such section {k!r}")
        node = node[k]
    if not isinstance(node, dict):
        raise ConfigError(f"--set path {path!r} does not address an object")
    node[keys[-1]] = value


def load_config(path, overrides=(), seed=None) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: {err}") from err
    for assignment in overrides:
        apply_override(cfg, assignment)
    if seed is not None:
        cfg["seed"] = int(seed)
    cfg.setdefault("seed", 0)
    cfg.setdefault("run_name", "run")
    validate_config(cfg)
    return cfg


def build_experiment(cfg: dict, threads: int = 1) -> Experiment:
    model = DeviceModel.from_dict(cfg["model"])
    chain = SignalChain(cfg["chain"])
    instructions = gateset_from_dict(cfg["gateset"])
    exp = Experiment(model, chain, instructions, opt_map=cfg["opt_map"], threads=threads)
    return exp


def build_blackbox(cfg: dict, exp: Experiment, state_labels=None, seed=None):
    bb_cfg = cfg.get("blackbox", {})
    if seed is None:
        seed = bb_cfg.get("seed")
    if seed is None:
        # One fixed spawn position so the blackbox stream is independent
        # of however many other consumers the run spawns.
        seed = np.random.SeedSequence(cfg["seed"]).spawn(1)[0]
    kwargs = {} if state_labels is None else {"state_labels": state_labels}
    return make_blackbox(exp, bb_cfg.get("overrides", []), seed, **kwargs)
