"""Run configuration: a single JSON document, schema-validated with unknown
keys rejected, plus dotted-path command-line overrides."""

from __future__ import annotations

import copy
import json
from typing import Any

import numpy as np


class ConfigError(Exception):
    """Raised for schema violations; the message carries the field path."""


# Schema nodes: dict -> nested block; tuple -> (type(s), default); lists of
# scalars are typed by ("list", elem_type, default).
_NUMBER = (int, float)

SCHEMA: dict = {
    "spin": {"two_I": (int, 7)},
    "static": {
        "b0_tesla": (_NUMBER, 1.384),
        "gamma_n_hz_per_tesla": (_NUMBER, 5.55e6),
        "f_q_hz": (_NUMBER, 28e3),
        "quad_tensor_hz": (("list_or_none",), None),
    },
    "calibration": {"kappa_hz_per_mv": (_NUMBER, 163.4 / 22.86)},
    "noise": {
        "preset": ((str, type(None)), None),
        "alpha": (_NUMBER, 1.0),
        "readout_flip": ((float, int, type(None)), None),
    },
    "seed": (int, 12345),
    "output_dir": (str, "out"),
    "rabi": {
        "f_rabi_hz": ((float, int, type(None)), None),
        "amplitude_mv": ((float, int, type(None)), 22.86),
        "subspace_two_I": ((int, type(None)), None),
        "duration_s": (_NUMBER, 0.02),
        "n_samples": (int, 400),
        "amplitude_sweep_mv": (("list_or_none",), None),
    },
    "cat": {
        "method": (str, "givens"),
        "orient": (str, "z"),
        "subspace_two_I": (int, 7),
        "f_rabi_hz": (_NUMBER, 163.4),
        "parity_n_phi": (int, 181),
        "wait_times_s": (("list_or_none",), None),
        "frame_phase_offset_rad": (_NUMBER, 0.0),
    },
    "tomography": {
        "mode": (str, "simulate"),
        "state": (str, "cat:axis=z,xi=1.5707963267948966"),
        "shots_per_axis": (int, 15),
        "record_file": ((str, type(None)), None),
        "n_bootstrap": (int, 1000),
        "n_seeds": (int, 100),
    },
    "wigner": {
        "state": (str, "cat:axis=z,xi=3.141592653589793"),
        "n_theta": (int, 181),
        "n_phi": (int, 361),
        "projection": (str, "hammer"),
    },
    "catcode": {
        "spins_two_I": (("list",), [7, 5]),
        "max_iz_power": (int, 3),
    },
    "floquet": {
        "ratio_start": (_NUMBER, 1e-3),
        "ratio_stop": (_NUMBER, 1e-1),
        "ratio_count": (int, 13),
        "methods": (("list",), ["exact", "magnus1"]),
        "mark_ratio": ((float, int, type(None)), 1e-2),
    },
}


def default_config() -> dict:
    def build(node):
        if isinstance(node, dict):
            return {k: build(v) for k, v in node.items()}
        kinds, default = node
        return copy.deepcopy(default)

    return build(SCHEMA)


def _validate_node(value, node, path: str) -> Any:
    if isinstance(node, dict):
        if not isinstance(value, dict):
            raise ConfigError(f"{path or '<root>'}: expected an object")
        for key in value:
            if key not in node:
                raise ConfigError(f"{path + '.' if path else ''}{key}: unknown key")
        out = {}
        for key, sub in node.items():
            sub_path = f"{path}.{key}" if path else key
            if key in value:
                out[key] = _validate_node(value[key], sub, sub_path)
            else:
                out[key] = (
                    _validate_node(value.get(key, {}), sub, sub_path)
                    if isinstance(sub, dict)
                    else copy.deepcopy(sub[1])
                )
        return out
    kinds, default = node
    if isinstance(kinds, tuple) and kinds and isinstance(kinds[0], str):
        marker = kinds[0]
        if marker == "list":
            if not isinstance(value, list):
                raise ConfigError(f"{path}: expected a list")
        elif marker == "list_or_none":
            if value is not None and not isinstance(value, list):
                raise ConfigError(f"{path}: expected a list or null")
        else:
            raise ConfigError(f"{path}: unknown schema marker {marker!r}")
        return copy.deepcopy(value)
    expected = kinds if isinstance(kinds, tuple) else (kinds,)
    if isinstance(value, bool) and bool not in expected:
        raise ConfigError(f"{path}: expected {_names(expected)}, got a boolean")
    if not isinstance(value, expected):
        raise ConfigError(f"{path}: expected {_names(expected)}, got {type(value).__name__}")
    return value


def _names(kinds: tuple) -> str:
    return "|".join(k.__name__ for k in kinds)


def validate_config(doc: dict) -> dict:
    """Fill defaults and reject unknown keys / wrong types; returns the full config."""
    return _validate_node(doc, SCHEMA, "")


def load_config(path: str | None, overrides: list[str] | None = None) -> dict:
    if path is None:
        doc: dict = {}
    else:
        with open(path) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON: {exc}") from exc
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} must look like dotted.path=value")
        dotted, raw = item.split("=", 1)
        _apply_override(doc, dotted.strip(), raw.strip())
    return validate_config(doc)


def _apply_override(doc: dict, dotted: str, raw: str) -> None:
    keys = dotted.split(".")
    cur = doc
    for key in keys[:-1]:
        cur = cur.setdefault(key, {})
        if not isinstance(cur, dict):
            raise ConfigError(f"{dotted}: {key} is not an object")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw  # bare strings allowed
    cur[keys[-1]] = value


def canonical_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def config_hash(doc: dict) -> str:
    import hashlib

    return hashlib.sha256(canonical_json(doc).encode()).hexdigest()


def quad_tensor_from_config(static_cfg: dict) -> np.ndarray | None:
    raw = static_cfg.get("quad_tensor_hz")
    if raw is None:
        return None
    arr = np.asarray(raw, dtype=float)
    if arr.shape != (3, 3):
        raise ConfigError("static.quad_tensor_hz: expected a 3x3 matrix")
    return arr
