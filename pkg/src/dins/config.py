"""Run configuration: a single YAML file layered over the defaults below."""

from __future__ import annotations

import copy
import hashlib
import json

import yaml

from .errors import ConfigError
from .features import QuantizerTables
from .spatial import WindowHierarchy

DEFAULTS = {
    "hierarchy": {"l": 28, "n": 4},
    "quantizers": {
        "length_edges": list(QuantizerTables().length_edges),
        "orientation_bins": 16,
        "angle_bins": 12,
    },
    "frontend": {"threshold": 128, "spur_length": 2, "tolerance": 2.5, "corner_deg": 30.0},
    "spatial": {"point_tolerance": 3},
    "learning": {"sigma": 0.6, "exponent_c": 0.3, "n_stab": 10, "max_dormant_ratio": 4},
    "train": {"response_ratio": 0.5},
    "forgetting": {"min_hits": 2, "max_age": 30},
    "attention": {"t_ex_budget": 2, "seed": 0},
    "maps": {"grid": 64, "seed": 0},
    "dataset": {
        "train_images": "data/mnist/train-images-idx3-ubyte",
        "train_labels": "data/mnist/train-labels-idx1-ubyte",
        "test_images": "data/mnist/t10k-images-idx3-ubyte",
        "test_labels": "data/mnist/t10k-labels-idx1-ubyte",
    },
    "subset": {"train": 10000, "test": 2000, "seed": 0},
    "eval": {"sanity_bound": 0.02},
}


def _merge(base: dict, over: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key '{where}'")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"'{where}' must be a mapping")
            out[key] = _merge(base[key], val, where + ".")
        else:
            out[key] = val
    return out


def _number(cfg, section, key, lo=None, hi=None, integer=False, lo_open=False, hi_open=False, optional=False):
    v = cfg[section][key]
    if v is None and optional:
        return
    kinds = (int,) if integer else (int, float)
    if isinstance(v, bool) or not isinstance(v, kinds):
        raise ConfigError(f"{section}.{key} must be {'an integer' if integer else 'a number'}, got {v!r}")
    if lo is not None and (v <= lo if lo_open else v < lo):
        raise ConfigError(f"{section}.{key}={v} below its range")
    if hi is not None and (v >= hi if hi_open else v > hi):
        raise ConfigError(f"{section}.{key}={v} above its range")


def validate(cfg: dict) -> dict:
    _number(cfg, "hierarchy", "l", 3, integer=True)
    _number(cfg, "hierarchy", "n", 2, integer=True)
    WindowHierarchy(cfg["hierarchy"]["l"], cfg["hierarchy"]["n"])
    q = cfg["quantizers"]
    QuantizerTables(tuple(float(x) for x in q["length_edges"]), q["orientation_bins"], q["angle_bins"])
    _number(cfg, "frontend", "threshold", 0, 255, integer=True)
    _number(cfg, "frontend", "spur_length", 0, integer=True)
    _number(cfg, "frontend", "tolerance", 0, lo_open=True)
    _number(cfg, "frontend", "corner_deg", 0, 180, lo_open=True, hi_open=True)
    _number(cfg, "spatial", "point_tolerance", 0, optional=True)
    _number(cfg, "learning", "sigma", 0.6, 1, hi_open=True)
    _number(cfg, "learning", "exponent_c", 0, 1, lo_open=True, hi_open=True)
    _number(cfg, "learning", "n_stab", 2, integer=True)
    _number(cfg, "learning", "max_dormant_ratio", 0, integer=True)
    _number(cfg, "train", "response_ratio", 0, 1, lo_open=True)
    _number(cfg, "forgetting", "min_hits", 1, integer=True)
    _number(cfg, "forgetting", "max_age", 0, integer=True)
    _number(cfg, "attention", "t_ex_budget", 2, integer=True)
    _number(cfg, "attention", "seed", integer=True)
    _number(cfg, "maps", "grid", 2, integer=True)
    _number(cfg, "maps", "seed", integer=True)
    _number(cfg, "subset", "train", 0, integer=True)
    _number(cfg, "subset", "test", 0, integer=True)
    _number(cfg, "subset", "seed", integer=True)
    _number(cfg, "eval", "sanity_bound", 0, 1)
    return cfg


def make_config(overrides: dict | None = None) -> dict:
    return validate(_merge(DEFAULTS, overrides or {}))


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    return make_config(data)


def dump_config(cfg: dict) -> str:
    return yaml.safe_dump(cfg, sort_keys=False)


def tables_of(cfg: dict) -> QuantizerTables:
    q = cfg["quantizers"]
    return QuantizerTables(tuple(float(x) for x in q["length_edges"]), q["orientation_bins"], q["angle_bins"])


def frontend_hash(cfg: dict) -> str:
    """Fingerprint of everything that shapes the input modes."""
    blob = json.dumps(
        {
            "hierarchy": cfg["hierarchy"],
            "tables": tables_of(cfg).table_hash(),
            "frontend": cfg["frontend"],
            "tolerance": cfg["spatial"]["point_tolerance"],
        },
        sort_keys=True,
    )
    return hashlib.sha256(blob.encode()).hexdigest()[:16]
