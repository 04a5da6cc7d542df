"""Run configuration: defaults, JSON-schema validation, overrides and hashing.

A run configuration is a nested JSON object.  User files are deep-merged
over :data:`DEFAULTS`, command-line flags are applied last, and the result
is validated against the schema shipped in ``data/config.schema.json``
(unknown keys are rejected) before anything is computed.
"""
import copy
import hashlib
import json
from functools import lru_cache
from importlib import resources

import jsonschema

from .exceptions import ArgumentError

DEFAULTS = {
    "seed": 0,
    "out": "out",
    "jobs": 1,
    "synth": {"n_channels": 8, "n_classes": 4, "trials_per_class": 50,
              "fs_hz": 250.0, "trial_len_s": 4.0, "gain": 4.0,
              "noise_scale": 0.1, "onset_s": 0.0},
    "data": {"manifest": None, "features_dir": None, "checkpoint": None},
    "subject": None,
    "subjects": {},
    "epoch": {"t_min_s": 0.5, "t_max_s": 3.5},
    "filter": {"lo_hz": 7.0, "hi_hz": 30.0},
    "csp": {"n_components": 3, "eps_scale": 1e-6},
    "welch": {"segment_len": None, "overlap_frac": 0.5, "nfft": None,
              "averaging": "median"},
    "normalization": ["zscore", "zscore"],
    "split": {"train_frac": 0.75},
    "net": {"tokens_per_trial": 8, "d_model": 32, "n_heads": 4, "n_layers": 2,
            "d_ff": 64, "hidden": 32, "n_neurons": 32,
            "pre_spike_threshold": 0.25,
            "lif": {"tau_ms": 20.0, "R": 1.0, "v_thresh": 1.0, "v_reset": 0.0,
                    "dt_ms": 5.0},
            "stdp": {"a_plus": 0.01, "a_minus": 0.012, "tau_plus_ms": 20.0,
                     "tau_minus_ms": 20.0, "w_min": -1.0, "w_max": 1.0}},
    "schedule": {"phase_steps": [3000, 300, 300], "epsilon_start": 1.0,
                 "epsilon_end": 0.05, "gamma": 0.0, "learning_rate": 0.05,
                 "lr_decay": 1e-4, "optimizer": "sgd"},
    "reward": {"r_correct": 1.0, "r_incorrect": -1.0},
    "eval": {"k_folds": None},
    "rnac": {"fixture": None, "variant": "contamination", "delta": 0.1,
             "T": 20, "K": 5000, "N": 1000, "eta_schedule": "geometric",
             "eta0": 0.1, "n_probes": 16},
}

#: Keys that change where or how fast a run happens but never its results.
NON_SEMANTIC_KEYS = ("out", "jobs")


class ConfigError(ArgumentError):
    """Configuration file unreadable as JSON or rejected by the schema."""


@lru_cache(maxsize=1)
def schema():
    text = resources.files("neuroassist").joinpath("data/config.schema.json").read_text()
    return json.loads(text)


def deep_merge(base, override):
    """Recursively merge ``override`` into a copy of ``base``.

    Nested objects merge key by key; every other value replaces the base.
    """
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def validate(cfg):
    """Raise :class:`ConfigError` naming the offending schema path."""
    validator = jsonschema.Draft202012Validator(schema())
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = "$" + "".join(f"[{p!r}]" if isinstance(p, int) else f".{p}"
                              for p in err.absolute_path)
        raise ConfigError(f"config error at {where}: {err.message}")
    if cfg["subject"] is not None and cfg["subject"] not in cfg["subjects"]:
        raise ConfigError(f"config error at $.subject: {cfg['subject']!r} "
                          "is not a key of $.subjects")
    if cfg["epoch"]["t_min_s"] >= cfg["epoch"]["t_max_s"]:
        raise ConfigError("config error at $.epoch: t_min_s must be < t_max_s")
    if cfg["filter"]["lo_hz"] >= cfg["filter"]["hi_hz"]:
        raise ConfigError("config error at $.filter: lo_hz must be < hi_hz")
    return cfg


def read_config_file(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return doc


def build_config(path=None, overrides=None):
    """Defaults, then the file at ``path``, then ``overrides``; validated."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        cfg = deep_merge(cfg, read_config_file(path))
    if overrides:
        cfg = deep_merge(cfg, {k: v for k, v in overrides.items() if v is not None})
    return validate(cfg)


def effective(cfg):
    """Apply the selected subject's overrides to the epoch, CSP and Welch blocks."""
    cfg = copy.deepcopy(cfg)
    name = cfg.get("subject")
    if name is not None:
        sub = cfg["subjects"][name]
        for key in ("t_min_s", "t_max_s"):
            if key in sub:
                cfg["epoch"][key] = sub[key]
        if "n_csp_components" in sub:
            cfg["csp"]["n_components"] = sub["n_csp_components"]
        if "nfft" in sub:
            cfg["welch"]["nfft"] = sub["nfft"]
        if cfg["epoch"]["t_min_s"] >= cfg["epoch"]["t_max_s"]:
            raise ConfigError(f"config error at $.subjects.{name}: t_min_s must be "
                              "< t_max_s")
    return cfg


def config_hash(cfg):
    """SHA-256 (first 16 hex digits) of the canonical JSON of the semantic keys."""
    doc = {k: v for k, v in cfg.items() if k not in NON_SEMANTIC_KEYS}
    text = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def provenance(cfg):
    return {"config_hash": config_hash(cfg), "seed": int(cfg["seed"])}


def provenance_comment(cfg):
    p = provenance(cfg)
    return f"config_hash={p['config_hash']} seed={p['seed']}"
