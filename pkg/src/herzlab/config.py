"""Experiment configs: JSON in, validated and fully resolved experiment specs out."""

from __future__ import annotations

import copy
import hashlib
import json
import os
import zlib
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from .exponent import VariableExponent
from .grid import GridSpec, build_grid
from .weights import Weight

SEED_ENV = "HERZLAB_SEED"

DEFAULTS = {
    "exponent": "const:2",
    "weight": "const:1",
    "herz": {"alpha": 0.0, "q": 1.0, "r": 0.75, "delta": 0.5, "beta": 1.0, "homogeneous": True},
    "suite": {"families": ["bump", "shell", "lacunary", "smooth"], "count": 20},
    "dictionary_size": 8,
    "probe": False,
}

EXPERIMENT_DEFAULTS = {
    "trials": 500,
    "origin": False,
    "op": "s_beta",
    "resolutions": 2,
    "zoo": ["power:-0.9", "power:-0.5", "power:0", "power:0.5", "power:1.5", "power:3"],
}

MERGED_KEYS = ("grid", "exponent", "weight", "herz", "suite", "dictionary_size", "probe")


class ConfigError(ValueError):
    pass


def schema() -> dict:
    text = resources.files("herzlab").joinpath("config_schema.json").read_text()
    return json.loads(text)


def canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()


def sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def derive_seed(seed: int, experiment_id: str) -> int:
    """Per-experiment seed from the run seed and the experiment id."""
    ss = np.random.SeedSequence([seed & 0xFFFFFFFF, zlib.crc32(experiment_id.encode())])
    return int(ss.generate_state(1)[0])


@dataclass
class ExperimentSpec:
    id: str
    kind: str
    settings: dict
    seed: int


@dataclass
class ExperimentConfig:
    raw: dict
    seed: int
    seed_source: str
    output_dir: Optional[str]
    experiments: list = field(default_factory=list)

    @property
    def config_hash(self) -> str:
        return sha256(canonical_json(self.raw))


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _check_presets(settings: dict) -> None:
    spec = GridSpec(**settings["grid"])
    try:
        grid = build_grid(spec)
        p = VariableExponent.from_preset(settings["exponent"], grid)
        Weight.from_preset(settings["weight"], grid, p)
        if "q_exponent" in settings:
            VariableExponent.from_preset(settings["q_exponent"], grid)
        for z in settings.get("zoo", []):
            Weight.from_preset(z, grid, p)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def resolve(raw: dict, seed_override: Optional[int] = None) -> ExperimentConfig:
    try:
        jsonschema.validate(raw, schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None
    seed = raw["seed"] if seed_override is None else seed_override
    source = "config" if seed_override is None else SEED_ENV
    base = _merge(DEFAULTS, {k: raw[k] for k in MERGED_KEYS if k in raw})
    base["suite"].setdefault("seed", seed)
    exps, seen = [], set()
    counts: dict = {}
    for entry in raw["experiments"]:
        entry = {"kind": entry} if isinstance(entry, str) else entry
        kind = entry["kind"]
        counts[kind] = counts.get(kind, 0) + 1
        exp_id = entry.get("id") or (kind if counts[kind] == 1 else f"{kind}-{counts[kind]}")
        if exp_id in seen:
            raise ConfigError(f"duplicate experiment id {exp_id!r}")
        seen.add(exp_id)
        settings = _merge(_merge(base, EXPERIMENT_DEFAULTS), {k: v for k, v in entry.items() if k not in ("kind", "id")})
        settings.setdefault("q_exponent", settings["exponent"])
        try:
            _check_presets(settings)
        except ValueError as exc:
            raise ConfigError(f"experiment {exp_id}: {exc}") from exc
        exps.append(ExperimentSpec(exp_id, kind, settings, derive_seed(seed, exp_id)))
    return ExperimentConfig(raw, seed, source, raw.get("output_dir"), exps)


def load_config(path, env: Optional[dict] = None) -> ExperimentConfig:
    env = os.environ if env is None else env
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    override = None
    if env.get(SEED_ENV) not in (None, ""):
        try:
            override = int(env[SEED_ENV])
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env[SEED_ENV]!r}") from None
    return resolve(raw, override)
