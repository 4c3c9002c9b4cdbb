"""Run configuration: INI-style ``key = value`` sections merged with flag overrides."""

from __future__ import annotations

import configparser
import dataclasses
from pathlib import Path
from typing import Any, Callable

from .augment import RandAugmentPolicy
from .model import VARIANTS, ConfigError as ModelConfigError, ViTSTRConfig
from .numerics import ContractError
from .tokenizer import Vocabulary, VocabularyError, build_default_vocab
from .train import TrainConfig


class ConfigError(ValueError):
    """Invalid run configuration (unknown key, bad value, inconsistent model)."""


def _bool(v: str) -> bool:
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _optional_float(v: str) -> float | None:
    return None if str(v).strip().lower() in ("", "none") else float(v)


SCHEMA: dict[str, dict[str, Callable[[str], Any]]] = {
    "model": {
        "variant": str,
        "patch_size": int,
        "depth": int,
        "embed_dim": int,
        "num_heads": int,
        "seq_len": int,
        "image_height": int,
        "image_width": int,
        "in_channels": int,
        "mlp_ratio": int,
        "vocab": str,
        "precision": int,
    },
    "train": {
        "batch_size": int,
        "steps": int,
        "lr": float,
        "rho": float,
        "eps": float,
        "clip_norm": float,
        "seed": int,
        "augment": _bool,
        "augment_ops": int,
        "augment_magnitude": float,
        "checkpoint_every": int,
        "stop_at_accuracy": _optional_float,
    },
    "data": {
        "height": int,
        "min_len": int,
        "max_len": int,
    },
}

DEFAULTS = {
    "model": {"variant": "tiny", "precision": 32},
    "train": {
        "batch_size": 32, "steps": 1000, "lr": 1.0, "rho": 0.95, "eps": 1e-8, "clip_norm": 5.0,
        "seed": 0, "augment": False, "augment_ops": 2, "augment_magnitude": 1.0, "checkpoint_every": 0,
        "stop_at_accuracy": None,
    },
    "data": {"height": 32, "min_len": 3, "max_len": 10},
}


@dataclasses.dataclass
class RunConfig:
    values: dict[str, dict[str, Any]]
    source: str | None = None

    def get(self, section: str, key: str, default=None):
        return self.values.get(section, {}).get(key, default)

    @property
    def seed(self) -> int:
        return int(self.values["train"]["seed"])

    @property
    def precision(self) -> int:
        return int(self.values["model"]["precision"])

    def vocab(self) -> Vocabulary:
        path = self.get("model", "vocab")
        if not path:
            return build_default_vocab()
        try:
            return Vocabulary.load(path)
        except (OSError, VocabularyError) as exc:
            raise ConfigError(f"model.vocab: {exc}") from None

    def model_config(self, num_classes: int) -> ViTSTRConfig:
        m = self.values["model"]
        variant = m["variant"]
        if variant not in VARIANTS and variant != "custom":
            raise ConfigError(f"model.variant must be one of {sorted(VARIANTS) + ['custom']}, got {variant!r}")
        kwargs: dict[str, Any] = dict(VARIANTS.get(variant, {}))
        if variant == "custom":
            for key in ("embed_dim", "num_heads"):
                if key not in m:
                    raise ConfigError(f"model.{key} is required for a custom variant")
        for key in ("patch_size", "depth", "embed_dim", "num_heads", "seq_len", "in_channels", "mlp_ratio"):
            if key in m:
                kwargs[key] = m[key]
        h = m.get("image_height", 224)
        w = m.get("image_width", 224)
        kwargs["image_size"] = (h, w)
        kwargs["num_classes"] = num_classes
        try:
            return ViTSTRConfig(**kwargs)
        except ModelConfigError as exc:
            raise ConfigError(str(exc)) from None

    def train_config(self) -> TrainConfig:
        t = self.values["train"]
        policy = None
        try:
            if t["augment"]:
                policy = RandAugmentPolicy(t["augment_ops"], t["augment_magnitude"], t["seed"])
            return TrainConfig(
                batch_size=t["batch_size"], steps=t["steps"], lr=t["lr"], rho=t["rho"], eps=t["eps"],
                clip_norm=t["clip_norm"], seed=t["seed"], augment=policy,
                checkpoint_every=t["checkpoint_every"], stop_at_accuracy=t["stop_at_accuracy"],
            )
        except ContractError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        return {s: dict(v) for s, v in self.values.items()}


def _coerce(section: str, key: str, raw) -> Any:
    try:
        parser = SCHEMA[section][key]
    except KeyError:
        raise ConfigError(f"unknown config key {section}.{key}") from None
    if not isinstance(raw, str):
        return raw
    try:
        return parser(raw.strip())
    except ValueError as exc:
        raise ConfigError(f"{section}.{key}: {exc}") from None


def load_run_config(path: str | Path | None = None, overrides: dict[str, Any] | None = None) -> RunConfig:
    """Defaults, then the file, then ``overrides`` (``"section.key" -> value``)."""
    values = {s: dict(v) for s, v in DEFAULTS.items()}
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None, default_section="__defaults__")
        parser.optionxform = str
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}".replace("\n", " ")) from None
        for section in parser.sections():
            if section not in SCHEMA:
                raise ConfigError(f"unknown config section [{section}]")
            for key, raw in parser.items(section):
                values[section][key] = _coerce(section, key, raw)
    for dotted, value in (overrides or {}).items():
        if value is None:
            continue
        section, _, key = dotted.partition(".")
        if section not in SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        values[section][key] = _coerce(section, key, value)
    if values["model"]["precision"] not in (32, 64):
        raise ConfigError(f"model.precision must be 32 or 64, got {values['model']['precision']}")
    return RunConfig(values, str(path) if path is not None else None)
