"""
Run configuration from JSON files and command-line flags.

A `--config` file may set any flag of a subcommand (keys are flag names with
dashes or underscores). Flags given on the command line win over the file,
and the file wins over built-in defaults.
"""

import json
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from src.models.config import (GeneratorConfig, InversionConfig, LossSpec, ModulationMode,
                               TrainConfig)


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    data = json.loads(path.read_text())
    if not isinstance(data, dict):
        raise ValueError(f"{path.name}: config must be a JSON object, got {type(data).__name__}")
    return {key.replace("-", "_"): value for key, value in data.items()}


def merge_settings(defaults: Mapping[str, Any], file_values: Optional[Mapping[str, Any]],
                   flags: Mapping[str, Any]) -> Dict[str, Any]:
    """defaults < config file < explicit flags."""
    merged = dict(defaults)
    merged.update(file_values or {})
    merged.update({k: v for k, v in flags.items() if v is not None})
    return merged


def generator_config(settings: Mapping[str, Any]) -> GeneratorConfig:
    """Desk architecture from `dim`, `rows`, `resolution`, `channels`, `mode` settings."""
    return GeneratorConfig.desk(
        dim=int(settings["dim"]),
        rows=int(settings["rows"]) if settings.get("rows") else None,
        resolution=int(settings["resolution"]),
        channels=int(settings["channels"]),
        mode=ModulationMode(settings["mode"]),
        mapping_layers=int(settings.get("mapping_layers", 2)),
    )


def inversion_config(settings: Mapping[str, Any], keep_truncation: bool = False) -> InversionConfig:
    return InversionConfig(
        space=settings["space"],
        steps=int(settings["steps"]),
        lr=float(settings["lr"]),
        psi=float(settings["psi"]),
        trunc_disable_fraction=float(settings["disable_at"]),
        keep_truncation_throughout=keep_truncation or bool(settings.get("keep_trunc", False)),
        init=settings.get("init", "mean_w"),
        loss=LossSpec(perceptual=float(settings.get("perceptual_weight", 1.0)),
                      pixel=float(settings.get("pixel_weight", 0.0))),
    )


def train_config(settings: Mapping[str, Any]) -> TrainConfig:
    keys = set(TrainConfig.model_fields)
    values = {k: v for k, v in settings.items() if k in keys}
    if "batch" in settings:
        values["batch_size"] = int(settings["batch"])
    return TrainConfig(**values)
