"""
Generator checkpoints on disk.

A checkpoint is a directory:

    generator.json         metadata: config, modulation_mode, mu_w, tensor names
    tensors/<name>.opt     one core-format tensor per state_dict entry

`mu_w` lives both in the metadata (as a list, for humans) and as the
`mu_w` buffer tensor; loading uses the tensor.
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Union

from src.core.errors import TensorFormatError
from src.core.tensor_io import EXTENSION, load_tensor, save_tensor
from src.models.config import GeneratorConfig
from src.networks.synthesis import Generator

logger = logging.getLogger(__name__)

METADATA_FILE = "generator.json"
TENSOR_DIR = "tensors"
FORMAT_VERSION = 1


def save_checkpoint(G: Generator, directory: Union[str, Path]) -> Path:
    """Write G's parameters, buffers and config to `directory` (created if needed)."""
    directory = Path(directory)
    (directory / TENSOR_DIR).mkdir(parents=True, exist_ok=True)

    state = G.state_dict()
    for name, tensor in state.items():
        save_tensor(tensor, directory / TENSOR_DIR / f"{name}{EXTENSION}")

    metadata = {
        "format_version": FORMAT_VERSION,
        "config": G.config.model_dump(mode="json"),
        "modulation_mode": G.config.modulation_mode.value,
        "mu_w": [float(v) for v in G.mu_w.tolist()],
        "tensors": sorted(state.keys()),
    }
    (directory / METADATA_FILE).write_text(json.dumps(metadata, indent=2))
    logger.info("saved checkpoint (%d tensors) to %s", len(state), directory)
    return directory


def load_checkpoint(directory: Union[str, Path]) -> Generator:
    """Rebuild a Generator from a directory written by `save_checkpoint`."""
    directory = Path(directory)
    meta_path = directory / METADATA_FILE
    if not meta_path.exists():
        raise FileNotFoundError(f"no {METADATA_FILE} in checkpoint directory {directory}")

    metadata = json.loads(meta_path.read_text())
    config = GeneratorConfig.model_validate(metadata["config"])
    G = Generator(config)

    expected = set(G.state_dict().keys())
    listed = set(metadata["tensors"])
    if listed != expected:
        raise TensorFormatError(
            f"checkpoint tensors do not match the architecture: "
            f"missing {sorted(expected - listed)}, unexpected {sorted(listed - expected)}"
        )

    state = {name: load_tensor(directory / TENSOR_DIR / f"{name}{EXTENSION}") for name in sorted(listed)}
    G.load_state_dict(state)
    G.eval()
    return G


def checkpoint_hash(directory: Union[str, Path]) -> str:
    """sha256 over the metadata and every tensor file, in name order."""
    directory = Path(directory)
    digest = hashlib.sha256()
    files = [directory / METADATA_FILE] + sorted((directory / TENSOR_DIR).glob(f"*{EXTENSION}"))
    for path in files:
        digest.update(path.name.encode())
        digest.update(path.read_bytes())
    return digest.hexdigest()
