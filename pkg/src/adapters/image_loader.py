from pathlib import Path
from typing import List, Sequence, Union

import torch

from src.core.errors import ShapeMismatchError
from src.core.images import load_png
from src.core.tensor_io import EXTENSION, load_tensor
from src.models.config import GeneratorConfig, LatentSpace
from src.models.latents import StyleSource

IMAGE_PATTERNS = ["*.png", "*.jpg", "*.jpeg"]


def find_images(folder: Path, patterns: Sequence[str] = IMAGE_PATTERNS) -> List[Path]:
    """All image files in `folder` matching any pattern, sorted by name."""
    found = set()
    for pat in patterns:
        found.update(Path(folder).glob(pat))
    return sorted(found)


def load_target(path: Union[str, Path], resolution: int) -> torch.Tensor:
    """One target image [3, res, res] in [-1, 1]; resized (nearest) when the size differs."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"target image not found: {path}")
    return load_png(path, size=resolution)


def load_targets(paths: Union[str, Path, Sequence[Union[str, Path]]], resolution: int) -> torch.Tensor:
    """Targets [N, 3, res, res] from a folder of images or an explicit list of files."""
    if isinstance(paths, (str, Path)) and Path(paths).is_dir():
        files = find_images(Path(paths))
        if not files:
            raise FileNotFoundError(f"no images ({', '.join(IMAGE_PATTERNS)}) in {paths}")
    elif isinstance(paths, (str, Path)):
        files = [Path(paths)]
    else:
        files = [Path(p) for p in paths]
    return torch.stack([load_target(p, resolution) for p in files])


def load_source(path: Union[str, Path], space: Union[str, LatentSpace], config: GeneratorConfig) -> StyleSource:
    """A latent tensor file (core format) read as a source of `space`, checked against `config`."""
    path = Path(path)
    if path.suffix != EXTENSION:
        raise ShapeMismatchError(f"latent files use the {EXTENSION} tensor format, got {path.name}")
    space = LatentSpace.parse(space) if isinstance(space, str) else space
    return StyleSource(space=space, latent=load_tensor(path)).check(config)
