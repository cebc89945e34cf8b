"""
Procedural training images.

Every item is 1-3 axis-aligned soft ellipses with random colors composited
over a linear two-color gradient. Item i is drawn from its own stream
`child_seed(seed, i)`, so any subset can be generated in any order (or in
parallel) and still be identical.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence, Tuple

import torch
from torch.utils.data import Dataset

from src.core.rng import SeededRng, child_seed

EDGE_SHARPNESS = 8.0


class SyntheticDataset(Dataset):
    def __init__(self, seed: int, size: int, resolution: int, channels: int = 3):
        if size < 1:
            raise ValueError(f"dataset size must be >= 1, got {size}")
        self.seed = int(seed)
        self.size = size
        self.resolution = resolution
        self.channels = channels

    def __len__(self) -> int:
        return self.size

    def __getitem__(self, index: int) -> torch.Tensor:
        if not 0 <= index < self.size:
            raise IndexError(f"index {index} out of range for dataset of size {self.size}")
        return render_item(SeededRng(child_seed(self.seed, index)), self.resolution, self.channels)

    def batch(self, indices: Sequence[int], threads: int = 1) -> torch.Tensor:
        """Images [len(indices), C, H, W]."""
        indices = [int(i) for i in indices]
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                items = list(pool.map(self.__getitem__, indices))
        else:
            items = [self[i] for i in indices]
        return torch.stack(items)

    def channel_stats(self, n: int = 256) -> Tuple[torch.Tensor, torch.Tensor]:
        """Per-channel mean and std over the first n items."""
        images = self.batch(range(min(n, self.size)))
        return images.mean(dim=(0, 2, 3)), images.std(dim=(0, 2, 3))


def render_item(rng: SeededRng, resolution: int, channels: int = 3) -> torch.Tensor:
    """One image [C, H, W] in [-1, 1]."""
    coords = (torch.arange(resolution, dtype=torch.float32) + 0.5) / resolution
    y, x = torch.meshgrid(coords, coords, indexing="ij")

    angle = rng.uniform(1, 0.0, 2 * math.pi)[0]
    proj = x * torch.cos(angle) + y * torch.sin(angle)
    t = (proj - proj.min()) / (proj.max() - proj.min()).clamp_min(1e-6)
    c0, c1 = rng.uniform((2, channels), -1.0, 1.0)
    image = c0[:, None, None] * (1 - t) + c1[:, None, None] * t

    n_shapes = int(rng.integers(1, 4))
    for _ in range(n_shapes):
        cx, cy = rng.uniform(2, 0.2, 0.8)
        rx, ry = rng.uniform(2, 0.1, 0.35)
        color = rng.uniform(channels, -1.0, 1.0)
        dist = ((x - cx) / rx) ** 2 + ((y - cy) / ry) ** 2
        alpha = torch.sigmoid((1.0 - dist) * EDGE_SHARPNESS)
        image = image * (1 - alpha) + color[:, None, None] * alpha

    return image.clamp(-1.0, 1.0)
