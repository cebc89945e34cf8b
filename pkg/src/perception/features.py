"""
Frozen random convolutional feature pyramid.

Stands in for pretrained VGG/Inception features: 4 stages of
3x3 conv -> leaky-ReLU(0.2) -> 2x average pool, channels 3-16-32-64-64,
weights ~ N(0, 2 / fan_in) drawn from torch's generator seeded with
`seed` (default 0). Nothing here is trainable.
"""

from functools import lru_cache
from typing import List, Sequence

import torch
from torch import nn
from torch.nn import functional as F

from src.core.errors import ShapeMismatchError

EXTRACTOR_SEED = 0
STAGE_CHANNELS = (3, 16, 32, 64, 64)


class FeatureExtractor(nn.Module):
    """Deterministic feature pyramid; forward returns one feature map per stage."""

    def __init__(self, seed: int = EXTRACTOR_SEED, channels: Sequence[int] = STAGE_CHANNELS):
        super().__init__()
        self.seed = seed
        self.channels = tuple(channels)
        gen = torch.Generator().manual_seed(seed)
        for idx, (c_in, c_out) in enumerate(zip(self.channels[:-1], self.channels[1:])):
            fan_in = c_in * 3 * 3
            weight = torch.randn(c_out, c_in, 3, 3, generator=gen) * (2.0 / fan_in) ** 0.5
            self.register_buffer(f"stage{idx}", weight)
        self.requires_grad_(False)

    @property
    def n_stages(self) -> int:
        return len(self.channels) - 1

    def forward(self, x: torch.Tensor) -> List[torch.Tensor]:
        if x.ndim == 3:
            x = x.unsqueeze(0)
        if x.shape[1] != self.channels[0]:
            raise ShapeMismatchError(f"extractor expects {self.channels[0]} channels, got {x.shape[1]}")

        features = []
        for idx in range(self.n_stages):
            weight = getattr(self, f"stage{idx}").to(dtype=x.dtype, device=x.device)
            x = F.leaky_relu(F.conv2d(x, weight, padding=1), negative_slope=0.2)
            if min(x.shape[-2:]) >= 2:
                x = F.avg_pool2d(x, kernel_size=2)
            features.append(x)
        return features

    def pooled(self, x: torch.Tensor) -> torch.Tensor:
        """Global-average-pooled final stage, [B, channels[-1]]."""
        return self.forward(x)[-1].mean(dim=(-2, -1))


@lru_cache(maxsize=4)
def default_extractor(seed: int = EXTRACTOR_SEED) -> FeatureExtractor:
    return FeatureExtractor(seed).eval()
