"""
Style-mixing regularization.

With probability `prob` a training latent is built from two sources: layers
below a crossover c (uniform in 1..L-1) take Z_a, the rest take Z_b. Layer 0
always comes from Z_a, so its marginal is unchanged.
"""

from typing import NamedTuple

import torch

from src.core.rng import SeededRng


class MixingAssignment(NamedTuple):
    crossover: int           # n_layers when not mixed
    latents: torch.Tensor    # [n_layers, *Z_a.shape]

    @property
    def mixed(self) -> bool:
        return self.crossover < self.latents.shape[0]


def draw_crossover(rng: SeededRng, prob: float, n_layers: int) -> int:
    if not 0.0 <= prob <= 1.0:
        raise ValueError(f"style mixing probability must be in [0, 1], got {prob}")
    mix = rng.random() < prob
    if not mix or n_layers < 2:
        return n_layers
    return int(rng.integers(1, n_layers))


def style_mixing_regularize(rng: SeededRng, Z_a: torch.Tensor, Z_b: torch.Tensor, prob: float,
                            n_layers: int) -> MixingAssignment:
    """Per-layer stack of Z_a / Z_b around a random crossover."""
    if Z_a.shape != Z_b.shape:
        raise ValueError(f"mixing sources differ in shape: {list(Z_a.shape)} vs {list(Z_b.shape)}")
    c = draw_crossover(rng, prob, n_layers)
    latents = torch.stack([Z_a if layer < c else Z_b for layer in range(n_layers)])
    return MixingAssignment(crossover=c, latents=latents)
