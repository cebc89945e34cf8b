"""
Style mixing: early layers from one source, the rest from another.

Both sources are expanded to per-layer form; w-like sources (one row) are
broadcast to R rows when mixed with a matrix source.
"""

import torch

from src.core.images import ImageTensor
from src.models.config import LatentSpace
from src.models.latents import StyleSource
from src.networks.synthesis import Generator


def default_crossover(n_layers: int) -> int:
    """Same proportion as mixing the first 10 of 14 layers."""
    return min(max(round(n_layers * 10 / 14), 0), n_layers)


def mix_sources(G: Generator, content: StyleSource, style: StyleSource, crossover: int) -> StyleSource:
    """Per-layer source: layers < crossover from `content`, layers >= crossover from `style`."""
    L = G.config.n_layers
    if not 0 <= crossover <= L:
        raise ValueError(f"crossover must be in [0, {L}], got {crossover}")

    a, batched_a = G.expand(content)
    b, batched_b = G.expand(style)
    if batched_a != batched_b or a.shape[0] != b.shape[0]:
        raise ValueError("content and style must have the same batch layout")

    rows = max(a.shape[2], b.shape[2])
    a = a.expand(-1, -1, rows, -1)
    b = b.expand(-1, -1, rows, -1)
    mixed = torch.cat([a[:, :crossover], b[:, crossover:]], dim=1)

    if rows == 1:
        space, latent = LatentSpace.W_PLUS, mixed[:, :, 0]
    else:
        space, latent = LatentSpace.W_MATRIX_PLUS, mixed
    return StyleSource(space=space, latent=latent if batched_a else latent[0])


@torch.no_grad()
def style_mix(G: Generator, content: StyleSource, style: StyleSource, crossover: int = None) -> ImageTensor:
    """Image with content's latents below `crossover` and style's from it on."""
    if crossover is None:
        crossover = default_crossover(G.config.n_layers)
    return G(mix_sources(G, content, style, crossover))
