"""
Mapping network M: R^D -> R^D and per-layer affine projections A(l): R^D -> R^N_I.

Styles for a whole latent matrix are computed with one batched matmul per
layer: M and A act on the last axis, so an [R, D] matrix (or a [B, R, D]
batch) goes through in a single call.
"""

import logging
import math
import time
from typing import Dict, List, Sequence

import torch
from torch import nn
from torch.nn import functional as F

from src.core.errors import ShapeMismatchError
from src.models.config import GeneratorConfig

logger = logging.getLogger(__name__)


class MappingNetwork(nn.Module):
    """MLP of `n_layers` D x D linear layers with leaky-ReLU (slope 0.2)."""

    def __init__(self, dim: int, n_layers: int = 2, normalize_input: bool = True,
                 slope: float = 0.2):
        super().__init__()
        if n_layers < 1:
            raise ValueError(f"mapping network needs at least one layer, got {n_layers}")
        self.dim = dim
        self.normalize_input = normalize_input
        self.slope = slope
        self.layers = nn.ModuleList(nn.Linear(dim, dim) for _ in range(n_layers))
        for layer in self.layers:
            nn.init.normal_(layer.weight, mean=0.0, std=1.0 / math.sqrt(dim))
            nn.init.zeros_(layer.bias)

    def forward(self, z: torch.Tensor) -> torch.Tensor:
        if z.shape[-1] != self.dim:
            raise ShapeMismatchError(f"mapper expects last axis {self.dim}, got {list(z.shape)}")
        x = z
        if self.normalize_input:
            x = x * math.sqrt(self.dim) / x.norm(dim=-1, keepdim=True).clamp_min(1e-8)
        for layer in self.layers:
            x = F.leaky_relu(layer(x), negative_slope=self.slope)
        return x


class AffineProjection(nn.Linear):
    """A(l): W -> style coefficients of one layer; bias starts at 1 so styles start near 1."""

    def __init__(self, dim: int, n_in: int):
        super().__init__(dim, n_in)
        nn.init.normal_(self.weight, mean=0.0, std=1.0 / math.sqrt(dim))
        nn.init.ones_(self.bias)


def build_projections(config: GeneratorConfig) -> nn.ModuleList:
    return nn.ModuleList(AffineProjection(config.dim, layer.in_channels) for layer in config.layers)


def map_latent(mapper: MappingNetwork, z: torch.Tensor) -> torch.Tensor:
    """w = M(z) for one z [D] or a batch [..., D]."""
    return mapper(z)


def map_matrix(mapper: MappingNetwork, projections: Sequence[AffineProjection],
               Z: torch.Tensor) -> List[torch.Tensor]:
    """
    Styles for every layer from a Z matrix: S(l)_i = A(l)(M(Z_i)).

    Z is [R, D] (or batched [..., R, D]); each S(l) is [R, N_I(l)].
    """
    if Z.ndim < 2:
        raise ShapeMismatchError(f"map_matrix expects [R, D], got {list(Z.shape)}")
    W = map_latent(mapper, Z)
    return [proj(W) for proj in projections]


def map_matrix_looped(mapper: MappingNetwork, projections: Sequence[AffineProjection],
                      Z: torch.Tensor) -> List[torch.Tensor]:
    """Reference implementation: one mapper call per row."""
    per_layer: List[List[torch.Tensor]] = [[] for _ in projections]
    for row in Z:
        w = map_latent(mapper, row)
        for idx, proj in enumerate(projections):
            per_layer[idx].append(proj(w))
    return [torch.stack(rows) for rows in per_layer]


@torch.no_grad()
def benchmark_mapping(mapper: MappingNetwork, projections: Sequence[AffineProjection],
                      Z: torch.Tensor, repeats: int = 5) -> Dict[str, float]:
    """Best-of-`repeats` wall-clock seconds for batched vs per-row style mapping."""
    timings = {}
    for name, fn in (("batched", map_matrix), ("looped", map_matrix_looped)):
        best = math.inf
        for _ in range(repeats):
            start = time.perf_counter()
            fn(mapper, projections, Z)
            best = min(best, time.perf_counter() - start)
        timings[name] = best
    timings["speedup"] = timings["looped"] / max(timings["batched"], 1e-12)
    logger.info("mapping %d rows: batched %.2e s, looped %.2e s (x%.1f)",
                Z.shape[0], timings["batched"], timings["looped"], timings["speedup"])
    return timings
