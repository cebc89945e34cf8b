"""
Sampling in Z and W.

Overparameterized training draws a whole matrix of latents per image. The
rows share one Gaussian component so they are correlated, yet each row is
still marginally N(0, I):

    Z_i = (z_i + z_shared) / sqrt(2)     =>  Cov(Z_i, Z_j) = I / 2  (i != j)
"""

import logging
import math
from typing import Callable, Optional

import torch

from src.core.rng import SeededRng, seeded_normal
from src.models.latents import LatentMatrix

logger = logging.getLogger(__name__)

MEAN_W_SAMPLES = 10_000
_MEAN_W_CHUNK = 4096


def sample_correlated_z(rng: SeededRng, rows: int, dim: int,
                        shared: Optional[torch.Tensor] = None,
                        individual: Optional[torch.Tensor] = None) -> LatentMatrix:
    """
    Correlated Z matrix of `rows` x `dim`.

    `shared` ([dim]) and `individual` ([rows, dim]) replace the random draws
    when given, so tests can pin both noise sources.
    """
    if rows < 1 or dim < 1:
        raise ValueError(f"rows and dim must be >= 1, got {rows}x{dim}")
    if shared is None:
        shared = seeded_normal(rng, dim)
    if individual is None:
        individual = seeded_normal(rng, (rows, dim))
    Z = (individual + shared.reshape(1, dim)) / math.sqrt(2.0)
    return LatentMatrix(space="Z", data=Z)


def sample_correlated_z_batch(rng: SeededRng, batch: int, rows: int, dim: int) -> torch.Tensor:
    """[batch, rows, dim]; a fresh shared vector is drawn for every batch element."""
    shared = seeded_normal(rng, (batch, 1, dim))
    individual = seeded_normal(rng, (batch, rows, dim))
    return (individual + shared) / math.sqrt(2.0)


def sample_independent_z(rng: SeededRng, rows: int, dim: int) -> LatentMatrix:
    """Uncorrelated rows (one independent z per row)."""
    return LatentMatrix(space="Z", data=seeded_normal(rng, (rows, dim)))


def truncate(m: torch.Tensor, mu_w: torch.Tensor, psi: float) -> torch.Tensor:
    """Pull every row (last axis) toward mu_w: W_i <- mu_w + psi * (W_i - mu_w)."""
    if not 0.0 <= psi <= 1.0:
        raise ValueError(f"psi must be in [0, 1], got {psi}")
    if psi == 1.0:
        return m
    mu_w = mu_w.to(dtype=m.dtype, device=m.device)
    return mu_w + psi * (m - mu_w)


def truncate_matrix(m: LatentMatrix, mu_w: torch.Tensor, psi: float) -> LatentMatrix:
    if m.space != "W":
        raise ValueError(f"truncation applies to W matrices, got space {m.space}")
    return LatentMatrix(space="W", data=truncate(m.data, mu_w, psi))


@torch.no_grad()
def estimate_mean_w(mapper: Callable[[torch.Tensor], torch.Tensor], rng: SeededRng,
                    n_samples: int = MEAN_W_SAMPLES, dim: Optional[int] = None) -> torch.Tensor:
    """
    mu_W = E_z[M(z)] estimated from `n_samples` i.i.d. z ~ N(0, I).

    `dim` defaults to the mapper's `dim` attribute when it has one.
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    dim = dim or getattr(mapper, "dim")

    total = torch.zeros(dim, dtype=torch.float64)
    done = 0
    while done < n_samples:
        n = min(_MEAN_W_CHUNK, n_samples - done)
        w = mapper(seeded_normal(rng, (n, dim)))
        total += w.to(torch.float64).sum(dim=0)
        done += n

    mu = (total / n_samples).to(torch.float32)
    logger.debug("estimated mu_W from %d samples (|mu|=%.4f)", n_samples, mu.norm().item())
    return mu
