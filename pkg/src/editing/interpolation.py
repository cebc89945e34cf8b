"""
Interpolation experiments over all pairs of a latent set.

For n latents the n(n-1)/2 pair midpoints are synthesized; realism is the
Frechet feature distance between the midpoint images and a reference set,
smoothness is the segment perceptual path length of each pair's path.
"""

import logging
from itertools import combinations
from typing import Optional, Sequence

import numpy as np
import torch

from src.core.errors import ShapeMismatchError
from src.models.latents import StyleSource
from src.models.reports import InterpolationReport
from src.networks.synthesis import Generator
from src.perception.features import FeatureExtractor
from src.perception.metrics import fit_stats, frechet_distance, ppl_segments

logger = logging.getLogger(__name__)


def _check_same_space(latents: Sequence[StyleSource]) -> None:
    if len(latents) < 2:
        raise ValueError(f"interpolation needs at least 2 latents, got {len(latents)}")
    first = latents[0]
    for other in latents[1:]:
        if other.space != first.space or other.latent.shape != first.latent.shape:
            raise ShapeMismatchError(
                f"all latents must share one space: {first.space.value} vs {other.space.value}"
            )


@torch.no_grad()
def pair_midpoints(G: Generator, latents: Sequence[StyleSource]) -> torch.Tensor:
    """Images [n(n-1)/2, C, H, W] at (a + b) / 2 for every pair i < j."""
    _check_same_space(latents)
    mids = [(a.latent + b.latent) / 2 for a, b in combinations(latents, 2)]
    return G(latents[0].with_latent(torch.stack(mids)))


def interpolation_suite(G: Generator, latents: Sequence[StyleSource], reference: torch.Tensor,
                        n_segments: int = 5,
                        extractor: Optional[FeatureExtractor] = None) -> InterpolationReport:
    """Midpoint FID proxy against `reference` images and mean segment PPL over all pairs."""
    midpoints = pair_midpoints(G, latents)
    n_pairs = midpoints.shape[0]

    fid = None
    if n_pairs >= 2:
        fid = frechet_distance(fit_stats(midpoints, extractor), fit_stats(reference, extractor))

    ppl = [ppl_segments(G, a, b, n_segments, extractor) for a, b in combinations(latents, 2)]
    logger.info("interpolation: %d pairs, midpoint FID proxy %s, mean PPL %.5f",
                n_pairs, "n/a" if fid is None else f"{fid:.4f}", float(np.mean(ppl)))
    return InterpolationReport(n_latents=len(latents), n_pairs=n_pairs, fid_proxy=fid,
                               mean_ppl=float(np.mean(ppl)), ppl=ppl)
