"""
Inversion experiments over target sets.

- reconstruction_suite: invert every target in every requested space and
  collect loss curves, final losses and the realism (FID proxy) of the
  reconstructions.
- nondeterminism_experiment: invert one target several times from random
  starts without regularization and measure how much the solutions differ,
  through the spread of the images at their pairwise latent midpoints.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

import numpy as np
import torch

from src.core.images import ImageTensor
from src.core.rng import SeededRng
from src.inversion.optimizer import invert
from src.models.config import InversionConfig, LatentSpace
from src.models.latents import StyleSource
from src.models.reports import InversionTrace, NondeterminismReport, ReconstructionReport
from src.networks.synthesis import Generator, count_latent_params, synthesize
from src.perception.features import FeatureExtractor
from src.perception.metrics import fit_stats, frechet_distance, perceptual_distance

logger = logging.getLogger(__name__)

DEFAULT_SPACES = (LatentSpace.W_VECTOR, LatentSpace.W_PLUS, LatentSpace.W_MATRIX, LatentSpace.W_MATRIX_PLUS)


def _invert_all(G: Generator, targets: Sequence[ImageTensor], cfg: InversionConfig, rng: SeededRng,
                threads: int, extractor: Optional[FeatureExtractor]) -> List[InversionTrace]:
    def run(idx: int) -> InversionTrace:
        return invert(G, targets[idx], cfg, rng.spawn(idx), extractor=extractor)

    if threads <= 1:
        return [run(i) for i in range(len(targets))]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, range(len(targets))))


def reconstruction_suite(G: Generator, targets: Sequence[ImageTensor], cfg: InversionConfig,
                         rng: SeededRng, spaces: Sequence[LatentSpace] = DEFAULT_SPACES,
                         threads: int = 1, extractor: Optional[FeatureExtractor] = None) -> ReconstructionReport:
    """Invert each target in each space with per-target derived seeds."""
    losses, finals, params, fid = {}, {}, {}, {}
    target_batch = torch.stack(list(targets))

    for space in spaces:
        space_cfg = cfg.model_copy(update={"space": space})
        traces = _invert_all(G, targets, space_cfg, rng, threads, extractor)
        key = space.value
        losses[key] = np.array([t.losses for t in traces])
        finals[key] = np.array([t.final_loss for t in traces])
        params[key] = count_latent_params(G.config, space)
        if len(traces) >= 2:
            recon = torch.stack([t.image for t in traces])
            fid[key] = frechet_distance(fit_stats(recon, extractor), fit_stats(target_batch, extractor))
        else:
            fid[key] = None
        logger.info("reconstruction[%s]: median final loss %.5e over %d targets",
                    key, float(np.median(finals[key])), len(traces))

    return ReconstructionReport(losses=losses, final_losses=finals, latent_params=params, fid_proxy=fid)


@torch.no_grad()
def midpoint_spread(G: Generator, solutions: Sequence[torch.Tensor], space: LatentSpace,
                    extractor: Optional[FeatureExtractor] = None) -> Tuple[float, int]:
    """(mean pairwise perceptual distance among pairwise-midpoint images, number of midpoints)."""
    midpoints = [(a + b) / 2 for a, b in combinations(solutions, 2)]
    if len(midpoints) < 2:
        return 0.0, len(midpoints)
    images = synthesize(G, StyleSource(space=space, latent=torch.stack(midpoints)))
    left, right = zip(*combinations(range(len(midpoints)), 2))
    dists = perceptual_distance(images[list(left)], images[list(right)], extractor)
    return float(dists.mean()), len(midpoints)


def nondeterminism_experiment(G: Generator, y: ImageTensor, n_restarts: int,
                              cfg_unregularized: InversionConfig, rng: SeededRng,
                              spaces: Sequence[LatentSpace] = (LatentSpace.W_PLUS, LatentSpace.W_MATRIX),
                              same_seed: bool = False,
                              extractor: Optional[FeatureExtractor] = None) -> NondeterminismReport:
    """
    Repeat unregularized, randomly initialized inversions of `y` and report
    how variable the solutions are in each space.

    `same_seed=True` starts every restart from the same random point.
    """
    if cfg_unregularized.init != "random" or cfg_unregularized.psi < 1.0:
        raise ValueError("non-determinism runs need init='random' and psi=1 (no truncation)")
    if n_restarts < 1:
        raise ValueError(f"n_restarts must be >= 1, got {n_restarts}")

    spread, final_losses = {}, {}
    n_midpoints = 0
    for space in spaces:
        space_cfg = cfg_unregularized.model_copy(update={"space": space})
        solutions, finals = [], []
        for restart in range(n_restarts):
            trace = invert(G, y, space_cfg, rng.spawn(0 if same_seed else restart), extractor=extractor)
            solutions.append(trace.source.latent)
            finals.append(trace.final_loss)
        spread[space.value], n_midpoints = midpoint_spread(G, solutions, space, extractor)
        final_losses[space.value] = finals
        logger.info("non-determinism[%s]: midpoint spread %.5e", space.value, spread[space.value])

    return NondeterminismReport(n_restarts=n_restarts, n_midpoints=n_midpoints,
                                spread=spread, final_losses=final_losses)
