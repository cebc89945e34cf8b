"""
Perceptual metrics built on the fixed feature extractor.

- perceptual_distance: LPIPS-style distance, sum over stages of the mean
  squared difference of channel-normalized features.
- fit_stats / frechet_distance: Frechet distance between Gaussian fits of
  pooled features (an FID proxy).
- ppl_segments: perceptual path length of a latent interpolation cut into
  equal segments.
"""

import logging
from typing import List, Optional, Sequence, Union

import numpy as np
import scipy.linalg
import torch
from pydantic import BaseModel, ConfigDict, field_validator
from torch.nn import functional as F

from src.core.errors import ShapeMismatchError
from src.models.config import LossSpec
from src.models.latents import StyleSource, lerp
from src.perception.features import FeatureExtractor, default_extractor

logger = logging.getLogger(__name__)

PSD_TOLERANCE = 1e-5
_NORM_EPS = 1e-10

Images = Union[torch.Tensor, Sequence[torch.Tensor]]


def _unit_channels(f: torch.Tensor) -> torch.Tensor:
    return f * torch.rsqrt(f.square().sum(dim=1, keepdim=True) + _NORM_EPS)


def perceptual_distance(a: torch.Tensor, b: torch.Tensor,
                        extractor: Optional[FeatureExtractor] = None) -> torch.Tensor:
    """
    Distance between images [C, H, W] (scalar) or batches [B, C, H, W] (one value per pair).

    Symmetric, non-negative and exactly 0 for identical inputs.
    """
    if a.shape != b.shape:
        raise ShapeMismatchError(f"cannot compare images of shape {list(a.shape)} and {list(b.shape)}")
    extractor = extractor or default_extractor()
    single = a.ndim == 3

    total = 0.0
    for fa, fb in zip(extractor(a), extractor(b)):
        diff = _unit_channels(fa) - _unit_channels(fb)
        total = total + diff.square().mean(dim=(1, 2, 3))
    return total[0] if single else total


def reconstruction_loss(image: torch.Tensor, target: torch.Tensor, spec: LossSpec = LossSpec(),
                        extractor: Optional[FeatureExtractor] = None) -> torch.Tensor:
    """spec.perceptual * perceptual distance + spec.pixel * mean squared error (batch mean)."""
    loss = image.new_zeros(())
    if spec.perceptual > 0:
        loss = loss + spec.perceptual * perceptual_distance(image, target, extractor).mean()
    if spec.pixel > 0:
        loss = loss + spec.pixel * F.mse_loss(image, target)
    return loss


class GaussianStats(BaseModel):
    """Mean and covariance of pooled features over an image set."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    mean: np.ndarray
    cov: np.ndarray
    count: int

    @field_validator("cov")
    @classmethod
    def _symmetric(cls, cov: np.ndarray) -> np.ndarray:
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
            raise ShapeMismatchError(f"covariance must be square, got {cov.shape}")
        return (cov + cov.T) / 2.0


@torch.no_grad()
def fit_stats(images: Images, extractor: Optional[FeatureExtractor] = None) -> GaussianStats:
    """Gaussian fit (mean, unbiased covariance) of globally pooled final-stage features."""
    batch = images if isinstance(images, torch.Tensor) else torch.stack(list(images))
    if batch.ndim != 4 or batch.shape[0] < 2:
        raise ValueError(f"fit_stats needs at least 2 images, got {batch.shape[0] if batch.ndim == 4 else 0}")
    extractor = extractor or default_extractor()

    feats = extractor.pooled(batch.float()).to(torch.float64).cpu().numpy()
    return GaussianStats(mean=feats.mean(axis=0), cov=np.cov(feats, rowvar=False, ddof=1),
                         count=feats.shape[0])


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    vals, vecs = scipy.linalg.eigh(m)
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T


def frechet_distance(p: GaussianStats, q: GaussianStats) -> float:
    """
    |mu_p - mu_q|^2 + Tr(S_p + S_q - 2 (S_p S_q)^(1/2)).

    The trace of (S_p S_q)^(1/2) is taken from the eigenvalues of the
    symmetric product S_p^(1/2) S_q S_p^(1/2), negative ones clipped to 0.
    """
    if p.mean.shape != q.mean.shape:
        raise ShapeMismatchError(f"feature dims differ: {p.mean.shape} vs {q.mean.shape}")
    for name, stats in (("p", p), ("q", q)):
        lowest = scipy.linalg.eigvalsh(stats.cov).min()
        if lowest < -PSD_TOLERANCE:
            raise ValueError(f"covariance {name} is not PSD (min eigenvalue {lowest:.3e})")

    root_p = _psd_sqrt(p.cov)
    middle = root_p @ q.cov @ root_p
    middle = (middle + middle.T) / 2.0
    trace_sqrt = np.sqrt(np.clip(scipy.linalg.eigvalsh(middle), 0.0, None)).sum()

    diff = p.mean - q.mean
    value = float(diff @ diff + np.trace(p.cov) + np.trace(q.cov) - 2.0 * trace_sqrt)
    return max(value, 0.0)


@torch.no_grad()
def ppl_segment_terms(G, src_a: StyleSource, src_b: StyleSource, n_segments: int = 5,
                      extractor: Optional[FeatureExtractor] = None) -> List[float]:
    """Perceptual distance of each of the `n_segments` consecutive steps along lerp(a, b)."""
    if n_segments < 1:
        raise ValueError(f"n_segments must be >= 1, got {n_segments}")
    points = [lerp(src_a, src_b, i / n_segments).latent for i in range(n_segments + 1)]
    images = G(src_a.with_latent(torch.stack(points)))
    terms = perceptual_distance(images[:-1], images[1:], extractor)
    return [float(t) for t in terms]


def ppl_segments(G, src_a: StyleSource, src_b: StyleSource, n_segments: int = 5,
                 extractor: Optional[FeatureExtractor] = None) -> float:
    """Sum of perceptual variation along the interpolation path a -> b."""
    return float(sum(ppl_segment_terms(G, src_a, src_b, n_segments, extractor)))
