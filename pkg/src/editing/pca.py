"""
Principal directions of W (GANSpace-style editing).

The basis is fit on independent draws w = M(z); correlated rows of a W
matrix have the same marginal, so the same basis applies. An edit shifts
every row of the latent by the same amount, which keeps an all-rows-equal
W matrix degenerate and therefore identical to the matching w edit.
"""

import json
import logging
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import torch
from pydantic import BaseModel, ConfigDict, model_validator

from src.core.rng import SeededRng
from src.core.tensor_io import EXTENSION, load_tensor, save_tensor
from src.models.latents import StyleSource
from src.networks.synthesis import Generator

logger = logging.getLogger(__name__)

RANK_TOLERANCE = 1e-6


class PcaBasis(BaseModel):
    """Mean, orthonormal components (rows, by decreasing variance) and their variances."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    mean: np.ndarray
    components: np.ndarray
    variances: np.ndarray
    rank: int

    @model_validator(mode="after")
    def _shapes(self) -> "PcaBasis":
        k, d = self.components.shape
        if self.mean.shape != (d,) or self.variances.shape != (k,):
            raise ValueError("PCA mean / components / variances shapes disagree")
        return self

    def direction(self, k: int) -> np.ndarray:
        if not 0 <= k < len(self.components):
            raise ValueError(f"component index must be in [0, {len(self.components)}), got {k}")
        return self.components[k]

    def std(self, k: int) -> float:
        return float(np.sqrt(self.variances[k]))


def fit_pca(samples: np.ndarray) -> PcaBasis:
    """PCA by eigendecomposition of the sample covariance of [n, D] samples."""
    samples = np.asarray(samples, dtype=np.float64)
    n, d = samples.shape
    if n < d + 1:
        raise ValueError(f"PCA needs at least D+1={d + 1} samples, got {n}")

    mean = samples.mean(axis=0)
    cov = np.cov(samples, rowvar=False)
    vals, vecs = np.linalg.eigh((cov + cov.T) / 2.0)
    order = np.argsort(vals)[::-1]
    vals = np.clip(vals[order], 0.0, None)
    comps = vecs[:, order].T.copy()

    # sign convention: largest-magnitude coordinate is positive
    pivots = np.argmax(np.abs(comps), axis=1)
    signs = np.sign(comps[np.arange(d), pivots])
    comps *= np.where(signs == 0, 1.0, signs)[:, None]

    rank = int(np.sum(vals > RANK_TOLERANCE * max(vals[0], 1e-30)))
    if rank < d:
        logger.warning("W covariance is rank-deficient (%d of %d); trailing components are arbitrary", rank, d)
    return PcaBasis(mean=mean, components=comps, variances=vals, rank=rank)


@torch.no_grad()
def compute_pca(G: Generator, rng: SeededRng, n_samples: int,
                samples: Optional[np.ndarray] = None) -> PcaBasis:
    """Principal components of W from `n_samples` i.i.d. w = M(z) (or injected `samples`)."""
    if samples is None:
        dim = G.config.dim
        if n_samples < dim + 1:
            raise ValueError(f"PCA needs n_samples >= D+1={dim + 1}, got {n_samples}")
        samples = G.mapper(rng.normal((n_samples, dim))).double().numpy()
    return fit_pca(samples)


def apply_edit(src: StyleSource, basis: PcaBasis, k: int, alpha: float) -> StyleSource:
    """Shift every vector / row of `src` by alpha * v_k."""
    direction = torch.as_tensor(basis.direction(k), dtype=src.latent.dtype)
    return src.with_latent(src.latent + alpha * direction)


@torch.no_grad()
def edit_sweep(G: Generator, src: StyleSource, basis: PcaBasis, k: int,
               alphas: Sequence[float]) -> torch.Tensor:
    """Images [len(alphas), C, H, W] along component k."""
    edited = [apply_edit(src, basis, k, a).latent for a in alphas]
    return G(src.with_latent(torch.stack(edited)))


def save_basis(basis: PcaBasis, directory: Union[str, Path]) -> Path:
    """Components / mean / variances as core-format tensors plus pca.json."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name in ("mean", "components", "variances"):
        save_tensor(getattr(basis, name), directory / f"{name}{EXTENSION}")
    meta = {"rank": basis.rank, "dim": int(basis.mean.shape[0]), "n_components": int(len(basis.components))}
    (directory / "pca.json").write_text(json.dumps(meta, indent=2))
    return directory


def load_basis(directory: Union[str, Path]) -> PcaBasis:
    directory = Path(directory)
    meta = json.loads((directory / "pca.json").read_text())
    arrays = {name: load_tensor(directory / f"{name}{EXTENSION}").double().numpy()
              for name in ("mean", "components", "variances")}
    return PcaBasis(rank=meta["rank"], **arrays)
