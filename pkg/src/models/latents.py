"""
Latent containers.

A LatentMatrix is R rows of D-dimensional vectors tagged with the space it
lives in (Z before the mapper, W after). A StyleSource is what the synthesis
network consumes: a latent in one of the four spaces w, w+, W, W+.
"""

from typing import Literal

import torch
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from src.core.errors import NonFiniteError, ShapeMismatchError
from src.models.config import GeneratorConfig, LatentSpace


class LatentMatrix(BaseModel):
    """R x D latent rows, in Z or W."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    space: Literal["Z", "W"]
    data: torch.Tensor

    @field_validator("data")
    @classmethod
    def _check_data(cls, data: torch.Tensor) -> torch.Tensor:
        if data.ndim != 2:
            raise ShapeMismatchError(f"latent matrix must be [R, D], got {list(data.shape)}")
        if not torch.isfinite(data).all():
            raise NonFiniteError("latent matrix contains non-finite values")
        return data

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


# unbatched latent shape per space, as (per_layer, matrix) flags:
#   w: [D]   w_plus: [L, D]   W: [R, D]   W_plus: [L, R, D]
_RANK = {
    LatentSpace.W_VECTOR: 1,
    LatentSpace.W_PLUS: 2,
    LatentSpace.W_MATRIX: 2,
    LatentSpace.W_MATRIX_PLUS: 3,
}


class StyleSource(BaseModel):
    """
    A point in one of the four style spaces.

    `latent` has the unbatched shape of its space (w: [D], w_plus: [L, D],
    W: [R, D], W_plus: [L, R, D]) or the same with a leading batch axis.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    space: LatentSpace
    latent: torch.Tensor

    @field_validator("space", mode="before")
    @classmethod
    def _parse_space(cls, v):
        return LatentSpace.parse(v) if isinstance(v, str) else v

    @model_validator(mode="after")
    def _check_rank(self) -> "StyleSource":
        rank = _RANK[self.space]
        if self.latent.ndim not in (rank, rank + 1):
            raise ShapeMismatchError(
                f"{self.space.value} latent must have rank {rank} (or {rank + 1} batched), "
                f"got shape {list(self.latent.shape)}"
            )
        return self

    @property
    def batched(self) -> bool:
        return self.latent.ndim == _RANK[self.space] + 1

    def check(self, config: GeneratorConfig) -> "StyleSource":
        """Raise ShapeMismatchError unless the latent fits `config`."""
        shape = tuple(self.latent.shape[1:] if self.batched else self.latent.shape)
        L, R, D = config.n_layers, config.rows, config.dim
        expected = {
            LatentSpace.W_VECTOR: (D,),
            LatentSpace.W_PLUS: (L, D),
            LatentSpace.W_MATRIX: (R, D),
            LatentSpace.W_MATRIX_PLUS: (L, R, D),
        }[self.space]
        if shape != expected:
            raise ShapeMismatchError(
                f"{self.space.value} latent has shape {list(shape)}, config expects {list(expected)}"
            )
        return self

    def with_latent(self, latent: torch.Tensor) -> "StyleSource":
        return StyleSource(space=self.space, latent=latent)

    def detach(self) -> "StyleSource":
        return self.with_latent(self.latent.detach().clone())


def lerp(a: StyleSource, b: StyleSource, t: float) -> StyleSource:
    """Element-wise linear interpolation of two sources of the same space."""
    if a.space != b.space or a.latent.shape != b.latent.shape:
        raise ShapeMismatchError(
            f"cannot interpolate {a.space.value}{list(a.latent.shape)} with {b.space.value}{list(b.latent.shape)}"
        )
    return a.with_latent(torch.lerp(a.latent, b.latent, float(t)))
