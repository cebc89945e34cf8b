"""
Degradations applied to generated images before comparing them with a target.

Identity for plain inversion; nearest-neighbour downsampling for
upsampling-by-inversion (the generated image is downsampled and matched
against the low-resolution target).
"""

from typing import Literal, Tuple

import torch
from pydantic import BaseModel, ConfigDict, Field, model_validator
from torch.nn import functional as F

from src.core.errors import ShapeMismatchError


class DegradationOp(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["identity", "downsample"] = "identity"
    factor: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _identity_has_no_factor(self) -> "DegradationOp":
        if self.kind == "identity" and self.factor != 1:
            raise ValueError("identity degradation takes no factor")
        return self

    @classmethod
    def identity(cls) -> "DegradationOp":
        return cls()

    @classmethod
    def downsample(cls, factor: int) -> "DegradationOp":
        return cls(kind="downsample", factor=factor)

    def output_shape(self, shape: Tuple[int, ...]) -> Tuple[int, ...]:
        if self.kind == "identity":
            return tuple(shape)
        *lead, h, w = shape
        if h % self.factor or w % self.factor:
            raise ShapeMismatchError(f"factor {self.factor} does not divide image side {h}x{w}")
        return (*lead, h // self.factor, w // self.factor)

    def __call__(self, image: torch.Tensor) -> torch.Tensor:
        """Apply to [C, H, W] or [B, C, H, W]."""
        if self.kind == "identity":
            return image
        single = image.ndim == 3
        batch = image.unsqueeze(0) if single else image
        size = self.output_shape(tuple(batch.shape))[-2:]
        out = F.interpolate(batch, size=size, mode="nearest")
        return out[0] if single else out
