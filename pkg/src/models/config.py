"""
Configuration models.

These are the "blueprints" every other module reads: the generator
architecture, the inversion protocol and the training schedule. They are
frozen pydantic models; make variants with `cfg.model_copy(update={...})`.
"""

import math
from enum import Enum
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class ModulationMode(str, Enum):
    """How training feeds styles to the synthesis network."""
    BASELINE = "baseline"    # one latent per image, column-wise modulation
    OVERPARAM = "overparam"  # R correlated latents per image, row-wise modulation


class LatentSpace(str, Enum):
    """The four spaces an image can be generated from (and inverted into)."""
    W_VECTOR = "w"          # one vector shared by all layers
    W_PLUS = "w_plus"       # one vector per layer
    W_MATRIX = "W"          # one R x D matrix shared by all layers
    W_MATRIX_PLUS = "W_plus"  # one R x D matrix per layer

    @property
    def per_layer(self) -> bool:
        return self in (LatentSpace.W_PLUS, LatentSpace.W_MATRIX_PLUS)

    @property
    def is_matrix(self) -> bool:
        return self in (LatentSpace.W_MATRIX, LatentSpace.W_MATRIX_PLUS)

    @classmethod
    def parse(cls, name: str) -> "LatentSpace":
        """Accepts the CLI spellings too: w, wplus, W, Wplus."""
        aliases = {"wplus": "w_plus", "w+": "w_plus", "Wplus": "W_plus", "W+": "W_plus"}
        return cls(aliases.get(name, name))


class LayerSpec(BaseModel):
    """One style-consuming synthesis layer (modulated conv)."""
    model_config = ConfigDict(frozen=True)

    in_channels: int = Field(ge=1)
    out_channels: int = Field(ge=1)
    kernel_size: int = Field(default=3, ge=1)
    resolution: int = Field(ge=1)  # spatial size the conv runs at
    upsample: bool = False         # nearest 2x after the activation

    @field_validator("kernel_size")
    @classmethod
    def _odd_kernel(cls, k: int) -> int:
        if k % 2 != 1:
            raise ValueError(f"kernel_size must be odd, got {k}")
        return k

    @property
    def out_resolution(self) -> int:
        return self.resolution * 2 if self.upsample else self.resolution


class GeneratorConfig(BaseModel):
    """
    Full layer specification of a generator.

    `dim` is D (latent size), `rows` is R (latent rows per matrix), and
    `layers` lists the L style-consuming convolutions in order.
    """
    model_config = ConfigDict(frozen=True)

    dim: int = Field(default=64, ge=1)
    rows: Optional[int] = Field(default=None, ge=1)
    mapping_layers: int = Field(default=2, ge=1)
    normalize_input: bool = True
    const_channels: int = Field(ge=1)
    const_resolution: int = Field(default=4, ge=1)
    image_channels: int = Field(default=3, ge=1)
    layers: List[LayerSpec]
    modulation_mode: ModulationMode = ModulationMode.OVERPARAM

    @model_validator(mode="before")
    @classmethod
    def _default_rows(cls, data):
        if isinstance(data, dict) and data.get("rows") is None:
            data = {**data, "rows": data.get("dim", 64)}
        return data

    @model_validator(mode="after")
    def _check_chain(self) -> "GeneratorConfig":
        if not self.layers:
            raise ValueError("a generator needs at least one synthesis layer")

        channels, resolution = self.const_channels, self.const_resolution
        for idx, layer in enumerate(self.layers):
            if layer.in_channels != channels:
                raise ValueError(
                    f"layer {idx}: in_channels {layer.in_channels} != previous output {channels}"
                )
            if layer.resolution != resolution:
                raise ValueError(
                    f"layer {idx}: resolution {layer.resolution} != previous output {resolution}"
                )
            channels, resolution = layer.out_channels, layer.out_resolution

        widest = max(layer.out_channels for layer in self.layers)
        if self.rows < widest:
            raise ValueError(f"rows R={self.rows} must be >= widest layer N_O={widest} (rows are dropped, never added)")
        return self

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    @property
    def resolution(self) -> int:
        return self.layers[-1].out_resolution

    @property
    def image_shape(self) -> Tuple[int, int, int]:
        return (self.image_channels, self.resolution, self.resolution)

    @classmethod
    def desk(cls, dim: int = 64, rows: Optional[int] = None, resolution: int = 32,
             channels: int = 32, kernel_size: int = 3,
             mode: ModulationMode = ModulationMode.OVERPARAM,
             mapping_layers: int = 2) -> "GeneratorConfig":
        """
        Desk-scale architecture: 4x4 constant, one modulated conv at each of
        4, 8, ..., `resolution`, nearest upsample between them.

        Channel width is capped at R so the row-drop rule always applies.
        """
        rows = rows or dim
        if resolution < 4 or resolution & (resolution - 1):
            raise ValueError(f"resolution must be a power of two >= 4, got {resolution}")
        width = min(channels, rows)
        n_layers = int(math.log2(resolution // 4)) + 1

        layers = []
        res = 4
        for idx in range(n_layers):
            last = idx == n_layers - 1
            layers.append(LayerSpec(in_channels=width, out_channels=width,
                                    kernel_size=kernel_size, resolution=res, upsample=not last))
            res = res if last else res * 2

        return cls(dim=dim, rows=rows, mapping_layers=mapping_layers, const_channels=width,
                   layers=layers, modulation_mode=mode)


class LossSpec(BaseModel):
    """Reconstruction loss: perceptual * d_perc + pixel * mean squared error."""
    model_config = ConfigDict(frozen=True)

    perceptual: float = Field(default=1.0, ge=0.0)
    pixel: float = Field(default=0.0, ge=0.0)

    @model_validator(mode="after")
    def _not_empty(self) -> "LossSpec":
        if self.perceptual == 0.0 and self.pixel == 0.0:
            raise ValueError("loss needs a positive perceptual or pixel weight")
        return self


class InversionConfig(BaseModel):
    """Optimization protocol for inversion (defaults follow the Adam/truncation recipe)."""
    model_config = ConfigDict(frozen=True)

    space: LatentSpace = LatentSpace.W_MATRIX
    steps: int = Field(default=1000, ge=1)
    lr: float = Field(default=0.05, gt=0.0)
    beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    adam_eps: float = Field(default=1e-8, gt=0.0)
    psi: float = Field(default=0.9, ge=0.0, le=1.0)
    trunc_disable_fraction: float = Field(default=0.5, ge=0.0, le=1.0)
    keep_truncation_throughout: bool = False
    loss: LossSpec = LossSpec()
    init: Literal["mean_w", "random"] = "mean_w"
    log_every: int = Field(default=100, ge=1)

    @field_validator("space", mode="before")
    @classmethod
    def _parse_space(cls, v):
        return LatentSpace.parse(v) if isinstance(v, str) else v

    def truncation_active(self, step: int) -> bool:
        """Truncation runs for steps < fraction * steps, or always in PULSE mode."""
        if self.psi >= 1.0:
            return False
        if self.keep_truncation_throughout:
            return True
        return step < self.trunc_disable_fraction * self.steps


class TrainConfig(BaseModel):
    """Toy adversarial training schedule (same for both modulation modes)."""
    model_config = ConfigDict(frozen=True)

    steps: int = Field(default=2000, ge=0)
    batch_size: int = Field(default=16, ge=1)
    g_lr: float = Field(default=0.002, gt=0.0)
    d_lr: float = Field(default=0.002, gt=0.0)
    betas: Tuple[float, float] = (0.0, 0.99)
    ema_halflife: float = Field(default=100.0, ge=0.0)  # steps; 0 keeps the raw generator weights
    ema_rampup: float = Field(default=0.1, ge=0.0)      # half-life <= rampup * steps done
    style_mixing_prob: float = Field(default=0.9, ge=0.0, le=1.0)
    correlated: bool = True  # correlated rows for overparam mode
    r1_gamma: float = Field(default=1.0, ge=0.0)
    r1_interval: int = Field(default=16, ge=1)
    dataset_size: int = Field(default=4096, ge=1)
    mean_w_samples: int = Field(default=10_000, ge=1)
    log_interval: int = Field(default=100, ge=1)
    checkpoint_interval: int = Field(default=500, ge=1)
    sample_interval: int = Field(default=500, ge=1)
    n_sample_images: int = Field(default=16, ge=1)
