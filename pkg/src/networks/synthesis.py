"""
Synthesis network.

Learned 4x4 constant -> L modulated convolutions -> 1x1 RGB projection.
Each layer l takes a W-space latent of shape [Rk, D] (Rk = 1 for w-like
sources, Rk = R for matrix sources), projects it with A(l) and modulates:

    Rk = 1:  column-wise (baseline) modulation with s = A(l)(w)
    Rk = R:  row-wise modulation with S = A(l)(W)[:N_O]   (extra rows dropped)

then demodulates, convolves (same padding), adds a bias, applies a
leaky-ReLU (0.2) and upsamples 2x (nearest) when the layer is flagged.
There are no noise inputs.
"""

import logging
from typing import Tuple

import torch
from torch import nn
from torch.nn import functional as F

from src.core.errors import NonFiniteError, ShapeMismatchError
from src.core.images import ImageTensor
from src.core.rng import SeededRng
from src.latent.sampling import sample_correlated_z_batch, truncate
from src.models.config import GeneratorConfig, LatentSpace, LossSpec, ModulationMode
from src.models.latents import StyleSource
from src.networks.mapper import MappingNetwork, build_projections, map_latent
from src.networks.modulation import demodulate, drop_rows, modulate_baseline, modulate_overparam
from src.perception.metrics import reconstruction_loss

logger = logging.getLogger(__name__)

ACTIVATION_SLOPE = 0.2


class Generator(nn.Module):
    """Mapper + affine projections + synthesis layers, with the cached mean latent mu_W."""

    def __init__(self, config: GeneratorConfig):
        super().__init__()
        self.config = config
        self.mapper = MappingNetwork(config.dim, config.mapping_layers, config.normalize_input)
        self.projections = build_projections(config)
        self.const_input = nn.Parameter(
            torch.randn(config.const_channels, config.const_resolution, config.const_resolution)
        )
        self.conv_weights = nn.ParameterList(
            nn.Parameter(torch.randn(l.out_channels, l.in_channels, l.kernel_size, l.kernel_size))
            for l in config.layers
        )
        self.conv_biases = nn.ParameterList(nn.Parameter(torch.zeros(l.out_channels)) for l in config.layers)
        self.to_rgb = nn.Conv2d(config.layers[-1].out_channels, config.image_channels, kernel_size=1)
        self.register_buffer("mu_w", torch.zeros(config.dim))

    # -- latents ---------------------------------------------------------

    def expand(self, source: StyleSource) -> Tuple[torch.Tensor, bool]:
        """
        Per-layer W latents [B, L, Rk, D] for any source, plus whether it was batched.

        w and W are shared across layers; w+ and W+ already are per layer.
        """
        source.check(self.config)
        latent = source.latent if source.batched else source.latent.unsqueeze(0)
        L = self.config.n_layers

        if source.space == LatentSpace.W_VECTOR:       # [B, D]
            layers = latent[:, None, None, :].expand(-1, L, 1, -1)
        elif source.space == LatentSpace.W_PLUS:       # [B, L, D]
            layers = latent[:, :, None, :]
        elif source.space == LatentSpace.W_MATRIX:     # [B, R, D]
            layers = latent[:, None, :, :].expand(-1, L, -1, -1)
        else:                                          # [B, L, R, D]
            layers = latent
        return layers, source.batched

    # -- forward ---------------------------------------------------------

    def synthesize_layers(self, layers: torch.Tensor) -> torch.Tensor:
        """Images [B, C, H, W] from per-layer W latents [B, L, Rk, D]."""
        B, L, rows, _ = layers.shape
        if L != self.config.n_layers:
            raise ShapeMismatchError(f"got latents for {L} layers, generator has {self.config.n_layers}")

        x = self.const_input.unsqueeze(0).expand(B, -1, -1, -1)
        for idx, spec in enumerate(self.config.layers):
            theta = self.conv_weights[idx]
            if rows == 1:
                s = self.projections[idx](layers[:, idx, 0])                       # [B, N_I]
                modulated = modulate_baseline(theta, s)
            else:
                S = self.projections[idx](drop_rows(layers[:, idx], spec.out_channels))  # [B, N_O, N_I]
                modulated = modulate_overparam(theta, S)
            weight = demodulate(modulated).weight                                   # [B, N_O, N_I, k, k]

            x = _grouped_conv(x, weight)
            x = x + self.conv_biases[idx].view(1, -1, 1, 1)
            x = F.leaky_relu(x, negative_slope=ACTIVATION_SLOPE)
            if spec.upsample:
                x = F.interpolate(x, scale_factor=2, mode="nearest")

        return self.to_rgb(x)

    def forward(self, source: StyleSource) -> torch.Tensor:
        layers, batched = self.expand(source)
        images = self.synthesize_layers(layers)
        return images if batched else images[0]


def _grouped_conv(x: torch.Tensor, weight: torch.Tensor) -> torch.Tensor:
    """Per-sample convolution: x [B, I, H, W] with weight [B, O, I, k, k]."""
    B, n_in, H, W = x.shape
    _, n_out, _, k, _ = weight.shape
    out = F.conv2d(x.reshape(1, B * n_in, H, W), weight.reshape(B * n_out, n_in, k, k),
                   padding=k // 2, groups=B)
    return out.reshape(B, n_out, H, W)


def build_generator(config: GeneratorConfig, seed: int = 0) -> Generator:
    """Freshly initialized generator; identical seeds give identical parameters."""
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        G = Generator(config)
    return G


def synthesize(G: Generator, src: StyleSource) -> ImageTensor:
    """S(src): one image [C, H, W] (or a batch when src is batched)."""
    return G(src)


def count_latent_params(config: GeneratorConfig, space: LatentSpace) -> int:
    """Free latent parameters: w -> D, w+ -> L*D, W -> R*D, W+ -> L*R*D."""
    space = LatentSpace.parse(space) if isinstance(space, str) else space
    D, L, R = config.dim, config.n_layers, config.rows
    return {
        LatentSpace.W_VECTOR: D,
        LatentSpace.W_PLUS: L * D,
        LatentSpace.W_MATRIX: R * D,
        LatentSpace.W_MATRIX_PLUS: L * R * D,
    }[space]


def mean_source(G: Generator, space: LatentSpace) -> StyleSource:
    """Source with every vector / row set to mu_W."""
    cfg = G.config
    mu = G.mu_w.detach().clone()
    shape = {
        LatentSpace.W_VECTOR: (cfg.dim,),
        LatentSpace.W_PLUS: (cfg.n_layers, cfg.dim),
        LatentSpace.W_MATRIX: (cfg.rows, cfg.dim),
        LatentSpace.W_MATRIX_PLUS: (cfg.n_layers, cfg.rows, cfg.dim),
    }[space]
    return StyleSource(space=space, latent=mu.expand(*shape).clone())


@torch.no_grad()
def random_source(G: Generator, space: LatentSpace, rng: SeededRng, correlated: bool = False) -> StyleSource:
    """
    Random point on the W marginal: every vector / row is M(z) for a fresh z.

    With `correlated=True`, matrix rows use the shared-component construction
    the overparameterized generator was trained with.
    """
    cfg = G.config
    per_layer = cfg.n_layers if space.per_layer else 1
    rows = cfg.rows if space.is_matrix else 1
    if correlated and space.is_matrix:
        z = sample_correlated_z_batch(rng, per_layer, rows, cfg.dim)
    else:
        z = rng.normal((per_layer, rows, cfg.dim))
    w = map_latent(G.mapper, z.to(G.mu_w.dtype))

    if space == LatentSpace.W_VECTOR:
        latent = w[0, 0]
    elif space == LatentSpace.W_PLUS:
        latent = w[:, 0]
    elif space == LatentSpace.W_MATRIX:
        latent = w[0]
    else:
        latent = w
    return StyleSource(space=space, latent=latent.contiguous())


def native_space(config: GeneratorConfig) -> LatentSpace:
    """The space a generator samples from at generation time."""
    return LatentSpace.W_MATRIX if config.modulation_mode == ModulationMode.OVERPARAM else LatentSpace.W_VECTOR


@torch.no_grad()
def sample_images(G: Generator, rng: SeededRng, n: int, psi: float = 1.0) -> torch.Tensor:
    """n generated images [n, C, H, W] from the generator's native space."""
    space = native_space(G.config)
    latents = torch.stack([random_source(G, space, rng.spawn(i), correlated=True).latent for i in range(n)])
    if psi < 1.0:
        latents = truncate(latents, G.mu_w, psi)
    return synthesize(G, StyleSource(space=space, latent=latents))


def loss_and_grad(G: Generator, src: StyleSource, y: ImageTensor, loss: LossSpec = LossSpec(),
                  extractor=None) -> Tuple[float, torch.Tensor]:
    """
    L(S(src), y) and its gradient with respect to the latent of `src`.

    Generator parameters receive no gradient; only the latent does.
    """
    latent = src.latent.detach().clone().requires_grad_(True)
    image = synthesize(G, src.with_latent(latent))
    if image.shape != y.shape:
        raise ShapeMismatchError(f"target shape {list(y.shape)} != generator output {list(image.shape)}")

    value = reconstruction_loss(image, y, loss, extractor)
    if not torch.isfinite(value):
        raise NonFiniteError(f"loss is not finite: {value.item()}")
    (grad,) = torch.autograd.grad(value, latent)
    return value.item(), grad
