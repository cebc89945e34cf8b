"""
Optimization-based inversion.

Finds latent parameters in one of the four spaces whose synthesized image
matches a target:

1. Initialize every vector / row to mu_W (or to M(z) for fresh z).
2. Each step: while truncation is active, project the parameters toward
   mu_W by psi; compute the loss on the (optionally degraded) image; take an
   Adam step. Truncation stops after `trunc_disable_fraction` of the steps,
   or never in PULSE mode (`keep_truncation_throughout`).

Adam state is kept when truncation moves the parameters.
"""

import logging
import math
from typing import Callable, Optional

import torch

from src.core.errors import InversionError, ShapeMismatchError
from src.core.images import ImageTensor
from src.core.rng import SeededRng
from src.inversion.degradation import DegradationOp
from src.latent.sampling import truncate
from src.models.config import InversionConfig
from src.models.latents import StyleSource
from src.models.reports import InversionTrace
from src.networks.synthesis import Generator, mean_source, random_source, synthesize
from src.perception.features import FeatureExtractor
from src.perception.metrics import reconstruction_loss

logger = logging.getLogger(__name__)

# called as hook(step, params_before, params_after) whenever truncation runs
TruncationHook = Callable[[int, torch.Tensor, torch.Tensor], None]


def initial_source(G: Generator, cfg: InversionConfig, rng: Optional[SeededRng]) -> StyleSource:
    """
    mu_W everywhere, or a random point whose rows / vectors are M(z).

    Random matrix rows use the correlated construction of training, so each
    restart starts from a visibly different image.
    """
    if cfg.init == "mean_w":
        return mean_source(G, cfg.space)
    if rng is None:
        raise ValueError("random initialization needs an rng")
    return random_source(G, cfg.space, rng, correlated=True)


def invert(G: Generator, y: ImageTensor, cfg: InversionConfig = InversionConfig(),
           rng: Optional[SeededRng] = None, degradation: DegradationOp = DegradationOp(),
           on_truncate: Optional[TruncationHook] = None,
           extractor: Optional[FeatureExtractor] = None) -> InversionTrace:
    """Invert target `y` into `cfg.space`; returns the full trace."""
    expected = degradation.output_shape(G.config.image_shape)
    if tuple(y.shape) != expected:
        raise ShapeMismatchError(f"target shape {list(y.shape)} != expected {list(expected)}")

    start = initial_source(G, cfg, rng)
    params = start.latent.detach().clone().to(G.mu_w.dtype).requires_grad_(True)
    optimizer = torch.optim.Adam([params], lr=cfg.lr, betas=(cfg.beta1, cfg.beta2), eps=cfg.adam_eps)
    target = y.detach().to(params.dtype)

    losses, truncated = [], []
    disabled_at = None
    n_digits = int(math.log10(cfg.steps)) + 1

    for step in range(cfg.steps):
        active = cfg.truncation_active(step)
        if active:
            with torch.no_grad():
                before = params.detach().clone()
                params.copy_(truncate(params, G.mu_w, cfg.psi))
            if on_truncate is not None:
                on_truncate(step, before, params.detach().clone())
        elif disabled_at is None:
            disabled_at = step

        image = synthesize(G, start.with_latent(params))
        loss = reconstruction_loss(degradation(image), target, cfg.loss, extractor)
        if not torch.isfinite(loss):
            raise InversionError(f"non-finite loss at step {step} ({cfg.space.value})", losses)

        losses.append(loss.item())
        truncated.append(active)

        (grad,) = torch.autograd.grad(loss, params)
        params.grad = grad
        optimizer.step()

        if (step + 1) % cfg.log_every == 0 or step + 1 == cfg.steps:
            logger.info("invert[%s] step %*d/%d: loss %.5e%s", cfg.space.value, n_digits, step + 1,
                        cfg.steps, losses[-1], " (truncating)" if active else "")

    final = start.with_latent(params.detach().clone())
    with torch.no_grad():
        final_image = synthesize(G, final)
        final_loss = reconstruction_loss(degradation(final_image), target, cfg.loss, extractor).item()
    if not math.isfinite(final_loss):
        raise InversionError(f"non-finite final loss ({cfg.space.value})", losses)

    return InversionTrace(space=cfg.space, losses=losses, truncated=truncated, final_loss=final_loss,
                          source=final, image=final_image, truncation_disabled_at=disabled_at)


def invert_degraded(G: Generator, y_low: ImageTensor, deg: DegradationOp,
                    cfg: InversionConfig = InversionConfig(keep_truncation_throughout=True),
                    rng: Optional[SeededRng] = None, on_truncate: Optional[TruncationHook] = None,
                    extractor: Optional[FeatureExtractor] = None) -> InversionTrace:
    """
    Upsampling by inversion: minimize L(deg(S(params)), y_low).

    The problem is underconstrained, so truncation stays on for every step.
    """
    if not cfg.keep_truncation_throughout:
        logger.warning("degraded inversion keeps truncation on for all steps; overriding config")
        cfg = cfg.model_copy(update={"keep_truncation_throughout": True})
    return invert(G, y_low, cfg, rng, degradation=deg, on_truncate=on_truncate, extractor=extractor)
