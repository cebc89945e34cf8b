"""
Toy adversarial training loop.

Each step updates the discriminator (logistic loss, lazy R1 every
`r1_interval` steps scaled by the interval) and then the generator
(non-saturating loss). Generator latents are drawn fresh for every batch
element: correlated Z matrices in overparameterized mode, single z vectors
in baseline mode, both with style-mixing regularization.

A moving average of the generator weights (half-life `ema_halflife` steps,
ramped up over the first steps) is what gets previewed and checkpointed,
and it is loaded into G when training ends. After the last step mu_W is
re-estimated and stored with the final checkpoint.
"""

import copy
import logging
import math
from pathlib import Path
from typing import List, Optional

import pandas as pd
import torch
from pydantic import BaseModel, ConfigDict

from src.core.errors import ShapeMismatchError, TrainingError
from src.core.images import export_png, make_grid
from src.core.rng import SeededRng
from src.latent.sampling import estimate_mean_w, sample_correlated_z_batch
from src.models.config import LatentSpace, ModulationMode, TrainConfig
from src.models.latents import StyleSource
from src.networks.checkpoint import save_checkpoint
from src.networks.discriminator import Discriminator
from src.networks.mapper import map_latent
from src.networks.synthesis import Generator, sample_images
from src.perception.metrics import fit_stats, frechet_distance
from src.training.dataset import SyntheticDataset
from src.training.losses import gan_losses, r1_penalty
from src.training.mixing import style_mixing_regularize

logger = logging.getLogger(__name__)

FINAL_CHECKPOINT = "checkpoint"


class TrainingResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    curves: pd.DataFrame          # step, d_loss, g_loss, r1 (NaN on steps without R1)
    fid_curve: pd.DataFrame       # step, fid_proxy
    checkpoint: Optional[Path] = None


def training_source(G: Generator, rng: SeededRng, batch: int, cfg: TrainConfig) -> StyleSource:
    """Per-layer style source for one generator batch (differentiable through M)."""
    gc = G.config
    overparam = gc.modulation_mode == ModulationMode.OVERPARAM

    def draw() -> torch.Tensor:
        if not overparam:
            return rng.normal((batch, gc.dim))
        if cfg.correlated:
            return sample_correlated_z_batch(rng, batch, gc.rows, gc.dim)
        return rng.normal((batch, gc.rows, gc.dim))

    Z_a, Z_b = draw(), draw()
    Z = torch.stack([
        style_mixing_regularize(rng, Z_a[i], Z_b[i], cfg.style_mixing_prob, gc.n_layers).latents
        for i in range(batch)
    ])
    space = LatentSpace.W_MATRIX_PLUS if overparam else LatentSpace.W_PLUS
    return StyleSource(space=space, latent=map_latent(G.mapper, Z))


def _finite(*values: torch.Tensor) -> bool:
    return all(bool(torch.isfinite(v).all()) for v in values)


def ema_beta(cfg: TrainConfig, done: int) -> float:
    """Decay of the weight average after `done` steps (0 copies the raw weights)."""
    halflife = cfg.ema_halflife
    if cfg.ema_rampup > 0:
        halflife = min(halflife, cfg.ema_rampup * done)
    return 0.5 ** (1.0 / halflife) if halflife > 0 else 0.0


@torch.no_grad()
def update_ema(G_ema: Generator, G: Generator, beta: float) -> None:
    """G_ema <- beta * G_ema + (1 - beta) * G, parameter by parameter."""
    for p_ema, p in zip(G_ema.parameters(), G.parameters()):
        p_ema.copy_(p.detach().lerp(p_ema, beta))
    for b_ema, b in zip(G_ema.buffers(), G.buffers()):
        b_ema.copy_(b)


def train(G: Generator, D: Discriminator, data: SyntheticDataset, cfg: TrainConfig, rng: SeededRng,
          out_dir: Optional[Path] = None, threads: int = 1) -> TrainingResult:
    """
    Train G against D on `data` for `cfg.steps` steps (G and D are updated in place).

    With `out_dir`, writes periodic checkpoints, sample grids, loss CSVs and
    the final checkpoint. A non-finite loss raises TrainingError pointing at
    the last checkpoint written.
    """
    if (data.channels, data.resolution, data.resolution) != G.config.image_shape:
        raise ShapeMismatchError(
            f"dataset images {[data.channels, data.resolution, data.resolution]} "
            f"!= generator output {list(G.config.image_shape)}"
        )

    out_dir = Path(out_dir) if out_dir is not None else None
    last_good: Optional[Path] = None
    if out_dir is not None:
        (out_dir / "samples").mkdir(parents=True, exist_ok=True)
        last_good = save_checkpoint(G, out_dir / "checkpoints" / "step_000000")

    G_ema = copy.deepcopy(G).eval().requires_grad_(False)
    g_opt = torch.optim.Adam(G.parameters(), lr=cfg.g_lr, betas=cfg.betas)
    d_opt = torch.optim.Adam(D.parameters(), lr=cfg.d_lr, betas=cfg.betas)
    preview_rng = rng.spawn(0)
    reals_preview = data.batch(range(min(cfg.n_sample_images, len(data))), threads)

    rows: List[dict] = []
    fid_rows: List[dict] = []
    G.train()
    D.train()

    for step in range(cfg.steps):
        real = data.batch(rng.integers(0, len(data), cfg.batch_size), threads)

        # discriminator
        with torch.no_grad():
            fake = G(training_source(G, rng, cfg.batch_size, cfg))
        _, d_loss = gan_losses(D(real), D(fake))
        r1 = None
        if cfg.r1_gamma > 0 and step % cfg.r1_interval == 0:
            real_req = real.detach().requires_grad_(True)
            r1 = r1_penalty(D(real_req), real_req, cfg.r1_gamma)
        d_total = d_loss if r1 is None else d_loss + r1 * cfg.r1_interval
        if not _finite(d_total):
            raise TrainingError(f"non-finite discriminator loss at step {step}", last_good)
        d_opt.zero_grad(set_to_none=True)
        d_total.backward()
        d_opt.step()

        # generator
        fake = G(training_source(G, rng, cfg.batch_size, cfg))
        g_loss, _ = gan_losses(torch.zeros(1), D(fake))
        if not _finite(g_loss):
            raise TrainingError(f"non-finite generator loss at step {step}", last_good)
        g_opt.zero_grad(set_to_none=True)
        g_loss.backward()
        g_opt.step()
        update_ema(G_ema, G, ema_beta(cfg, step + 1))

        rows.append({"step": step, "d_loss": d_loss.item(), "g_loss": g_loss.item(),
                     "r1": math.nan if r1 is None else r1.item()})
        done = step + 1
        if done % cfg.log_interval == 0:
            logger.info("step %d/%d  d_loss %.4f  g_loss %.4f", done, cfg.steps, d_loss.item(), g_loss.item())

        if done % cfg.sample_interval == 0:
            fid_rows.append({"step": done, "fid_proxy": _preview(G_ema, preview_rng, reals_preview, cfg, out_dir, done)})
        if out_dir is not None and done % cfg.checkpoint_interval == 0:
            last_good = save_checkpoint(G_ema, out_dir / "checkpoints" / f"step_{done:06d}")

    G.load_state_dict(G_ema.state_dict())
    G.eval()
    with torch.no_grad():
        G.mu_w.copy_(estimate_mean_w(G.mapper, rng, cfg.mean_w_samples))

    result = TrainingResult(
        curves=pd.DataFrame(rows, columns=["step", "d_loss", "g_loss", "r1"]),
        fid_curve=pd.DataFrame(fid_rows, columns=["step", "fid_proxy"]),
    )
    if out_dir is not None:
        _preview(G, preview_rng, reals_preview, cfg, out_dir, cfg.steps)
        result.checkpoint = save_checkpoint(G, out_dir / FINAL_CHECKPOINT)
        result.curves.to_csv(out_dir / "loss_curves.csv", index=False)
        result.fid_curve.to_csv(out_dir / "fid_curve.csv", index=False)
    logger.info("training finished after %d steps", cfg.steps)
    return result


def _preview(G: Generator, preview_rng: SeededRng, reals: torch.Tensor, cfg: TrainConfig,
             out_dir: Optional[Path], step: int) -> Optional[float]:
    """Sample grid for `step` (when writing output) and the FID proxy against real images."""
    samples = sample_images(G, preview_rng, cfg.n_sample_images)
    if out_dir is not None:
        export_png(make_grid(list(samples.clamp(-1, 1))), out_dir / "samples" / f"step_{step:06d}.png")
    if samples.shape[0] < 2 or reals.shape[0] < 2:
        return None
    return frechet_distance(fit_stats(samples), fit_stats(reals))
