"""Non-saturating logistic GAN losses and the R1 gradient penalty."""

from typing import Tuple

import torch
from torch.nn import functional as F


def gan_losses(d_real: torch.Tensor, d_fake: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
    """
    (g_loss, d_loss), both batch means:

        g_loss = softplus(-d_fake)
        d_loss = softplus(d_fake) + softplus(-d_real)
    """
    g_loss = F.softplus(-d_fake).mean()
    d_loss = F.softplus(d_fake).mean() + F.softplus(-d_real).mean()
    return g_loss, d_loss


def r1_penalty(d_real: torch.Tensor, real: torch.Tensor, gamma: float) -> torch.Tensor:
    """
    gamma / 2 * E ||grad_x D(x)||^2 at the real images.

    `real` must have had requires_grad set before `d_real` was computed.
    """
    (grad,) = torch.autograd.grad(d_real.sum(), real, create_graph=True, allow_unused=True)
    if grad is None:
        return torch.zeros((), dtype=real.dtype)
    return gamma / 2.0 * grad.pow(2).flatten(1).sum(dim=1).mean()
