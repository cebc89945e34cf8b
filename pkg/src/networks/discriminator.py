"""
Small strided-conv discriminator for the toy training harness.

3 -> 32 -> 64 -> 128 channels with stride-2 3x3 convolutions, then a 1-channel
conv averaged over space: one logit per image.
"""

import torch
from torch import nn
from torch.nn import functional as F

ACTIVATION_SLOPE = 0.2


class Discriminator(nn.Module):
    def __init__(self, image_channels: int = 3, channels=(32, 64, 128)):
        super().__init__()
        widths = (image_channels,) + tuple(channels)
        self.convs = nn.ModuleList(
            nn.Conv2d(c_in, c_out, kernel_size=3, stride=2, padding=1)
            for c_in, c_out in zip(widths[:-1], widths[1:])
        )
        self.logit = nn.Conv2d(widths[-1], 1, kernel_size=3, padding=1)

    def forward(self, images: torch.Tensor) -> torch.Tensor:
        """Logits [B] for images [B, C, H, W]."""
        x = images
        for conv in self.convs:
            x = F.leaky_relu(conv(x), negative_slope=ACTIVATION_SLOPE)
        return self.logit(x).mean(dim=(1, 2, 3))


def build_discriminator(image_channels: int = 3, seed: int = 0) -> Discriminator:
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        D = Discriminator(image_channels)
    return D
