"""
Image helpers.

Images are float tensors of shape [C, H, W] with values nominally in
[-1, 1]. Values are only clamped when exported to 8-bit.
"""

import math
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
import torch
from PIL import Image

from src.core.errors import NonFiniteError, ShapeMismatchError

# An ImageTensor is a torch.Tensor [C, H, W]; batches are [B, C, H, W].
ImageTensor = torch.Tensor


def validate_image(img: ImageTensor) -> ImageTensor:
    if img.ndim != 3:
        raise ShapeMismatchError(f"expected image [C, H, W], got shape {list(img.shape)}")
    if not torch.isfinite(img).all():
        raise NonFiniteError("image contains non-finite values")
    return img


def to_uint8(img: ImageTensor) -> np.ndarray:
    """[C, H, W] in [-1, 1] -> [H, W, C] uint8, pixel = round((v + 1) / 2 * 255)."""
    validate_image(img)
    v = img.detach().cpu().to(torch.float64).clamp(-1.0, 1.0).numpy()
    pixels = np.floor((v + 1.0) / 2.0 * 255.0 + 0.5).astype(np.uint8)
    return np.transpose(pixels, (1, 2, 0))


def export_png(img: ImageTensor, path: Union[str, Path]) -> Path:
    """Save as an 8-bit RGB PNG."""
    pixels = to_uint8(img)
    if pixels.shape[2] == 1:
        pixels = np.repeat(pixels, 3, axis=2)
    path = Path(path)
    Image.fromarray(pixels).save(path, format="PNG")
    return path


def load_png(path: Union[str, Path], size: Optional[int] = None) -> ImageTensor:
    """Load an image file as [3, H, W] in [-1, 1], optionally resized (nearest)."""
    with Image.open(path) as im:
        im = im.convert("RGB")
        if size is not None and im.size != (size, size):
            im = im.resize((size, size), resample=Image.NEAREST)
        pixels = np.asarray(im, dtype=np.float32)
    img = torch.from_numpy(pixels.copy()).permute(2, 0, 1)
    return img / 127.5 - 1.0


def make_grid(images: Sequence[ImageTensor], ncols: Optional[int] = None, pad: int = 1) -> ImageTensor:
    """Tile equally-sized images into one image, padding with -1 (black)."""
    images: List[ImageTensor] = [validate_image(im) for im in images]
    if not images:
        raise ValueError("make_grid needs at least one image")
    c, h, w = images[0].shape
    ncols = ncols or int(math.ceil(math.sqrt(len(images))))
    nrows = int(math.ceil(len(images) / ncols))

    grid = torch.full((c, nrows * (h + pad) + pad, ncols * (w + pad) + pad), -1.0)
    for idx, im in enumerate(images):
        if im.shape != (c, h, w):
            raise ShapeMismatchError("make_grid needs images of equal shape")
        r, col = divmod(idx, ncols)
        top, left = pad + r * (h + pad), pad + col * (w + pad)
        grid[:, top:top + h, left:left + w] = im.detach().cpu().float()
    return grid
