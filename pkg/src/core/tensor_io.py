"""
Binary tensor files.

Layout (all little-endian):

    bytes 0-3   magic "OPT1"
    u32         rank
    rank x u64  dims
    f32 ...     payload, row-major, product(dims) values

Files written by `save_tensor` load back bit-exactly with `load_tensor`.
"""

from pathlib import Path
from typing import Union

import numpy as np
import torch

from src.core.errors import NonFiniteError, TensorFormatError

MAGIC = b"OPT1"
EXTENSION = ".opt"

ArrayLike = Union[np.ndarray, torch.Tensor]


def _to_numpy(t: ArrayLike) -> np.ndarray:
    if isinstance(t, torch.Tensor):
        t = t.detach().cpu().numpy()
    return np.asarray(t, dtype=np.float32)


def save_tensor(t: ArrayLike, path: Union[str, Path]) -> Path:
    """Write `t` as float32 in the OPT1 layout. Non-finite values are rejected."""
    data = _to_numpy(t)
    if not np.all(np.isfinite(data)):
        raise NonFiniteError(f"refusing to save non-finite tensor to {path}")

    path = Path(path)
    header = MAGIC
    header += np.array([data.ndim], dtype="<u4").tobytes()
    header += np.array(data.shape, dtype="<u8").tobytes()
    payload = np.ascontiguousarray(data, dtype="<f4").tobytes(order="C")

    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)
    return path


def load_tensor(path: Union[str, Path]) -> torch.Tensor:
    """Read an OPT1 file back into a float32 torch tensor."""
    path = Path(path)
    raw = path.read_bytes()

    if raw[:4] != MAGIC:
        raise TensorFormatError(f"{path.name}: bad magic {raw[:4]!r}, expected {MAGIC!r}")
    if len(raw) < 8:
        raise TensorFormatError(f"{path.name}: truncated header")

    rank = int(np.frombuffer(raw, dtype="<u4", count=1, offset=4)[0])
    dims_end = 8 + 8 * rank
    if len(raw) < dims_end:
        raise TensorFormatError(f"{path.name}: truncated dims (rank {rank})")
    dims = tuple(int(d) for d in np.frombuffer(raw, dtype="<u8", count=rank, offset=8))

    n_values = int(np.prod(dims, dtype=np.int64)) if dims else 1
    payload = raw[dims_end:]
    if len(payload) != 4 * n_values:
        raise TensorFormatError(
            f"{path.name}: payload has {len(payload)} bytes, shape {list(dims)} needs {4 * n_values}"
        )

    data = np.frombuffer(payload, dtype="<f4").astype(np.float32).reshape(dims)
    return torch.from_numpy(data.copy())
