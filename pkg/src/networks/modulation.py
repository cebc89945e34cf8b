"""
Style modulation of convolution weights.

Baseline (column-wise):       theta'[i, j] = theta[i, j] * s[j]
Overparameterized (row-wise): theta'[i, j] = theta[i, j] * S[i, j]

Replicating s into every row of S gives the baseline result bit-for-bit,
because both compute the same float products. Demodulation then rescales
every output channel i to unit L2 norm.

The functions accept a leading batch axis on the style (s: [B, N_I],
S: [B, N_O, N_I]) and return one weight tensor per batch element.
"""

import torch
from pydantic import BaseModel, ConfigDict

from src.core.errors import ShapeMismatchError

DEMOD_EPS = 1e-8


class ModulatedWeights(BaseModel):
    """theta' (or theta'' once demodulated), shaped like theta with an optional batch axis."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    weight: torch.Tensor
    demodulated: bool = False


def modulate_baseline(theta: torch.Tensor, s: torch.Tensor) -> ModulatedWeights:
    """Scale input-channel column j of theta [N_O, N_I, k, k] by s[j]."""
    n_in = theta.shape[1]
    if s.shape[-1] != n_in:
        raise ShapeMismatchError(f"style has {s.shape[-1]} entries, theta has N_I={n_in}")
    s = s.unsqueeze(-2)  # [..., 1, N_I]: same coefficient for every output row
    return ModulatedWeights(weight=theta * s[..., None, None])


def modulate_overparam(theta: torch.Tensor, S: torch.Tensor) -> ModulatedWeights:
    """Scale theta[i, j] by S[i, j]; S is [N_O, N_I] (after row dropping)."""
    if tuple(S.shape[-2:]) != tuple(theta.shape[:2]):
        raise ShapeMismatchError(
            f"style matrix {list(S.shape[-2:])} does not match theta (N_O, N_I)={list(theta.shape[:2])}"
        )
    return ModulatedWeights(weight=theta * S[..., None, None])


def replicate_rows(s: torch.Tensor, n_out: int) -> torch.Tensor:
    """[..., N_I] -> [..., n_out, N_I] with every row equal to s."""
    return s.unsqueeze(-2).expand(*s.shape[:-1], n_out, s.shape[-1])


def drop_rows(S: torch.Tensor, n_out: int) -> torch.Tensor:
    """Keep the first `n_out` rows of an [..., R, N_I] style matrix."""
    rows = S.shape[-2]
    if rows < n_out:
        raise ShapeMismatchError(f"style matrix has R={rows} rows, layer needs N_O={n_out}")
    return S[..., :n_out, :]


def demodulate(theta_prime: ModulatedWeights, eps: float = DEMOD_EPS) -> ModulatedWeights:
    """theta''[i] = theta'[i] / sqrt(sum_{j,a,b} theta'[i, j, a, b]^2 + eps)."""
    if theta_prime.demodulated:
        raise ValueError("weights are already demodulated")
    w = theta_prime.weight
    norm = torch.rsqrt(w.square().sum(dim=(-3, -2, -1), keepdim=True) + eps)
    return ModulatedWeights(weight=w * norm, demodulated=True)
