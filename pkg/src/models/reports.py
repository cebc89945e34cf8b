"""
Result records returned by the experiment drivers.

Each report knows how to flatten itself into a pandas DataFrame so the CLI
and the workbook exporter can write it without knowing its internals.
"""

from typing import Dict, List, Optional

import numpy as np
import pandas as pd
import torch
from pydantic import BaseModel, ConfigDict, Field

from src.models.config import LatentSpace
from src.models.latents import StyleSource


class InversionTrace(BaseModel):
    """Everything one inversion run produced."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    space: LatentSpace
    losses: List[float]                      # loss at each step, before its update
    truncated: List[bool]                    # whether truncation ran before that step
    final_loss: float                        # loss of the returned source
    source: StyleSource
    image: torch.Tensor
    truncation_disabled_at: Optional[int] = None  # first step without truncation

    @property
    def steps(self) -> int:
        return len(self.losses)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "step": np.arange(self.steps),
            "loss": self.losses,
            "truncation_active": self.truncated,
        })


class NondeterminismReport(BaseModel):
    """Spread of midpoint images between repeated unregularized inversions, per space."""
    n_restarts: int
    n_midpoints: int
    spread: Dict[str, float]                 # mean pairwise perceptual distance among midpoints
    final_losses: Dict[str, List[float]]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([
            {"space": space, "midpoint_spread": value, "n_restarts": self.n_restarts,
             "n_midpoints": self.n_midpoints,
             "median_final_loss": float(np.median(self.final_losses[space]))}
            for space, value in self.spread.items()
        ])


class ReconstructionReport(BaseModel):
    """Losses of a batch of inversions per space (targets x steps)."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    losses: Dict[str, np.ndarray]            # space -> [n_targets, steps]
    final_losses: Dict[str, np.ndarray]      # space -> [n_targets]
    latent_params: Dict[str, int]
    fid_proxy: Dict[str, Optional[float]] = Field(default_factory=dict)

    def median_final(self, space: str) -> float:
        return float(np.median(self.final_losses[space]))

    def steps_to_reach(self, space: str, threshold: float) -> List[Optional[int]]:
        """First step whose loss is <= threshold, per target (None if never)."""
        out = []
        for curve in self.losses[space]:
            hits = np.nonzero(curve <= threshold)[0]
            out.append(int(hits[0]) if hits.size else None)
        return out

    def faster_fraction(self, fast: str, slow: str) -> float:
        """
        Share of targets on which `fast` reaches the median final loss of
        `slow` in fewer steps than `slow` itself does.
        """
        threshold = self.median_final(slow)
        never = np.inf
        wins = 0
        pairs = zip(self.steps_to_reach(fast, threshold), self.steps_to_reach(slow, threshold))
        for a, b in pairs:
            a = never if a is None else a
            b = never if b is None else b
            wins += int(a < b)
        return wins / len(self.final_losses[fast])

    def summary_frame(self) -> pd.DataFrame:
        rows = []
        for space, finals in self.final_losses.items():
            rows.append({
                "space": space,
                "latent_params": self.latent_params[space],
                "median_final_loss": float(np.median(finals)),
                "q10_final_loss": float(np.quantile(finals, 0.1)),
                "q90_final_loss": float(np.quantile(finals, 0.9)),
                "fid_proxy": self.fid_proxy.get(space),
            })
        return pd.DataFrame(rows)

    def curves_frame(self) -> pd.DataFrame:
        """Per-step median and 10/90% quantiles across targets, long format."""
        frames = []
        for space, curves in self.losses.items():
            frames.append(pd.DataFrame({
                "space": space,
                "step": np.arange(curves.shape[1]),
                "q10": np.quantile(curves, 0.1, axis=0),
                "median": np.median(curves, axis=0),
                "q90": np.quantile(curves, 0.9, axis=0),
            }))
        return pd.concat(frames, ignore_index=True)


class InterpolationReport(BaseModel):
    """Midpoint realism and path length over all pairs of a latent set."""
    n_latents: int
    n_pairs: int
    fid_proxy: Optional[float]
    mean_ppl: float
    ppl: List[float]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([{"n_latents": self.n_latents, "n_pairs": self.n_pairs,
                              "midpoint_fid_proxy": self.fid_proxy, "mean_ppl": self.mean_ppl}])
