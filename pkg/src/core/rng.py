"""
Deterministic random streams.

Every random draw in the package goes through a SeededRng so that a run is
reproducible from its seed alone. The stream is numpy's PCG64 bit generator;
normal variates use numpy's ziggurat method (`Generator.standard_normal`).
Identical seeds give identical streams within this implementation;
bit-exactness across languages or numpy major versions is not promised.

Child streams for parallel tasks are derived with `child_seed`:

    child_seed(parent, index) = first uint64 word of
        numpy.random.SeedSequence(entropy=parent, spawn_key=(index,))
"""

from typing import Sequence, Union

import numpy as np
import torch

ALGORITHM = "numpy.PCG64+ziggurat"
MAX_SEED = 2**64 - 1

Shape = Union[int, Sequence[int]]


def child_seed(parent_seed: int, task_index: int) -> int:
    """64-bit seed for task `task_index` spawned from `parent_seed`."""
    seq = np.random.SeedSequence(entropy=int(parent_seed), spawn_key=(int(task_index),))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


class SeededRng:
    """
    A seeded random stream owned by one flow at a time.

    Wraps `numpy.random.Generator(PCG64(seed))` and hands out float32 torch
    tensors, since that is what the networks consume.
    """

    def __init__(self, seed: int):
        seed = int(seed)
        if not 0 <= seed <= MAX_SEED:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self.algorithm = ALGORITHM
        self._gen = np.random.Generator(np.random.PCG64(seed))

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed}, algorithm={self.algorithm!r})"

    def spawn(self, task_index: int) -> "SeededRng":
        """Independent stream for a sub-task (does not advance this stream)."""
        return SeededRng(child_seed(self.seed, task_index))

    def normal(self, shape: Shape) -> torch.Tensor:
        """i.i.d. standard-normal float32 tensor."""
        data = self._gen.standard_normal(size=_as_tuple(shape), dtype=np.float32)
        return torch.from_numpy(np.ascontiguousarray(data))

    def uniform(self, shape: Shape, low: float = 0.0, high: float = 1.0) -> torch.Tensor:
        data = self._gen.uniform(low, high, size=_as_tuple(shape)).astype(np.float32)
        return torch.from_numpy(data)

    def integers(self, low: int, high: int, size: Shape = None) -> np.ndarray:
        """Integers in [low, high)."""
        return self._gen.integers(low, high, size=size)

    def random(self) -> float:
        return float(self._gen.random())

    def next_seed(self) -> int:
        """Draw a fresh 64-bit seed from this stream."""
        return int(self._gen.integers(0, MAX_SEED, dtype=np.uint64, endpoint=True))


def seeded_normal(rng: SeededRng, shape: Shape) -> torch.Tensor:
    """i.i.d. N(0, 1) entries from the deterministic stream of `rng`."""
    return rng.normal(shape)


def _as_tuple(shape: Shape) -> tuple:
    if isinstance(shape, int):
        return (shape,)
    return tuple(int(s) for s in shape)
