"""
Error types shared by every module.

Anything that fails because of bad input shapes, a corrupt file or a
diverging optimization raises one of these, so the CLI can tell usage
problems (exit 1) from runtime failures (exit 2).
"""

from pathlib import Path
from typing import List, Optional


class OverparamError(Exception):
    """Base class for all errors raised by this package."""


class ShapeMismatchError(OverparamError, ValueError):
    """A tensor, style matrix or latent does not match the generator config."""


class TensorFormatError(OverparamError, ValueError):
    """A tensor file is not in the OPT1 layout (bad magic, truncated payload...)."""


class NonFiniteError(OverparamError, ValueError):
    """A value that must be finite (tensor payload, loss) is NaN or infinite."""


class InversionError(OverparamError, RuntimeError):
    """Inversion aborted; `losses` holds the trace recorded before the failure."""

    def __init__(self, message: str, losses: Optional[List[float]] = None):
        super().__init__(message)
        self.losses = list(losses or [])


class TrainingError(OverparamError, RuntimeError):
    """Training aborted; `checkpoint` points at the last good checkpoint, if any."""

    def __init__(self, message: str, checkpoint: Optional[Path] = None):
        super().__init__(message)
        self.checkpoint = checkpoint
