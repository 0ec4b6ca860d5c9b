"""Minimal dense-tensor engine with reverse-mode automatic differentiation."""

from .tensor import (
    MemoryTracker,
    Tape,
    Tensor,
    active_tape,
    as_tensor,
    backward,
    get_dtype,
    get_precision,
    precision,
    set_precision,
    tracking_memory,
)
from . import ops

__all__ = [
    "MemoryTracker",
    "Tape",
    "Tensor",
    "active_tape",
    "as_tensor",
    "backward",
    "get_dtype",
    "get_precision",
    "ops",
    "precision",
    "set_precision",
    "tracking_memory",
]
