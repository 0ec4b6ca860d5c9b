"""Random draws shared by the generators."""

from __future__ import annotations

import math

import numpy as np

from ..utils import stable_hash

SPLITS = ("train", "valid", "test")


def lognormal_lengths(
    rng: np.random.Generator,
    mean: float,
    sd: float,
    size: int | None = None,
    low: int = 1,
    high: int | None = None,
):
    """Integer lengths from a log-normal with the given mean and sd, clipped to ``[low, high]``."""
    if mean <= 0 or sd < 0:
        raise ValueError(f"length distribution needs mean > 0 and sd >= 0, got ({mean}, {sd})")
    sigma2 = math.log1p((sd / mean) ** 2)
    mu = math.log(mean) - sigma2 / 2
    draws = np.rint(rng.lognormal(mu, math.sqrt(sigma2), size=size)).astype(np.int64)
    clipped = np.clip(draws, low, high if high is not None else np.iinfo(np.int64).max)
    return int(clipped) if size is None else clipped


def zipf_weights(n: int, exponent: float) -> np.ndarray:
    """Probabilities proportional to ``1 / rank**exponent``; exponent 0 is uniform."""
    ranks = np.arange(1, n + 1, dtype=np.float64)
    weights = ranks ** -exponent
    return weights / weights.sum()


def split_of(example_id: str) -> str:
    """80/10/10 train/valid/test assignment by a stable hash of the id."""
    bucket = stable_hash(example_id) % 10
    if bucket < 8:
        return "train"
    return "valid" if bucket == 8 else "test"
