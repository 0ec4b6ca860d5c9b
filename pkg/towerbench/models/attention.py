"""Full self-attention encoder used as the quadratic-cost reference model."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, SequenceTooLongError, ShapeError
from ..nn import Dropout, Embedding, LayerNorm, Linear, Module
from ..tensor import Tensor, ops

MASKED_SCORE = -1e9
INIT_STD = 0.02


@dataclass(frozen=True)
class AttentionConfig:
    vocab_size: int
    layers: int = 2
    model_dim: int = 64
    heads: int = 2
    ff_dim: int = 128
    max_len: int = 4096
    dropout: float = 0.1

    def __post_init__(self) -> None:
        errors = []
        for name in ("vocab_size", "model_dim", "heads", "ff_dim", "max_len"):
            if getattr(self, name) < 1:
                errors.append(f"{name}: must be positive, got {getattr(self, name)}")
        if self.layers < 0:
            errors.append(f"layers: must be non-negative, got {self.layers}")
        if self.heads >= 1 and self.model_dim % self.heads:
            errors.append(f"model_dim: {self.model_dim} is not divisible by heads={self.heads}")
        if not 0.0 <= self.dropout < 1.0:
            errors.append(f"dropout: must be in [0, 1), got {self.dropout}")
        if errors:
            raise ConfigError(errors)


class MultiHeadSelfAttention(Module):
    """Bidirectional scaled dot-product attention over ``[T, D]`` or ``[B, T, D]``."""

    def __init__(self, dim: int, heads: int, max_len: int, rng: np.random.Generator):
        self.heads = heads
        self.max_len = max_len
        self.query = Linear(dim, dim, rng, std=INIT_STD)
        self.key = Linear(dim, dim, rng, std=INIT_STD)
        self.value = Linear(dim, dim, rng, std=INIT_STD)
        self.out = Linear(dim, dim, rng, std=INIT_STD)

    def _split(self, x: Tensor) -> Tensor:
        b, t, d = x.shape
        return x.reshape(b, t, self.heads, d // self.heads).transpose(0, 2, 1, 3)

    def forward(self, x: Tensor, mask: np.ndarray | None = None, return_weights: bool = False):
        """``mask`` (``[B, T]``) marks real tokens; padded keys get no weight.

        With ``return_weights`` the result is ``(output, weights)`` where
        ``weights`` is ``[B, H, T, T]`` (``[H, T, T]`` unbatched).
        """
        batched = x.ndim == 3
        if not batched:
            x = x.reshape(1, *x.shape)
        b, t, d = x.shape
        if t > self.max_len:
            raise SequenceTooLongError(f"sequence length {t} exceeds the positional table ({self.max_len})")
        q, k, v = self._split(self.query(x)), self._split(self.key(x)), self._split(self.value(x))
        scores = (q @ k.transpose(0, 1, 3, 2)) * (1.0 / math.sqrt(d // self.heads))
        if mask is not None:
            keep = np.asarray(mask, dtype=bool).reshape(b, 1, 1, t)
            scores = scores + np.where(keep, 0.0, MASKED_SCORE).astype(scores.dtype)
        weights = ops.softmax(scores, axis=-1)
        context = (weights @ v).transpose(0, 2, 1, 3).reshape(b, t, d)
        y = self.out(context)
        if not batched:
            y = y.reshape(t, d)
        if return_weights:
            return y, (weights if batched else weights.reshape(*weights.shape[1:]))
        return y


class FeedForward(Module):
    def __init__(self, dim: int, hidden: int, rng: np.random.Generator):
        self.inner = Linear(dim, hidden, rng, std=INIT_STD)
        self.outer = Linear(hidden, dim, rng, std=INIT_STD)

    def forward(self, x: Tensor) -> Tensor:
        return self.outer(self.inner(x).relu())


class EncoderLayer(Module):
    """Pre-norm residual layer: ``x + attn(norm(x))`` then ``x + ffn(norm(x))``."""

    def __init__(self, cfg: AttentionConfig, rng: np.random.Generator):
        self.attn_norm = LayerNorm(cfg.model_dim)
        self.attn = MultiHeadSelfAttention(cfg.model_dim, cfg.heads, cfg.max_len, rng)
        self.ffn_norm = LayerNorm(cfg.model_dim)
        self.ffn = FeedForward(cfg.model_dim, cfg.ff_dim, rng)
        self.drop = Dropout(cfg.dropout, rng)

    def forward(self, x: Tensor, mask: np.ndarray | None = None) -> Tensor:
        x = x + self.drop(self.attn(self.attn_norm(x), mask))
        return x + self.drop(self.ffn(self.ffn_norm(x)))


class AttentionEncoder(Module):
    """Token ids to channel-major features ``[D, T]`` / ``[B, D, T]``."""

    def __init__(self, cfg: AttentionConfig, rng: np.random.Generator):
        self.cfg = cfg
        self.embedding = Embedding(cfg.vocab_size, cfg.model_dim, rng, std=INIT_STD)
        self.positions = Embedding(cfg.max_len, cfg.model_dim, rng, std=INIT_STD)
        self.layers = [EncoderLayer(cfg, rng) for _ in range(cfg.layers)]
        self.final_norm = LayerNorm(cfg.model_dim)

    @property
    def output_channels(self) -> int:
        return self.cfg.model_dim

    def forward(self, ids, mask: np.ndarray | None = None) -> Tensor:
        ids = np.asarray(ids)
        batched = ids.ndim == 2
        if not batched:
            ids = ids[None]
            mask = None if mask is None else np.asarray(mask)[None]
        t = ids.shape[-1]
        if t == 0:
            raise ShapeError("cannot encode an empty sequence")
        if t > self.cfg.max_len:
            raise SequenceTooLongError(
                f"sequence length {t} exceeds the model's maximum length {self.cfg.max_len}"
            )
        tokens = self.embedding(ids).transpose(0, 2, 1)
        where = self.positions(np.arange(t)).transpose(1, 0)
        x = tokens + where
        for layer in self.layers:
            x = layer(x, mask)
        y = self.final_norm(x).transpose(0, 2, 1)
        return y if batched else y.reshape(*y.shape[1:])
