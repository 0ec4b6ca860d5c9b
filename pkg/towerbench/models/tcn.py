"""Dual-tower temporal convolutional encoder.

Two stacks of residual dilated-convolution blocks read the same embedded
sequence. With cross-feed enabled, the channel-concatenated outputs of both
towers at layer ``l`` are the input of both towers at layer ``l + 1``; the
final representation concatenates the last layer of each tower.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

from ..errors import ConfigError, ShapeError
from ..nn import Conv1d, Dropout, Embedding, Module
from ..tensor import Tensor, ops

PaddingMode = Literal["causal", "bidirectional"]
PADDING_MODES = ("causal", "bidirectional")


# ── Configuration ────────────────────────────────────────────


@dataclass(frozen=True)
class TemporalBlockConfig:
    kernel_size: int
    dilation: int
    in_channels: int
    out_channels: int
    padding_mode: PaddingMode = "bidirectional"
    dropout: float = 0.1

    def __post_init__(self) -> None:
        errors = []
        for name in ("kernel_size", "dilation", "in_channels", "out_channels"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                errors.append(f"{name}: must be a positive integer, got {value!r}")
        if self.padding_mode not in PADDING_MODES:
            errors.append(f"padding_mode: must be one of {PADDING_MODES}, got {self.padding_mode!r}")
        if not 0.0 <= self.dropout < 1.0:
            errors.append(f"dropout: must be in [0, 1), got {self.dropout}")
        if errors:
            raise ConfigError(errors)


@dataclass(frozen=True)
class TowerConfig:
    layers: tuple[TemporalBlockConfig, ...]
    role: Literal["short_range", "long_range"] = "long_range"

    @property
    def kernel_size(self) -> int:
        return self.layers[0].kernel_size


@dataclass(frozen=True)
class DualTowerConfig:
    embedding_dim: int
    vocab_size: int
    towers: tuple[TowerConfig, ...]
    cross_feed: bool = True

    def __post_init__(self) -> None:
        errors = []
        if self.embedding_dim < 1:
            errors.append(f"embedding_dim: must be positive, got {self.embedding_dim}")
        if self.vocab_size < 1:
            errors.append(f"vocab_size: must be positive, got {self.vocab_size}")
        if len(self.towers) not in (1, 2):
            errors.append(f"towers: expected 1 or 2 towers, got {len(self.towers)}")
        elif any(not tower.layers for tower in self.towers):
            errors.append("towers: every tower needs at least one layer")
        elif len({len(tower.layers) for tower in self.towers}) != 1:
            errors.append("towers: both towers must have the same number of layers")
        else:
            errors.extend(self._channel_errors())
        if errors:
            raise ConfigError(errors)

    def _channel_errors(self) -> Iterable[str]:
        for l in range(self.num_layers):
            for i, tower in enumerate(self.towers):
                expected = self.layer_input_channels(l, i)
                got = tower.layers[l].in_channels
                if got != expected:
                    yield f"towers.{i}.layers.{l}.in_channels: expected {expected}, got {got}"

    @property
    def num_layers(self) -> int:
        return len(self.towers[0].layers)

    @property
    def is_cross_fed(self) -> bool:
        return self.cross_feed and len(self.towers) == 2

    def layer_input_channels(self, layer: int, tower: int) -> int:
        if layer == 0:
            return self.embedding_dim
        if self.is_cross_fed:
            return sum(t.layers[layer - 1].out_channels for t in self.towers)
        return self.towers[tower].layers[layer - 1].out_channels

    @property
    def output_channels(self) -> int:
        return sum(tower.layers[-1].out_channels for tower in self.towers)


def build_dual_tower_config(
    vocab_size: int,
    embedding_dim: int,
    kernel_sizes: Sequence[int],
    filters: Sequence[int],
    dilations: Sequence[int] | None = None,
    padding_mode: PaddingMode = "bidirectional",
    dropout: float = 0.1,
    cross_feed: bool = True,
) -> DualTowerConfig:
    """One tower per kernel size; every tower shares ``filters`` and ``dilations``.

    Dilations default to ``1, 2, 4, ...``. Input widths are derived from the
    wiring, so callers only pick kernels and filters.
    """
    if not filters:
        raise ConfigError(["filters: at least one layer is required"])
    if dilations is None:
        dilations = [2 ** l for l in range(len(filters))]
    if len(dilations) != len(filters):
        raise ConfigError([f"dilations: expected {len(filters)} values, got {len(dilations)}"])
    kernel_sizes = list(kernel_sizes)
    n = len(kernel_sizes)
    fed = cross_feed and n == 2
    towers = []
    for i, k in enumerate(kernel_sizes):
        layers = []
        for l, (width, d) in enumerate(zip(filters, dilations)):
            if l == 0:
                c_in = embedding_dim
            else:
                c_in = filters[l - 1] * n if fed else filters[l - 1]
            layers.append(TemporalBlockConfig(k, d, c_in, width, padding_mode, dropout))
        role = "short_range" if n == 2 and k < max(kernel_sizes) else "long_range"
        towers.append(TowerConfig(tuple(layers), role))
    return DualTowerConfig(embedding_dim, vocab_size, tuple(towers), cross_feed)


# ── Geometry ─────────────────────────────────────────────────


def pad_amounts(k: int, d: int, mode: PaddingMode) -> tuple[int, int]:
    """Zero padding ``(left, right)`` that keeps the sequence length."""
    total = (k - 1) * d
    if mode == "causal":
        return total, 0
    if mode == "bidirectional":
        return math.ceil(total / 2), total // 2
    raise ValueError(f"unknown padding mode {mode!r}")


def block_receptive_growth(block: TemporalBlockConfig) -> int:
    return 2 * (block.kernel_size - 1) * block.dilation


def tower_receptive_field(tower: TowerConfig) -> int:
    """Receptive field of one tower on its own."""
    return 1 + sum(block_receptive_growth(b) for b in tower.layers)


@dataclass(frozen=True)
class ReceptiveField:
    table: list[tuple[int, ...]]  # [layer][tower]
    merged: list[int]
    final: int


def receptive_field(cfg: DualTowerConfig) -> ReceptiveField:
    """Per-layer, per-tower receptive fields and the merged figure after each layer.

    Each block adds ``2 (k - 1) d``. With cross-feed both towers start layer
    ``l + 1`` from the larger of their layer-``l`` fields.
    """
    incoming = [1] * len(cfg.towers)
    table, merged = [], []
    for l in range(cfg.num_layers):
        row = tuple(
            incoming[i] + block_receptive_growth(tower.layers[l])
            for i, tower in enumerate(cfg.towers)
        )
        table.append(row)
        merged.append(max(row))
        incoming = [max(row)] * len(row) if cfg.is_cross_fed else list(row)
    return ReceptiveField(table, merged, merged[-1])


def receptive_reach(cfg: DualTowerConfig) -> tuple[int, int]:
    """Exact number of tokens to the left and right that can reach one output column."""
    incoming = [(0, 0)] * len(cfg.towers)
    for l in range(cfg.num_layers):
        row = []
        for i, tower in enumerate(cfg.towers):
            block = tower.layers[l]
            left, right = pad_amounts(block.kernel_size, block.dilation, block.padding_mode)
            row.append((incoming[i][0] + 2 * left, incoming[i][1] + 2 * right))
        if cfg.is_cross_fed:
            widest = (max(r[0] for r in row), max(r[1] for r in row))
            incoming = [widest] * len(row)
        else:
            incoming = row
    return max(r[0] for r in incoming), max(r[1] for r in incoming)


def count_parameters(cfg: DualTowerConfig) -> int:
    """Trainable scalars, computed from the config alone."""
    total = cfg.vocab_size * cfg.embedding_dim
    for tower in cfg.towers:
        for b in tower.layers:
            total += b.out_channels * b.in_channels * b.kernel_size + b.out_channels
            total += b.out_channels * b.out_channels * b.kernel_size + b.out_channels
            if b.in_channels != b.out_channels:
                total += b.out_channels * b.in_channels + b.out_channels
    return total


# ── Modules ──────────────────────────────────────────────────


def apply_mask(x: Tensor, mask: np.ndarray | None) -> Tensor:
    """Zero the time steps where ``mask`` is False (``[T]`` or ``[B, T]``)."""
    if mask is None:
        return x
    keep = np.asarray(mask, dtype=x.dtype)[..., None, :]
    return ops.mul(x, keep)


class TemporalBlock(Module):
    """Two dilated conv -> ReLU -> dropout sublayers plus a residual skip."""

    def __init__(self, cfg: TemporalBlockConfig, rng: np.random.Generator):
        self.cfg = cfg
        k, d = cfg.kernel_size, cfg.dilation
        self.conv1 = Conv1d(cfg.in_channels, cfg.out_channels, k, rng, dilation=d)
        self.conv2 = Conv1d(cfg.out_channels, cfg.out_channels, k, rng, dilation=d)
        self.skip = (
            Conv1d(cfg.in_channels, cfg.out_channels, 1, rng)
            if cfg.in_channels != cfg.out_channels else None
        )
        self.drop = Dropout(cfg.dropout, rng)
        self.pad = pad_amounts(k, d, cfg.padding_mode)

    def forward(self, x: Tensor, mask: np.ndarray | None = None) -> Tensor:
        if x.shape[-2] != self.cfg.in_channels:
            raise ShapeError(f"block expects {self.cfg.in_channels} channels, got input shape {x.shape}")
        x = apply_mask(x, mask)
        h = self.drop(self.conv1(x, self.pad).relu())
        h = self.drop(self.conv2(apply_mask(h, mask), self.pad).relu())
        residual = x if self.skip is None else self.skip(x)
        return apply_mask(h + residual, mask)


class Tower(Module):
    def __init__(self, cfg: TowerConfig, rng: np.random.Generator):
        self.cfg = cfg
        self.blocks = [TemporalBlock(b, rng) for b in cfg.layers]


@dataclass
class LayerOutputs:
    """Every block output of one forward pass, indexed ``[layer][tower]``."""

    layers: list[list[Tensor]] = field(default_factory=list)

    def __getitem__(self, key: tuple[int, int]) -> Tensor:
        layer, tower = key
        return self.layers[layer][tower]


class DualTowerEncoder(Module):
    """Token ids ``[T]`` or ``[B, T]`` to features ``[C, T]`` or ``[B, C, T]``.

    The embedding table is shared by both towers.
    """

    def __init__(self, cfg: DualTowerConfig, rng: np.random.Generator):
        self.cfg = cfg
        self.embedding = Embedding(cfg.vocab_size, cfg.embedding_dim, rng)
        self.towers = [Tower(t, rng) for t in cfg.towers]

    @property
    def output_channels(self) -> int:
        return self.cfg.output_channels

    def encode_layers(
        self,
        ids,
        mask: np.ndarray | None = None,
        ablate: Iterable[tuple[int, int]] = (),
    ) -> LayerOutputs:
        """Run the stack and keep every ``(layer, tower)`` output.

        ``ablate`` lists ``(tower, layer)`` pairs whose outputs are replaced by
        zeros before they are fed forward.
        """
        ids = np.asarray(ids)
        if ids.shape[-1] == 0:
            raise ShapeError("cannot encode an empty sequence")
        ablate = set(ablate)
        x = apply_mask(self.embedding(ids), mask)
        inputs = [x] * len(self.towers)
        outputs = LayerOutputs()
        for l in range(self.cfg.num_layers):
            row = []
            for i, tower in enumerate(self.towers):
                h = tower.blocks[l](inputs[i], mask)
                if (i, l) in ablate:
                    h = ops.mul(h, 0.0)
                row.append(h)
            outputs.layers.append(row)
            if self.cfg.is_cross_fed:
                joined = ops.concat(row, axis=-2)
                inputs = [joined] * len(row)
            else:
                inputs = row
        return outputs

    def forward(self, ids, mask: np.ndarray | None = None) -> Tensor:
        last = self.encode_layers(ids, mask).layers[-1]
        return last[0] if len(last) == 1 else ops.concat(last, axis=-2)
