"""Named encoder configurations."""

from __future__ import annotations

from .tcn import DualTowerConfig, PaddingMode, build_dual_tower_config

DEFAULT_EMBEDDING_DIM = 64

# name -> (kernel sizes, filters per layer, dilations)
TOWER_PRESETS: dict[str, tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]] = {
    "cnn_large": ((11, 15), (128, 256, 512, 1024), (1, 2, 4, 8)),
    "cnn_small": ((5, 11), (48, 96, 192, 384), (1, 2, 4, 8)),
    "lra_text": ((9, 13), (8, 16, 32), (1, 2, 4)),
}

# Single long-range tower for document matching, keyed by kernel size.
RETRIEVAL_PRESETS: dict[int, tuple[tuple[int, ...], tuple[int, ...]]] = {
    17: ((32, 48), (1, 2)),
    21: ((32, 64), (1, 2)),
    65: ((32, 64), (1, 2)),
    129: ((32, 64), (1, 2)),
    257: ((32, 64), (2, 4)),
    513: ((32, 64), (2, 4)),
}


def preset_config(
    name: str,
    vocab_size: int,
    embedding_dim: int = DEFAULT_EMBEDDING_DIM,
    padding_mode: PaddingMode = "bidirectional",
    dropout: float = 0.1,
    cross_feed: bool = True,
) -> DualTowerConfig:
    if name not in TOWER_PRESETS:
        raise KeyError(f"unknown preset {name!r}; expected one of {sorted(TOWER_PRESETS)}")
    kernels, filters, dilations = TOWER_PRESETS[name]
    return build_dual_tower_config(
        vocab_size, embedding_dim, kernels, filters, dilations,
        padding_mode=padding_mode, dropout=dropout, cross_feed=cross_feed,
    )


def retrieval_config(
    kernel_size: int,
    vocab_size: int,
    embedding_dim: int = DEFAULT_EMBEDDING_DIM,
    dropout: float = 0.1,
) -> DualTowerConfig:
    """Single-tower config for one kernel size of the ablation sweep.

    Kernel sizes outside the table use the widest entry at or below them.
    """
    if kernel_size in RETRIEVAL_PRESETS:
        filters, dilations = RETRIEVAL_PRESETS[kernel_size]
    else:
        below = [k for k in RETRIEVAL_PRESETS if k <= kernel_size]
        filters, dilations = RETRIEVAL_PRESETS[max(below) if below else min(RETRIEVAL_PRESETS)]
    return build_dual_tower_config(
        vocab_size, embedding_dim, (kernel_size,), filters, dilations, dropout=dropout,
    )
