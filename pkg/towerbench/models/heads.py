"""Conversation, utterance and pair classification heads and the joint objective."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from ..errors import ShapeError
from ..nn import Linear, Module
from ..tensor import Tensor, ops


class UtteranceSpan(NamedTuple):
    """Token range ``[start, end)`` of one utterance, speaker token included."""

    start: int
    end: int
    utterance_index: int


@dataclass
class MtlTargets:
    conversation_label: int
    utterance_labels: np.ndarray  # [n_utterances, K_utt], 0/1


class ConversationHead(Module):
    """Global max-pooling over time, then one affine layer."""

    def __init__(self, channels: int, num_labels: int, rng: np.random.Generator):
        self.proj = Linear(channels, num_labels, rng)

    def forward(self, features: Tensor, mask: np.ndarray | None = None) -> Tensor:
        return self.proj(ops.pool_max(features, mask=mask))


class UtteranceHead(Module):
    """Max-pooling inside each utterance span, then a shared affine layer."""

    def __init__(self, channels: int, num_labels: int, rng: np.random.Generator):
        self.proj = Linear(channels, num_labels, rng)

    def forward(self, features: Tensor, spans: Sequence[UtteranceSpan]) -> Tensor:
        return self.proj(ops.pool_spans(features, spans))


class PairHead(Module):
    """Classify a document pair from ``[a, b, |a - b|, a * b]``."""

    def __init__(self, channels: int, rng: np.random.Generator, num_labels: int = 2):
        self.proj = Linear(4 * channels, num_labels, rng)

    def forward(self, a: Tensor, b: Tensor) -> Tensor:
        if a.shape != b.shape:
            raise ShapeError(f"pooled documents differ in shape: {a.shape} vs {b.shape}")
        return self.proj(ops.concat([a, b, (a - b).abs(), a * b], axis=-1))


def conversation_logits(features: Tensor, head: ConversationHead, mask: np.ndarray | None = None) -> Tensor:
    return head(features, mask)


def utterance_logits(features: Tensor, spans: Sequence[UtteranceSpan], head: UtteranceHead) -> Tensor:
    return head(features, spans)


class MtlLoss(NamedTuple):
    total: Tensor
    conversation: Tensor | None
    utterance: Tensor | None


def mtl_loss(
    conv_logits: Tensor | None,
    conv_target,
    utt_logits: Tensor | None,
    utt_targets,
    utt_weight: float = 1.0,
) -> MtlLoss:
    """Cross entropy on the conversation label plus ``utt_weight`` times the
    mean binary cross entropy over utterance labels.

    A missing head (``None`` logits) or a zero weight drops that term; the
    returned parts are the unweighted components.
    """
    conv = None if conv_logits is None else ops.softmax_cross_entropy(conv_logits, conv_target)
    utt = None
    if utt_logits is not None and (utt_weight != 0.0 or conv is None):
        utt = ops.sigmoid_bce(utt_logits, utt_targets)
    if conv is None and utt is None:
        raise ShapeError("mtl_loss needs at least one head's logits")
    if conv is None:
        total = utt
    elif utt is None:
        total = conv
    else:
        total = conv + utt * utt_weight
    return MtlLoss(total, conv, utt)
