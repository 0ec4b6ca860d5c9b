"""Padding, masks and utterance spans for model input."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import SequenceTooLongError, ShapeError, TargetError
from ..models.heads import MtlTargets, UtteranceSpan
from .conversations import SPEAKERS, Conversation, Utterance

BYTE_VOCAB = 256
BYTE_PAD = 256


@dataclass(frozen=True)
class SpecialTokens:
    """Speaker and pad ids appended after a word vocabulary of ``base`` ids."""

    base: int

    @property
    def speakers(self) -> dict[str, int]:
        return {name: self.base + i for i, name in enumerate(SPEAKERS)}

    @property
    def pad(self) -> int:
        return self.base + len(SPEAKERS)

    @property
    def model_vocab_size(self) -> int:
        return self.pad + 1


@dataclass
class TaskBatch:
    ids: np.ndarray  # [B, T] int64
    mask: np.ndarray  # [B, T] bool
    spans: list[list[UtteranceSpan]]
    targets: list[MtlTargets]
    conversation_ids: list[str]

    def __len__(self) -> int:
        return self.ids.shape[0]

    @property
    def conv_labels(self) -> np.ndarray:
        return np.array([t.conversation_label for t in self.targets], dtype=np.int64)

    @property
    def utt_labels(self) -> np.ndarray:
        return np.concatenate([t.utterance_labels for t in self.targets], axis=0)


def encode_batch(
    conversations: Sequence[Conversation],
    tokens: SpecialTokens,
    num_utt_labels: int,
    max_length: int | None = None,
    num_conv_labels: int | None = None,
) -> TaskBatch:
    """Prefix every utterance with its speaker token and pad to the longest conversation.

    Labels outside the head sizes raise ``TargetError`` naming the conversation.
    """
    if not conversations:
        raise ShapeError("cannot encode an empty batch")
    width = max(c.num_tokens for c in conversations)
    if max_length is not None and width > max_length:
        raise SequenceTooLongError(f"conversation of {width} tokens exceeds max_length={max_length}")
    ids = np.full((len(conversations), width), tokens.pad, dtype=np.int64)
    mask = np.zeros((len(conversations), width), dtype=bool)
    spans, targets = [], []
    for b, conv in enumerate(conversations):
        pos = 0
        conv_spans = []
        if num_conv_labels is not None and not 0 <= conv.conv_label < num_conv_labels:
            raise TargetError(f"{conv.id}: conv_label {conv.conv_label} outside [0, {num_conv_labels})")
        labels = np.zeros((len(conv.utterances), num_utt_labels))
        for u, utt in enumerate(conv.utterances):
            end = pos + 1 + len(utt.tokens)
            ids[b, pos] = tokens.speakers[utt.speaker]
            ids[b, pos + 1:end] = utt.tokens
            conv_spans.append(UtteranceSpan(pos, end, u))
            bad = [k for k in utt.labels if not 0 <= k < num_utt_labels]
            if bad:
                raise TargetError(f"{conv.id}: utterance {u} labels {bad} outside [0, {num_utt_labels})")
            labels[u, list(utt.labels)] = 1.0
            pos = end
        mask[b, :pos] = True
        spans.append(conv_spans)
        targets.append(MtlTargets(conv.conv_label, labels))
    return TaskBatch(ids, mask, spans, targets, [c.id for c in conversations])


def decode_batch(batch: TaskBatch, tokens: SpecialTokens) -> list[Conversation]:
    names = {v: k for k, v in tokens.speakers.items()}
    out = []
    for b, conv_id in enumerate(batch.conversation_ids):
        utterances = []
        for span in batch.spans[b]:
            row = batch.ids[b, span.start:span.end]
            labels = np.flatnonzero(batch.targets[b].utterance_labels[span.utterance_index])
            utterances.append(Utterance(
                names[int(row[0])],
                tuple(int(t) for t in row[1:]),
                tuple(int(i) for i in labels),
            ))
        out.append(Conversation(conv_id, tuple(utterances), batch.targets[b].conversation_label))
    return out


@dataclass
class SequenceBatch:
    ids: np.ndarray
    mask: np.ndarray
    labels: np.ndarray

    def __len__(self) -> int:
        return self.ids.shape[0]


def _pad(sequences: Sequence[Sequence[int]], pad_id: int, max_length: int | None) -> tuple[np.ndarray, np.ndarray]:
    if not sequences:
        raise ShapeError("cannot encode an empty batch")
    if any(len(s) == 0 for s in sequences):
        raise ShapeError("cannot encode an empty sequence")
    width = max(len(s) for s in sequences)
    if max_length is not None and width > max_length:
        raise SequenceTooLongError(f"sequence of {width} tokens exceeds max_length={max_length}")
    ids = np.full((len(sequences), width), pad_id, dtype=np.int64)
    mask = np.zeros((len(sequences), width), dtype=bool)
    for i, seq in enumerate(sequences):
        ids[i, :len(seq)] = seq
        mask[i, :len(seq)] = True
    return ids, mask


def encode_sequences(
    sequences: Sequence[Sequence[int]],
    labels: Sequence[int],
    pad_id: int = BYTE_PAD,
    max_length: int | None = None,
) -> SequenceBatch:
    ids, mask = _pad(sequences, pad_id, max_length)
    return SequenceBatch(ids, mask, np.asarray(labels, dtype=np.int64))


@dataclass
class PairBatch:
    first: SequenceBatch
    second: SequenceBatch

    @property
    def labels(self) -> np.ndarray:
        return self.first.labels

    def __len__(self) -> int:
        return len(self.first)


def encode_pairs(
    firsts: Sequence[Sequence[int]],
    seconds: Sequence[Sequence[int]],
    labels: Sequence[int],
    pad_id: int = BYTE_PAD,
    max_length: int | None = None,
) -> PairBatch:
    return PairBatch(
        encode_sequences(firsts, labels, pad_id, max_length),
        encode_sequences(seconds, labels, pad_id, max_length),
    )
