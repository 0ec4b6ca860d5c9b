"""Task models on top of a shared encoder, and how each task is batched, trained and scored."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import (
    BYTE_PAD,
    BYTE_VOCAB,
    Conversation,
    PairBatch,
    SequenceBatch,
    SpecialTokens,
    TaskBatch,
    encode_batch,
    encode_pairs,
    encode_sequences,
)
from .data.listops import NUM_CLASSES as LISTOPS_CLASSES
from .metrics import accuracy, macro_f1, predict_labels
from .models.heads import ConversationHead, MtlLoss, PairHead, UtteranceHead, mtl_loss
from .nn import Linear, Module
from .tensor import Tensor, ops

PARADIGMS = ("mtl", "stl_conv", "stl_utt")


# ── Models ───────────────────────────────────────────────────


@dataclass
class ConversationOutputs:
    conv_logits: Tensor | None
    utt_logits: Tensor | None


class ConversationModel(Module):
    """Encoder plus the conversation head, the utterance head, or both."""

    def __init__(self, encoder: Module, num_conv_labels: int, num_utt_labels: int,
                 paradigm: str, rng: np.random.Generator):
        if paradigm not in PARADIGMS:
            raise ValueError(f"unknown paradigm {paradigm!r}")
        self.encoder = encoder
        self.paradigm = paradigm
        channels = encoder.output_channels
        self.conv_head = ConversationHead(channels, num_conv_labels, rng) if paradigm != "stl_utt" else None
        self.utt_head = UtteranceHead(channels, num_utt_labels, rng) if paradigm != "stl_conv" else None

    def forward(self, batch: TaskBatch) -> ConversationOutputs:
        features = self.encoder(batch.ids, batch.mask)
        conv = None if self.conv_head is None else self.conv_head(features, batch.mask)
        utt = None
        if self.utt_head is not None:
            rows = [self.utt_head(features[b], spans) for b, spans in enumerate(batch.spans)]
            utt = rows[0] if len(rows) == 1 else ops.concat(rows, axis=0)
        return ConversationOutputs(conv, utt)


class SequenceClassifier(Module):
    """Global max-pooled encoder features to class logits."""

    def __init__(self, encoder: Module, num_classes: int, rng: np.random.Generator):
        self.encoder = encoder
        self.proj = Linear(encoder.output_channels, num_classes, rng)

    def forward(self, batch: SequenceBatch) -> Tensor:
        features = self.encoder(batch.ids, batch.mask)
        return self.proj(ops.pool_max(features, mask=batch.mask))


class PairClassifier(Module):
    """Both documents go through the same encoder; ``PairHead`` compares the pooled vectors."""

    def __init__(self, encoder: Module, rng: np.random.Generator):
        self.encoder = encoder
        self.head = PairHead(encoder.output_channels, rng)

    def _pooled(self, side: SequenceBatch) -> Tensor:
        return ops.pool_max(self.encoder(side.ids, side.mask), mask=side.mask)

    def forward(self, batch: PairBatch) -> Tensor:
        return self.head(self._pooled(batch.first), self._pooled(batch.second))


# ── Task adapters ────────────────────────────────────────────


class ConversationTask:
    name = "conversations"

    def __init__(self, vocab_size: int, num_conv_labels: int, num_utt_labels: int,
                 paradigm: str = "mtl", utt_weight: float = 1.0, threshold: float = 0.5,
                 max_length: int | None = None):
        self.tokens = SpecialTokens(vocab_size)
        self.num_conv_labels = num_conv_labels
        self.num_utt_labels = num_utt_labels
        self.paradigm = paradigm
        self.utt_weight = utt_weight
        self.threshold = threshold
        self.max_length = max_length

    @property
    def model_vocab_size(self) -> int:
        return self.tokens.model_vocab_size

    def build_model(self, encoder: Module, rng: np.random.Generator) -> ConversationModel:
        return ConversationModel(encoder, self.num_conv_labels, self.num_utt_labels, self.paradigm, rng)

    def make_batch(self, examples: Sequence[Conversation]) -> TaskBatch:
        return encode_batch(examples, self.tokens, self.num_utt_labels, self.max_length, self.num_conv_labels)

    def loss(self, model: ConversationModel, batch: TaskBatch) -> MtlLoss:
        out = model(batch)
        weight = self.utt_weight if self.paradigm == "mtl" else 1.0
        return mtl_loss(out.conv_logits, batch.conv_labels, out.utt_logits, batch.utt_labels, weight)

    def predict(self, model: ConversationModel, batch: TaskBatch) -> tuple[np.ndarray | None, np.ndarray | None]:
        out = model(batch)
        conv = None if out.conv_logits is None else out.conv_logits.data.argmax(axis=-1)
        utt = None if out.utt_logits is None else predict_labels(out.utt_logits.data, self.threshold)
        return conv, utt

    def evaluate(self, model: ConversationModel, examples: Sequence[Conversation], batch_size: int) -> dict[str, float]:
        conv_preds, utt_preds, conv_gold, utt_gold = [], [], [], []
        for start in range(0, len(examples), batch_size):
            batch = self.make_batch(examples[start:start + batch_size])
            conv, utt = self.predict(model, batch)
            if conv is not None:
                conv_preds.extend(conv.tolist())
                conv_gold.extend(batch.conv_labels.tolist())
            if utt is not None:
                utt_preds.append(utt)
                utt_gold.append(batch.utt_labels)
        values = {}
        if conv_preds:
            values["conv"] = macro_f1(conv_preds, conv_gold, self.num_conv_labels)
        if utt_preds:
            values["utt"] = macro_f1(np.concatenate(utt_preds), np.concatenate(utt_gold), self.num_utt_labels)
        return values


class SequenceTask:
    """Text (2 classes) and ListOps (10 classes) over byte tokens."""

    def __init__(self, name: str, num_classes: int, max_length: int | None = None):
        self.name = name
        self.num_classes = num_classes
        self.max_length = max_length

    model_vocab_size = BYTE_VOCAB + 1

    def build_model(self, encoder: Module, rng: np.random.Generator) -> SequenceClassifier:
        return SequenceClassifier(encoder, self.num_classes, rng)

    def make_batch(self, examples) -> SequenceBatch:
        return encode_sequences([e.tokens for e in examples], [e.label for e in examples], BYTE_PAD, self.max_length)

    def loss(self, model: SequenceClassifier, batch: SequenceBatch) -> MtlLoss:
        value = ops.softmax_cross_entropy(model(batch), batch.labels)
        return MtlLoss(value, value, None)

    def evaluate(self, model: SequenceClassifier, examples, batch_size: int) -> dict[str, float]:
        preds, golds = [], []
        for start in range(0, len(examples), batch_size):
            batch = self.make_batch(examples[start:start + batch_size])
            preds.extend(model(batch).data.argmax(axis=-1).tolist())
            golds.extend(batch.labels.tolist())
        return {"acc": accuracy(preds, golds)}


class RetrievalTask(SequenceTask):
    def __init__(self, max_length: int | None = None):
        super().__init__("retrieval", 2, max_length)

    def build_model(self, encoder: Module, rng: np.random.Generator) -> PairClassifier:
        return PairClassifier(encoder, rng)

    def make_batch(self, examples) -> PairBatch:
        return encode_pairs(
            [e.doc_a for e in examples], [e.doc_b for e in examples],
            [e.match for e in examples], BYTE_PAD, self.max_length,
        )


def text_task(max_length: int | None = None) -> SequenceTask:
    return SequenceTask("text", 2, max_length)


def listops_task(max_length: int | None = None) -> SequenceTask:
    return SequenceTask("listops", LISTOPS_CLASSES, max_length)
