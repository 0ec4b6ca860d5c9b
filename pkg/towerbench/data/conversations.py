"""Synthetic customer-service conversations with planted labels.

Every conversation carries exactly one issue label, planted as a keyword
trigram somewhere in the dialogue, and every utterance carries zero or more
action labels, each planted as its own trigram inside that utterance.
Pattern tokens come from a reserved slice at the top of the vocabulary and
are always surrounded by background tokens, so the oracle that scans for
them recovers every label exactly.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ..errors import InfeasibleSpecError
from ..utils import atomic_write_text, derived_rng
from .sampling import SPLITS, lognormal_lengths, split_of, zipf_weights

log = logging.getLogger(__name__)

SPEAKERS = ("agent", "customer")
PATTERN_LENGTH = 3
MAX_ATTEMPTS = 50

_PATTERN_STREAM = 0
_CONVERSATION_STREAM = 1


@dataclass(frozen=True)
class Utterance:
    speaker: str
    tokens: tuple[int, ...]
    labels: tuple[int, ...] = ()


@dataclass(frozen=True)
class Conversation:
    id: str
    utterances: tuple[Utterance, ...]
    conv_label: int

    @property
    def num_tokens(self) -> int:
        """Length once encoded: every utterance gains one speaker token."""
        return sum(len(u.tokens) + 1 for u in self.utterances)


@dataclass(frozen=True)
class GeneratorSpec:
    seed: int = 0
    n_conversations: int = 2000
    num_conv_labels: int = 10
    num_utt_labels: int = 30
    vocab_size: int = 256
    mean_length: float = 252.0
    sd_length: float = 92.0
    max_length: int = 4096
    mean_utterance_length: float = 15.0
    pattern_vocab: int = 32
    utterance_label_rate: float = 0.3
    max_labels_per_utterance: int = 2
    label_skew: float = 0.0

    def check(self) -> None:
        background = self.vocab_size - self.pattern_vocab
        if self.n_conversations < 0:
            raise InfeasibleSpecError("n_conversations must be non-negative")
        if self.num_conv_labels < 1 or self.num_utt_labels < 0:
            raise InfeasibleSpecError("label spaces must have at least one conversation label")
        if background < 1 or self.pattern_vocab < 2:
            raise InfeasibleSpecError(
                f"vocabulary of {self.vocab_size} cannot hold {self.pattern_vocab} pattern tokens "
                "and at least one background token"
            )
        if self.pattern_vocab ** PATTERN_LENGTH < self.num_conv_labels + self.num_utt_labels:
            raise InfeasibleSpecError(
                f"{self.pattern_vocab} pattern tokens cannot form "
                f"{self.num_conv_labels + self.num_utt_labels} distinct patterns"
            )
        if PATTERN_LENGTH + 1 > self.max_length:
            raise InfeasibleSpecError(
                f"a planted pattern ({PATTERN_LENGTH} tokens plus a speaker token) does not fit "
                f"in max_length={self.max_length}"
            )
        if not 0.0 <= self.utterance_label_rate <= 1.0:
            raise InfeasibleSpecError("utterance_label_rate must be a probability")


@dataclass
class PlantedOracle:
    """The exact labelling rule behind a generated corpus."""

    conv_patterns: list[tuple[int, ...]]
    utt_patterns: list[tuple[int, ...]]
    _index: dict[tuple[int, ...], tuple[str, int]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._index = {}
        for label, pattern in enumerate(self.conv_patterns):
            self._index[tuple(pattern)] = ("conv", label)
        for label, pattern in enumerate(self.utt_patterns):
            self._index[tuple(pattern)] = ("utt", label)

    def _scan(self, tokens: Sequence[int]) -> Iterable[tuple[str, int]]:
        for i in range(len(tokens) - PATTERN_LENGTH + 1):
            hit = self._index.get(tuple(tokens[i:i + PATTERN_LENGTH]))
            if hit is not None:
                yield hit

    def utterance_labels(self, tokens: Sequence[int]) -> tuple[int, ...]:
        return tuple(sorted({label for kind, label in self._scan(tokens) if kind == "utt"}))

    def conversation_label(self, utterances: Sequence[Sequence[int]]) -> int | None:
        for tokens in utterances:
            for kind, label in self._scan(tokens):
                if kind == "conv":
                    return label
        return None

    def label(self, conversation: Conversation) -> Conversation:
        """Relabel ``conversation`` from its tokens alone."""
        utterances = tuple(
            Utterance(u.speaker, u.tokens, self.utterance_labels(u.tokens))
            for u in conversation.utterances
        )
        conv_label = self.conversation_label([u.tokens for u in conversation.utterances])
        return Conversation(conversation.id, utterances, -1 if conv_label is None else conv_label)

    def to_dict(self) -> dict:
        return {
            "pattern_length": PATTERN_LENGTH,
            "conv_patterns": [list(p) for p in self.conv_patterns],
            "utt_patterns": [list(p) for p in self.utt_patterns],
        }

    @classmethod
    def from_dict(cls, data: dict) -> PlantedOracle:
        return cls(
            [tuple(p) for p in data["conv_patterns"]],
            [tuple(p) for p in data["utt_patterns"]],
        )

    def save(self, path: str) -> None:
        atomic_write_text(path, json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str) -> PlantedOracle:
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


@dataclass
class ConversationCorpus:
    spec: GeneratorSpec
    conversations: list[Conversation]
    oracle: PlantedOracle

    def splits(self) -> dict[str, list[Conversation]]:
        out: dict[str, list[Conversation]] = {name: [] for name in SPLITS}
        for conv in self.conversations:
            out[split_of(conv.id)].append(conv)
        return out


def _draw_patterns(spec: GeneratorSpec) -> PlantedOracle:
    rng = derived_rng(spec.seed, _PATTERN_STREAM)
    first = spec.vocab_size - spec.pattern_vocab
    needed = spec.num_conv_labels + spec.num_utt_labels
    seen: set[tuple[int, ...]] = set()
    patterns: list[tuple[int, ...]] = []
    while len(patterns) < needed:
        candidate = tuple(int(t) for t in rng.integers(first, spec.vocab_size, PATTERN_LENGTH))
        if candidate not in seen:
            seen.add(candidate)
            patterns.append(candidate)
    return PlantedOracle(patterns[:spec.num_conv_labels], patterns[spec.num_conv_labels:])


def _fill(rng: np.random.Generator, length: int, plants: list[tuple[int, ...]], background: int) -> tuple[int, ...]:
    """Background tokens of ``length`` with ``plants`` inserted, one background token between plants."""
    planted = sum(len(p) for p in plants)
    gaps = max(len(plants) - 1, 0)
    length = max(length, planted + gaps)
    chunks = np.full(len(plants) + 1, 0, dtype=np.int64)
    if plants:
        chunks[1:-1] = 1
    spare = length - planted - gaps
    if spare:
        chunks += rng.multinomial(spare, np.full(len(chunks), 1.0 / len(chunks)))
    out: list[int] = []
    for i, chunk in enumerate(chunks):
        out.extend(int(t) for t in rng.integers(0, background, chunk))
        if i < len(plants):
            out.extend(plants[i])
    return tuple(out)


def _one_conversation(spec: GeneratorSpec, oracle: PlantedOracle, index: int, attempt: int) -> Conversation:
    rng = derived_rng(spec.seed, _CONVERSATION_STREAM, index, attempt)
    background = spec.vocab_size - spec.pattern_vocab
    conv_weights = zipf_weights(spec.num_conv_labels, spec.label_skew)
    utt_weights = zipf_weights(spec.num_utt_labels, spec.label_skew) if spec.num_utt_labels else None

    total = lognormal_lengths(rng, spec.mean_length, spec.sd_length, low=PATTERN_LENGTH + 1, high=spec.max_length)
    n_utt = max(1, int(round(total / (spec.mean_utterance_length + 1))))
    budget = max(total - n_utt, n_utt)
    lengths = 1 + rng.multinomial(budget - n_utt, np.full(n_utt, 1.0 / n_utt))

    conv_label = int(rng.choice(spec.num_conv_labels, p=conv_weights))
    conv_at = int(rng.integers(n_utt))
    first_speaker = int(rng.integers(2))

    utterances = []
    for u in range(n_utt):
        labels: tuple[int, ...] = ()
        if utt_weights is not None and rng.random() < spec.utterance_label_rate:
            count = int(rng.integers(1, min(spec.max_labels_per_utterance, spec.num_utt_labels) + 1))
            labels = tuple(sorted(int(x) for x in rng.choice(spec.num_utt_labels, count, replace=False, p=utt_weights)))
        plants = [oracle.utt_patterns[label] for label in labels]
        if u == conv_at:
            plants.insert(int(rng.integers(len(plants) + 1)), oracle.conv_patterns[conv_label])
        tokens = _fill(rng, int(lengths[u]), plants, background)
        utterances.append(Utterance(SPEAKERS[(first_speaker + u) % 2], tokens, labels))
    return Conversation(f"conv-{spec.seed}-{index:06d}", tuple(utterances), conv_label)


def gen_conversations(spec: GeneratorSpec) -> ConversationCorpus:
    """Deterministic corpus for ``spec``; conversations over ``max_length`` are redrawn."""
    spec.check()
    oracle = _draw_patterns(spec)
    conversations = []
    for index in range(spec.n_conversations):
        for attempt in range(MAX_ATTEMPTS):
            conv = _one_conversation(spec, oracle, index, attempt)
            if conv.num_tokens <= spec.max_length:
                break
            log.debug("conversation %d attempt %d has %d tokens; redrawing", index, attempt, conv.num_tokens)
        else:
            raise InfeasibleSpecError(
                f"could not draw conversation {index} within max_length={spec.max_length} "
                f"after {MAX_ATTEMPTS} attempts"
            )
        conversations.append(conv)
    return ConversationCorpus(spec, conversations, oracle)


def spec_dict(spec: GeneratorSpec) -> dict:
    return asdict(spec)
