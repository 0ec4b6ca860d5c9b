"""Byte-level text classification and byte-level document matching."""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..utils import derived_rng
from .sampling import lognormal_lengths

BACKGROUND = np.frombuffer((string.ascii_lowercase + " ").encode("ascii"), dtype=np.uint8)
SIGNATURE_ALPHABET = np.frombuffer(string.ascii_uppercase.encode("ascii"), dtype=np.uint8)
DEFAULT_MOTIFS = (b"Q7#", b"Z9%")
MAX_ATTEMPTS = 100


@dataclass(frozen=True)
class TextExample:
    id: str
    tokens: tuple[int, ...]
    label: int


def contains_motif(data: bytes, motifs: Sequence[bytes]) -> bool:
    return any(m in data for m in motifs)


def gen_text_bytes(
    seed: int,
    n: int,
    motifs: Sequence[bytes] = DEFAULT_MOTIFS,
    mean_length: float = 1296.0,
    sd_length: float = 893.0,
    max_length: int = 4096,
) -> list[TextExample]:
    """Lowercase byte noise; label 1 iff one of ``motifs`` occurs.

    Positives get one motif at a random offset. Background that happens to
    contain a motif is redrawn, so the substring scan is an exact oracle.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    motifs = [bytes(m) for m in motifs if m]
    min_length = max((len(m) for m in motifs), default=1)
    examples = []
    for i in range(n):
        rng = derived_rng(seed, i)
        label = int(bool(motifs) and rng.random() < 0.5)
        length = lognormal_lengths(rng, mean_length, sd_length, low=min_length, high=max_length)
        for _ in range(MAX_ATTEMPTS):
            data = BACKGROUND[rng.integers(0, len(BACKGROUND), length)].tobytes()
            if not contains_motif(data, motifs):
                break
        else:
            raise ValueError("could not draw motif-free background; motifs are too common")
        if label:
            motif = motifs[int(rng.integers(len(motifs)))]
            at = int(rng.integers(0, length - len(motif) + 1))
            data = data[:at] + motif + data[at + len(motif):]
        examples.append(TextExample(f"text-{seed}-{i:06d}", tuple(data), label))
    return examples


@dataclass(frozen=True)
class RetrievalPair:
    id: str
    doc_a: tuple[int, ...]
    doc_b: tuple[int, ...]
    match: int


def signature_of(doc: Sequence[int]) -> frozenset[int]:
    """Uppercase bytes present in a document: its topic signature."""
    data = np.asarray(doc, dtype=np.uint8)
    return frozenset(int(b) for b in np.unique(data[np.isin(data, SIGNATURE_ALPHABET)]))


def _signature(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.choice(SIGNATURE_ALPHABET, size=size, replace=False)


def _document(rng: np.random.Generator, length: int, signature: np.ndarray) -> tuple[int, ...]:
    """Spread the signature over the first and last quarters of the document."""
    doc = BACKGROUND[rng.integers(0, len(BACKGROUND), length)].copy()
    quarter = max(length // 4, 1)
    head = (len(signature) + 1) // 2
    early = rng.choice(quarter, size=head, replace=False)
    late = length - 1 - rng.choice(quarter, size=len(signature) - head, replace=False)
    doc[np.concatenate([early, late])] = rng.permutation(signature)
    return tuple(int(b) for b in doc)


def gen_retrieval(seed: int, n: int, doc_len: int = 1024, signature_size: int = 6) -> list[RetrievalPair]:
    """Document pairs that match iff they share a topic signature; labels alternate."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if signature_size < 2 or signature_size > len(SIGNATURE_ALPHABET):
        raise ValueError(f"signature_size must be in [2, {len(SIGNATURE_ALPHABET)}]")
    if doc_len // 4 < (signature_size + 1) // 2:
        raise ValueError(f"doc_len={doc_len} is too short to spread {signature_size} signature bytes")
    pairs = []
    for i in range(n):
        rng = derived_rng(seed, i)
        match = int(i % 2 == 0)
        sig_a = _signature(rng, signature_size)
        sig_b = sig_a
        while not match and set(sig_b.tolist()) == set(sig_a.tolist()):
            sig_b = _signature(rng, signature_size)
        pairs.append(RetrievalPair(
            f"retrieval-{seed}-{i:06d}",
            _document(rng, doc_len, sig_a),
            _document(rng, doc_len, sig_b),
            match,
        ))
    return pairs
