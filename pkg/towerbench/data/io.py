"""JSON-lines corpora: one example per line, UTF-8, stable field order."""

from __future__ import annotations

import json
import os
from typing import Any, Callable, Iterable, Sequence, TypeVar

from ..errors import DatasetFormatError
from ..utils import atomic_write_text
from .conversations import SPEAKERS, Conversation, Utterance
from .listops import NUM_CLASSES as LISTOPS_CLASSES, ListOpsExample
from .text import RetrievalPair, TextExample

T = TypeVar("T")


def _dumps(record: dict) -> str:
    return json.dumps(record, ensure_ascii=False, separators=(",", ":"))


def write_jsonl(path: str, records: Iterable[dict]) -> None:
    lines = [_dumps(r) + "\n" for r in records]
    atomic_write_text(path, "".join(lines))


def read_jsonl(path: str, parse: Callable[[dict], T]) -> list[T]:
    """Parse every non-blank line; any failure names the file and line."""
    out: list[T] = []
    with open(path, "rb") as f:
        for number, raw in enumerate(f, start=1):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as e:
                raise DatasetFormatError(path, number, f"invalid UTF-8 at byte {e.start}") from None
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise DatasetFormatError(path, number, f"invalid JSON: {e.msg}") from None
            if not isinstance(record, dict):
                raise DatasetFormatError(path, number, "record is not a JSON object")
            try:
                out.append(parse(record))
            except (KeyError, TypeError, ValueError) as e:
                raise DatasetFormatError(path, number, _describe(e)) from None
    return out


def _describe(error: Exception) -> str:
    if isinstance(error, KeyError):
        return f"missing field {error.args[0]!r}"
    return str(error)


def _ints(value: Any, name: str) -> tuple[int, ...]:
    if not isinstance(value, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
        raise ValueError(f"{name} must be a list of integers")
    return tuple(value)


def _label(value: Any, name: str, num_classes: int | None = None) -> int:
    """A class index: a non-negative int (not bool), below ``num_classes`` when that is known."""
    if not isinstance(value, int) or isinstance(value, bool):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    if value < 0 or (num_classes is not None and value >= num_classes):
        bound = f"[0, {num_classes})" if num_classes is not None else ">= 0"
        raise ValueError(f"{name} {value} is out of range, expected {bound}")
    return value


def _labels(value: Any, name: str) -> tuple[int, ...]:
    if not isinstance(value, list):
        raise ValueError(f"{name} must be a list of integers")
    return tuple(_label(v, name) for v in value)


# ── Conversations ────────────────────────────────────────────


def conversation_to_record(conv: Conversation) -> dict:
    return {
        "id": conv.id,
        "conv_label": conv.conv_label,
        "utterances": [
            {"speaker": u.speaker, "tokens": list(u.tokens), "labels": list(u.labels)}
            for u in conv.utterances
        ],
    }


def conversation_from_record(record: dict) -> Conversation:
    utterances = []
    for item in record["utterances"]:
        if item["speaker"] not in SPEAKERS:
            raise ValueError(f"unknown speaker {item['speaker']!r}")
        utterances.append(Utterance(item["speaker"], _ints(item["tokens"], "tokens"), _labels(item["labels"], "labels")))
    if not utterances:
        raise ValueError("conversation has no utterances")
    return Conversation(str(record["id"]), tuple(utterances), _label(record["conv_label"], "conv_label"))


def write_conversations(path: str, conversations: Sequence[Conversation]) -> None:
    write_jsonl(path, (conversation_to_record(c) for c in conversations))


def read_conversations(path: str) -> list[Conversation]:
    return read_jsonl(path, conversation_from_record)


# ── Byte-level tasks ─────────────────────────────────────────


def text_to_record(example: TextExample) -> dict:
    return {"id": example.id, "tokens": list(example.tokens), "label": example.label}


def text_from_record(record: dict) -> TextExample:
    return TextExample(str(record["id"]), _ints(record["tokens"], "tokens"), _label(record["label"], "label", 2))


def listops_to_record(example: ListOpsExample) -> dict:
    return {"id": example.id, "tokens": list(example.tokens), "label": example.label}


def listops_from_record(record: dict) -> ListOpsExample:
    data = bytes(_ints(record["tokens"], "tokens"))
    return ListOpsExample(str(record["id"]), data.decode("utf-8"), _label(record["label"], "label", LISTOPS_CLASSES))


def retrieval_to_record(pair: RetrievalPair) -> dict:
    return {"id": pair.id, "tokens_a": list(pair.doc_a), "tokens_b": list(pair.doc_b), "label": pair.match}


def retrieval_from_record(record: dict) -> RetrievalPair:
    return RetrievalPair(
        str(record["id"]),
        _ints(record["tokens_a"], "tokens_a"),
        _ints(record["tokens_b"], "tokens_b"),
        _label(record["label"], "label", 2),
    )


WRITERS: dict[str, Callable[[Any], dict]] = {
    "conversations": conversation_to_record,
    "text": text_to_record,
    "listops": listops_to_record,
    "retrieval": retrieval_to_record,
}

READERS: dict[str, Callable[[dict], Any]] = {
    "conversations": conversation_from_record,
    "text": text_from_record,
    "listops": listops_from_record,
    "retrieval": retrieval_from_record,
}


def write_split(directory: str, task: str, split: str, examples: Sequence) -> str:
    path = os.path.join(directory, f"{split}.jsonl")
    write_jsonl(path, (WRITERS[task](e) for e in examples))
    return path


def read_split(directory: str, task: str, split: str) -> list:
    return read_jsonl(os.path.join(directory, f"{split}.jsonl"), READERS[task])
