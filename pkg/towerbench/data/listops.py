"""Nested prefix-notation list operations over digits.

``[MAX 1 9 0]`` evaluates to 9, ``[SM 4 7 2]`` to 3 (sum modulo 10). ``MED``
of an even number of arguments takes the lower median.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InfeasibleSpecError, ListOpsParseError
from ..utils import derived_rng

OPERATORS = ("MIN", "MAX", "MED", "SM")
NUM_CLASSES = 10
MAX_ATTEMPTS = 200


def apply_operator(op: str, args: list[int]) -> int:
    if op == "MIN":
        return min(args)
    if op == "MAX":
        return max(args)
    if op == "MED":
        return sorted(args)[(len(args) - 1) // 2]
    if op == "SM":
        return sum(args) % 10
    raise ValueError(f"unknown operator {op!r}")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _skip_spaces(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] == " ":
            self.pos += 1

    def _peek(self) -> str:
        self._skip_spaces()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def value(self) -> int:
        ch = self._peek()
        if ch == "":
            raise ListOpsParseError("unexpected end of input", self.pos)
        if ch.isdigit():
            self.pos += 1
            if self.pos < len(self.text) and self.text[self.pos].isdigit():
                raise ListOpsParseError("arguments must be single digits", self.pos)
            return int(ch)
        if ch == "[":
            return self.expression()
        raise ListOpsParseError(f"unexpected character {ch!r}", self.pos)

    def expression(self) -> int:
        self.pos += 1  # "["
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isalpha():
            self.pos += 1
        op = self.text[start:self.pos]
        if op not in OPERATORS:
            raise ListOpsParseError(f"unknown operator {op!r}", start)
        args = []
        while True:
            ch = self._peek()
            if ch == "]":
                self.pos += 1
                break
            if ch == "":
                raise ListOpsParseError("unexpected end of input", self.pos)
            args.append(self.value())
        if not args:
            raise ListOpsParseError(f"{op} needs at least one argument", self.pos - 1)
        return apply_operator(op, args)


def eval_listops(expression: str) -> int:
    """Evaluate one expression; malformed input raises ``ListOpsParseError``."""
    parser = _Parser(expression)
    result = parser.value()
    if parser._peek() != "":
        raise ListOpsParseError("trailing input after expression", parser.pos)
    return result


@dataclass(frozen=True)
class ListOpsExample:
    id: str
    expression: str
    label: int

    @property
    def tokens(self) -> tuple[int, ...]:
        return tuple(self.expression.encode("utf-8"))


def _random_expression(rng: np.random.Generator, depth: int, max_depth: int, max_args: int,
                       nest_prob: float) -> str:
    op = OPERATORS[int(rng.integers(len(OPERATORS)))]
    n_args = int(rng.integers(2, max_args + 1))
    parts = []
    for _ in range(n_args):
        if depth < max_depth and rng.random() < nest_prob:
            parts.append(_random_expression(rng, depth + 1, max_depth, max_args, nest_prob))
        else:
            parts.append(str(int(rng.integers(10))))
    return f"[{op} {' '.join(parts)}]"


def gen_listops(
    seed: int,
    n: int,
    max_depth: int = 2,
    max_args: int = 5,
    max_len: int = 2000,
    nest_prob: float = 0.3,
) -> list[ListOpsExample]:
    """``n`` random expressions with their answers, each at most ``max_len`` characters."""
    if max_args < 2 or max_depth < 1:
        raise InfeasibleSpecError(f"need max_args >= 2 and max_depth >= 1, got {max_args}, {max_depth}")
    shortest = len("[MIN 0 0]")
    if max_len < shortest:
        raise InfeasibleSpecError(f"max_len={max_len} is below the shortest expression ({shortest})")
    examples = []
    for i in range(n):
        for attempt in range(MAX_ATTEMPTS):
            rng = derived_rng(seed, i, attempt)
            text = _random_expression(rng, 1, max_depth, max_args, nest_prob)
            if len(text) <= max_len:
                break
        else:
            raise InfeasibleSpecError(f"no expression within max_len={max_len} after {MAX_ATTEMPTS} attempts")
        examples.append(ListOpsExample(f"listops-{seed}-{i:06d}", text, eval_listops(text)))
    return examples
