"""Exception hierarchy shared by every towerbench module."""


class TowerbenchError(Exception):
    """Base class for all errors raised by towerbench."""


class ShapeError(TowerbenchError, ValueError):
    """Tensor shapes or layouts do not match what an operation requires."""


class VocabularyError(TowerbenchError, IndexError):
    """A token id falls outside the embedding table."""


class SpanError(TowerbenchError, ValueError):
    """An utterance span is empty, out of bounds, unsorted or overlapping."""


class NonFiniteError(TowerbenchError, ArithmeticError):
    """A NaN or infinity reached a place that cannot accept one."""


class TargetError(TowerbenchError, ValueError):
    """A classification target is out of range or not binary."""


class TapeError(TowerbenchError, RuntimeError):
    """Reverse-mode differentiation was requested on an unusable tape."""


class CheckpointError(TowerbenchError, ValueError):
    """A checkpoint file is malformed or does not match the model."""


class SequenceTooLongError(TowerbenchError, ValueError):
    """Input is longer than a fixed-length model accepts."""


class InfeasibleSpecError(TowerbenchError, ValueError):
    """A generator spec cannot be satisfied (e.g. plants exceed the length budget)."""


class MetricError(TowerbenchError, ValueError):
    """A metric was asked to score an empty or inconsistent evaluation set."""


class DatasetFormatError(TowerbenchError, ValueError):
    """A JSON-lines corpus contains a malformed record."""

    def __init__(self, path: str, line: int, reason: str):
        self.path = path
        self.line = line
        self.reason = reason
        super().__init__(f"{path}:{line}: {reason}")


class ListOpsParseError(TowerbenchError, ValueError):
    """A ListOps expression is malformed."""

    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} at position {position}")


class ConfigError(TowerbenchError, ValueError):
    """Run configuration is invalid. ``errors`` holds one ``path: message`` per problem."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class TrainingDivergedError(TowerbenchError, RuntimeError):
    """The training loss became non-finite."""

    def __init__(self, step: int, loss: float):
        self.step = step
        self.loss = loss
        super().__init__(f"non-finite loss {loss!r} at step {step}")
