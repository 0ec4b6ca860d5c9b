"""Dense tensors, the define-by-run tape and reverse-mode differentiation.

A ``Tensor`` wraps a numpy buffer. Operations in ``towerbench.tensor.ops``
record a node on the active ``Tape`` whenever one of their inputs requires a
gradient; with no tape active they run in inference mode and their outputs
carry no gradient state, which makes frozen models safe to share between
threads.
"""

from __future__ import annotations

import contextlib
import threading
import weakref
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from ..errors import ShapeError, TapeError

# ── Precision ────────────────────────────────────────────────

_DTYPES = {"f32": np.float32, "f64": np.float64}
_precision = "f32"


def set_precision(name: str) -> None:
    """Switch the global scalar type for newly created tensors."""
    global _precision
    if name not in _DTYPES:
        raise ValueError(f"unknown precision {name!r}; expected one of {sorted(_DTYPES)}")
    _precision = name


def get_precision() -> str:
    return _precision


def get_dtype() -> type[np.floating]:
    return _DTYPES[_precision]


@contextlib.contextmanager
def precision(name: str) -> Iterator[None]:
    previous = _precision
    set_precision(name)
    try:
        yield
    finally:
        set_precision(previous)


# ── Allocation accounting ────────────────────────────────────


class MemoryTracker:
    """Counts live tensor bytes and remembers the high-water mark."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self.live_bytes = 0
        self.peak_bytes = 0

    def allocate(self, nbytes: int) -> None:
        with self._lock:
            self.live_bytes += nbytes
            if self.live_bytes > self.peak_bytes:
                self.peak_bytes = self.live_bytes

    def release(self, nbytes: int) -> None:
        with self._lock:
            self.live_bytes -= nbytes


_tracker: MemoryTracker | None = None


@contextlib.contextmanager
def tracking_memory() -> Iterator[MemoryTracker]:
    """Install a fresh tracker for buffers allocated inside the block."""
    global _tracker
    previous = _tracker
    tracker = MemoryTracker()
    _tracker = tracker
    try:
        yield tracker
    finally:
        _tracker = previous


class _Buffer:
    """A numpy array registered with the tracker active at allocation time."""

    __slots__ = ("array", "__weakref__")

    def __init__(self, array: np.ndarray):
        self.array = array
        tracker = _tracker
        if tracker is not None:
            tracker.allocate(array.nbytes)
            weakref.finalize(self, tracker.release, array.nbytes)


# ── Tensor ───────────────────────────────────────────────────


class Tensor:
    """Ranked dense array with an optional gradient buffer."""

    def __init__(self, data, requires_grad: bool = False, name: str = "", dtype=None):
        array = np.asarray(data, dtype=dtype or get_dtype())
        self._data = _Buffer(array)
        self._grad: _Buffer | None = None
        self.requires_grad = requires_grad
        self.name = name

    # data / grad

    @property
    def data(self) -> np.ndarray:
        return self._data.array

    @data.setter
    def data(self, value: np.ndarray) -> None:
        value = np.asarray(value, dtype=self.data.dtype)
        if value.shape != self.data.shape:
            raise ShapeError(f"cannot assign shape {value.shape} to tensor of shape {self.data.shape}")
        self._data = _Buffer(value)

    @property
    def grad(self) -> np.ndarray | None:
        return None if self._grad is None else self._grad.array

    @grad.setter
    def grad(self, value: np.ndarray | None) -> None:
        self._grad = None if value is None else _Buffer(np.asarray(value, dtype=self.data.dtype))

    def accumulate_grad(self, value: np.ndarray) -> None:
        if self._grad is None:
            self._grad = _Buffer(np.array(value, dtype=self.data.dtype, copy=True))
        else:
            self._grad.array += value

    def zero_grad(self) -> None:
        self._grad = None

    # shape helpers

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a single element, tensor has shape {self.shape}")
        return float(self.data.reshape(()))

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> Tensor:
        return Tensor(self.data, dtype=self.dtype)

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype.name}{flag})"

    def __len__(self) -> int:
        return self.shape[0]

    # operator sugar; implementations live in ops.py

    def __add__(self, other):
        from . import ops
        return ops.add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from . import ops
        return ops.sub(self, other)

    def __rsub__(self, other):
        from . import ops
        return ops.sub(other, self)

    def __mul__(self, other):
        from . import ops
        return ops.mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other: float):
        from . import ops
        return ops.mul(self, 1.0 / other)

    def __neg__(self):
        from . import ops
        return ops.mul(self, -1.0)

    def __matmul__(self, other):
        from . import ops
        return ops.matmul(self, other)

    def __getitem__(self, index):
        from . import ops
        return ops.index(self, index)

    def sum(self, axis=None):
        from . import ops
        return ops.sum(self, axis)

    def mean(self, axis=None):
        from . import ops
        return ops.mean(self, axis)

    def reshape(self, *shape):
        from . import ops
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return ops.reshape(self, shape)

    def transpose(self, *axes):
        from . import ops
        return ops.transpose(self, axes or None)

    def relu(self):
        from . import ops
        return ops.relu(self)

    def abs(self):
        from . import ops
        return ops.abs(self)


def as_tensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


# ── Tape ─────────────────────────────────────────────────────

BackwardFn = Callable[[np.ndarray], Sequence[np.ndarray | None]]


@dataclass
class Node:
    """One recorded operation: inputs, output and the rule mapping dL/dout to dL/dinputs."""

    inputs: tuple[Tensor, ...]
    output: Tensor
    backward: BackwardFn


_local = threading.local()


def _stack() -> list[Tape]:
    if not hasattr(_local, "tapes"):
        _local.tapes = []
    return _local.tapes


def active_tape() -> Tape | None:
    stack = _stack()
    return stack[-1] if stack else None


class Tape:
    """Ordered record of operations, rebuilt for every training step.

    Nodes are appended as operations execute, so the list is already in
    topological order and backward walks it once in reverse.
    """

    def __init__(self) -> None:
        self.nodes: list[Node] = []
        self._outputs: set[int] = set()
        self.released = False

    def __enter__(self) -> Tape:
        if self.released:
            raise TapeError("cannot record on a released tape")
        _stack().append(self)
        return self

    def __exit__(self, *exc) -> None:
        _stack().pop()

    def record(self, inputs: Sequence[Tensor], output: Tensor, backward: BackwardFn) -> None:
        self.nodes.append(Node(tuple(inputs), output, backward))
        self._outputs.add(id(output))

    def release(self) -> None:
        """Drop every recorded activation."""
        self.nodes.clear()
        self._outputs.clear()
        self.released = True

    def backward(self, loss: Tensor) -> None:
        """Populate ``grad`` on every tensor that requires one.

        Gradients accumulate across calls until ``zero_grad`` is used.
        """
        if self.released:
            raise TapeError("tape was released before backward; its activations are gone")
        if loss.size != 1:
            raise ShapeError(f"backward needs a scalar loss, got shape {loss.shape}")
        if id(loss) not in self._outputs and not loss.requires_grad:
            raise TapeError("loss was not produced under this tape")

        grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
        seen: dict[int, Tensor] = {id(loss): loss}
        for node in reversed(self.nodes):
            upstream = grads.get(id(node.output))
            if upstream is None:
                continue
            input_grads = node.backward(upstream)
            for tensor, grad in zip(node.inputs, input_grads):
                if grad is None or not tensor.requires_grad:
                    continue
                key = id(tensor)
                if key in grads:
                    grads[key] = grads[key] + grad
                else:
                    grads[key] = grad
                    seen[key] = tensor
        for key, tensor in seen.items():
            if tensor.requires_grad:
                tensor.accumulate_grad(grads[key])


def backward(tape: Tape, loss: Tensor) -> None:
    tape.backward(loss)


def record(inputs: Sequence[Tensor], output: Tensor, backward_fn: BackwardFn) -> Tensor:
    """Attach ``backward_fn`` to ``output`` if any input needs a gradient."""
    tape = active_tape()
    if tape is not None and any(t.requires_grad for t in inputs):
        output.requires_grad = True
        tape.record(inputs, output, backward_fn)
    return output
