"""Parameter containers for the encoders and heads."""

from __future__ import annotations

from typing import Iterator

import numpy as np

from .errors import CheckpointError, ShapeError
from .tensor import Tensor, get_dtype, ops


def _param(array: np.ndarray) -> Tensor:
    return Tensor(array, requires_grad=True, dtype=get_dtype())


class Module:
    """Walks its attributes for parameters, sub-modules and lists of sub-modules."""

    training: bool = True

    def _children(self) -> Iterator[tuple[str, object]]:
        for name, value in vars(self).items():
            if isinstance(value, (Tensor, Module)):
                yield name, value
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, (Tensor, Module)):
                        yield f"{name}.{i}", item

    def named_parameters(self, prefix: str = "") -> dict[str, Tensor]:
        params: dict[str, Tensor] = {}
        for name, value in self._children():
            full = f"{prefix}{name}"
            if isinstance(value, Tensor):
                if value.requires_grad:
                    params[full] = value
            else:
                params.update(value.named_parameters(f"{full}."))
        return params

    def parameters(self) -> list[Tensor]:
        return list(self.named_parameters().values())

    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def train(self, mode: bool = True) -> Module:
        self.training = mode
        for _, value in self._children():
            if isinstance(value, Module):
                value.train(mode)
        return self

    def eval(self) -> Module:
        return self.train(False)

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: p.data for name, p in self.named_parameters().items()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        params = self.named_parameters()
        missing = sorted(set(params) - set(state))
        unexpected = sorted(set(state) - set(params))
        if missing or unexpected:
            raise CheckpointError(f"parameter names differ: missing={missing} unexpected={unexpected}")
        for name, p in params.items():
            if state[name].shape != p.shape:
                raise CheckpointError(f"{name}: checkpoint shape {state[name].shape} != model shape {p.shape}")
            p.data = np.asarray(state[name], dtype=p.dtype)

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)


class Linear(Module):
    def __init__(self, d_in: int, d_out: int, rng: np.random.Generator, std: float = 0.01):
        self.weight = _param(rng.normal(0.0, std, size=(d_out, d_in)))
        self.bias = _param(np.zeros(d_out))

    def forward(self, x: Tensor) -> Tensor:
        return ops.linear(x, self.weight, self.bias)


class Conv1d(Module):
    """Weights ~ Normal(0, std), zero bias."""

    def __init__(self, c_in: int, c_out: int, kernel_size: int, rng: np.random.Generator,
                 dilation: int = 1, std: float = 0.01):
        self.weight = _param(rng.normal(0.0, std, size=(c_out, c_in, kernel_size)))
        self.bias = _param(np.zeros(c_out))
        self.dilation = dilation

    def forward(self, x: Tensor, pad: tuple[int, int] = (0, 0)) -> Tensor:
        return ops.conv1d(x, self.weight, self.bias, self.dilation, pad)


class Embedding(Module):
    def __init__(self, vocab_size: int, width: int, rng: np.random.Generator, std: float = 0.02):
        self.table = _param(rng.normal(0.0, std, size=(vocab_size, width)))

    def load(self, path: str) -> None:
        """Replace the table with a ``[V, E]`` array stored in a ``.npy`` file."""
        table = np.load(path)
        if table.shape != self.table.shape:
            raise ShapeError(f"embedding file {path} has shape {table.shape}, expected {self.table.shape}")
        self.table.data = table

    def forward(self, ids) -> Tensor:
        return ops.embed(self.table, ids)


class LayerNorm(Module):
    def __init__(self, width: int, eps: float = 1e-5):
        self.gamma = _param(np.ones(width))
        self.beta = _param(np.zeros(width))
        self.eps = eps

    def forward(self, x: Tensor) -> Tensor:
        return ops.layer_norm(x, self.gamma, self.beta, self.eps)


class Dropout(Module):
    def __init__(self, p: float, rng: np.random.Generator):
        if not 0.0 <= p < 1.0:
            raise ValueError(f"dropout probability must be in [0, 1), got {p}")
        self.p = p
        self.rng = rng

    def forward(self, x: Tensor) -> Tensor:
        return ops.dropout(x, self.p, self.rng, self.training)
