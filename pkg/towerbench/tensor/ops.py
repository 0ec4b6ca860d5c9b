"""Differentiable primitives over ``Tensor``.

Every function computes its forward result with numpy and registers a
backward rule through ``record``. Sequence operations take the channel-major
layout ``[C, T]`` or a batched ``[B, C, T]``.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import NonFiniteError, ShapeError, SpanError, TargetError, VocabularyError
from .tensor import Tensor, record


def _wrap(array: np.ndarray) -> Tensor:
    return Tensor(array, dtype=array.dtype)


def _lift(value, like: Tensor) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(np.asarray(value, dtype=like.dtype), dtype=like.dtype)


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` after numpy broadcasting."""
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


# ── Elementwise ──────────────────────────────────────────────


def add(a, b) -> Tensor:
    a = a if isinstance(a, Tensor) else _lift(a, b)
    b = _lift(b, a)
    out = _wrap(a.data + b.data)
    return record(
        (a, b), out,
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)),
    )


def sub(a, b) -> Tensor:
    a = a if isinstance(a, Tensor) else _lift(a, b)
    b = _lift(b, a)
    out = _wrap(a.data - b.data)
    return record(
        (a, b), out,
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)),
    )


def mul(a, b) -> Tensor:
    a = a if isinstance(a, Tensor) else _lift(a, b)
    b = _lift(b, a)
    out = _wrap(a.data * b.data)
    return record(
        (a, b), out,
        lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)),
    )


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    out = _wrap(np.where(mask, x.data, 0).astype(x.dtype))
    return record((x,), out, lambda g: (g * mask,))


def abs(x: Tensor) -> Tensor:  # noqa: A001
    sign = np.sign(x.data)
    out = _wrap(np.abs(x.data))
    return record((x,), out, lambda g: (g * sign,))


def dropout(x: Tensor, p: float, rng: np.random.Generator, training: bool = True) -> Tensor:
    """Inverted dropout: survivors are scaled by 1/(1-p); identity at eval time."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout probability must be in [0, 1), got {p}")
    if not training or p == 0.0:
        return x
    keep = (rng.random(x.shape) >= p).astype(x.dtype) / x.dtype.type(1.0 - p)
    out = _wrap(x.data * keep)
    return record((x,), out, lambda g: (g * keep,))


# ── Reductions and layout ────────────────────────────────────


def sum(x: Tensor, axis=None) -> Tensor:  # noqa: A001
    out = _wrap(np.asarray(x.data.sum(axis=axis), dtype=x.dtype))

    def _backward(g):
        if axis is not None:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.shape).copy(),)

    return record((x,), out, _backward)


def mean(x: Tensor, axis=None) -> Tensor:
    count = x.size if axis is None else np.prod([x.shape[a] for a in np.atleast_1d(axis)])
    return mul(sum(x, axis), 1.0 / count)


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    out = _wrap(x.data.reshape(shape))
    return record((x,), out, lambda g: (g.reshape(x.shape),))


def transpose(x: Tensor, axes: Sequence[int] | None = None) -> Tensor:
    axes = tuple(reversed(range(x.ndim))) if axes is None else tuple(axes)
    inverse = tuple(np.argsort(axes))
    out = _wrap(np.ascontiguousarray(x.data.transpose(axes)))
    return record((x,), out, lambda g: (g.transpose(inverse),))


def index(x: Tensor, key) -> Tensor:
    out = _wrap(np.array(x.data[key], copy=True))

    def _backward(g):
        full = np.zeros_like(x.data)
        np.add.at(full, key, g)
        return (full,)

    return record((x,), out, _backward)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = tuple(tensors)
    if not tensors:
        raise ShapeError("concat needs at least one tensor")
    out = _wrap(np.concatenate([t.data for t in tensors], axis=axis))
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]
    return record(tensors, out, lambda g: tuple(np.split(g, bounds, axis=axis)))


# ── Linear algebra ───────────────────────────────────────────


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeError(f"matmul needs rank >= 2 operands, got {a.shape} and {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul inner dimensions differ: {a.shape} @ {b.shape}")
    out = _wrap(np.matmul(a.data, b.data))

    def _backward(g):
        ga = np.matmul(g, np.swapaxes(b.data, -1, -2))
        gb = np.matmul(np.swapaxes(a.data, -1, -2), g)
        return _unbroadcast(ga, a.shape), _unbroadcast(gb, b.shape)

    return record((a, b), out, _backward)


def linear(x: Tensor, weight: Tensor, bias: Tensor | None = None) -> Tensor:
    """Affine map over the last dimension: ``x @ weight.T + bias``."""
    d_out, d_in = weight.shape
    if x.shape[-1] != d_in:
        raise ShapeError(f"linear expects last dimension {d_in}, got input shape {x.shape}")
    result = x.data @ weight.data.T
    if bias is not None:
        if bias.shape != (d_out,):
            raise ShapeError(f"bias shape {bias.shape} does not match output width {d_out}")
        result = result + bias.data
    out = _wrap(result)
    inputs = (x, weight) if bias is None else (x, weight, bias)

    def _backward(g):
        flat_g = g.reshape(-1, d_out)
        grads = [g @ weight.data, flat_g.T @ x.data.reshape(-1, d_in)]
        if bias is not None:
            grads.append(flat_g.sum(axis=0))
        return grads

    return record(inputs, out, _backward)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    probs = e / e.sum(axis=axis, keepdims=True)
    out = _wrap(probs)

    def _backward(g):
        return (probs * (g - (g * probs).sum(axis=axis, keepdims=True)),)

    return record((x,), out, _backward)


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalise over the last dimension, then scale and shift."""
    n = x.shape[-1]
    mu = x.data.mean(axis=-1, keepdims=True)
    centred = x.data - mu
    inv_std = 1.0 / np.sqrt((centred ** 2).mean(axis=-1, keepdims=True) + eps)
    xhat = centred * inv_std
    out = _wrap((xhat * gamma.data + beta.data).astype(x.dtype))

    def _backward(g):
        dxhat = g * gamma.data
        dx = inv_std / n * (
            n * dxhat
            - dxhat.sum(axis=-1, keepdims=True)
            - xhat * (dxhat * xhat).sum(axis=-1, keepdims=True)
        )
        lead = tuple(range(g.ndim - 1))
        return dx, (g * xhat).sum(axis=lead), g.sum(axis=lead)

    return record((x, gamma, beta), out, _backward)


# ── Sequence primitives ──────────────────────────────────────


def conv1d(
    x: Tensor,
    weight: Tensor,
    bias: Tensor | None = None,
    dilation: int = 1,
    pad: tuple[int, int] = (0, 0),
) -> Tensor:
    """Dilated 1-D convolution with explicit zero padding.

    ``y[c, t] = bias[c] + sum_{i,j} x[i, t - left + j*dilation] * W[c, i, j]``
    """
    if dilation < 1:
        raise ShapeError(f"dilation must be >= 1, got {dilation}")
    left, right = pad
    if left < 0 or right < 0:
        raise ShapeError(f"padding must be non-negative, got {pad}")
    if weight.ndim != 3:
        raise ShapeError(f"conv weight must be [C_out, C_in, k], got {weight.shape}")
    batched = x.ndim == 3
    if x.ndim not in (2, 3):
        raise ShapeError(f"conv input must be [C, T] or [B, C, T], got {x.shape}")
    xd = x.data if batched else x.data[None]
    _, channels, steps = xd.shape
    c_out, c_in, k = weight.shape
    if channels != c_in:
        raise ShapeError(f"input has {channels} channels but weight expects {c_in}")
    t_out = steps + left + right - (k - 1) * dilation
    if t_out < 1:
        raise ShapeError(
            f"sequence of length {steps} with padding {pad} is shorter than the "
            f"kernel span {(k - 1) * dilation + 1}"
        )

    xp = np.pad(xd, ((0, 0), (0, 0), (left, right))) if left or right else xd
    w = weight.data
    result = np.zeros((xd.shape[0], c_out, t_out), dtype=x.dtype)
    for j in range(k):
        off = j * dilation
        result += np.matmul(w[:, :, j], xp[:, :, off:off + t_out])
    if bias is not None:
        result += bias.data[None, :, None]
    out = _wrap(result if batched else result[0])
    inputs = (x, weight) if bias is None else (x, weight, bias)

    def _backward(g):
        g3 = g if batched else g[None]
        gw = np.zeros_like(w)
        gx = np.zeros_like(xp) if x.requires_grad else None
        for j in range(k):
            off = j * dilation
            gw[:, :, j] = np.tensordot(g3, xp[:, :, off:off + t_out], axes=([0, 2], [0, 2]))
            if gx is not None:
                gx[:, :, off:off + t_out] += np.matmul(w[:, :, j].T, g3)
        if gx is not None:
            gx = gx[:, :, left:left + steps]
            gx = gx if batched else gx[0]
        grads = [gx, gw]
        if bias is not None:
            grads.append(g3.sum(axis=(0, 2)))
        return grads

    return record(inputs, out, _backward)


def embed(table: Tensor, ids) -> Tensor:
    """Look up rows of ``table``; returns ``[E, T]`` (or ``[B, E, T]`` for 2-D ids)."""
    ids = np.asarray(ids, dtype=np.int64)
    vocab, width = table.shape
    if ids.size and (ids.min() < 0 or ids.max() >= vocab):
        bad = ids[(ids < 0) | (ids >= vocab)].ravel()[0]
        raise VocabularyError(f"token id {int(bad)} is outside the vocabulary of size {vocab}")
    rows = table.data[ids]
    out = _wrap(np.ascontiguousarray(np.moveaxis(rows, -1, -2)))

    def _backward(g):
        grad = np.zeros_like(table.data)
        np.add.at(grad, ids.reshape(-1), np.moveaxis(g, -2, -1).reshape(-1, width))
        return (grad,)

    return record((table,), out, _backward)


def pool_max(x: Tensor, span: tuple[int, int] | None = None, mask=None) -> Tensor:
    """Per-channel maximum over time.

    With ``span`` (unbatched input only) the maximum covers ``[start, end)``.
    With ``mask`` (``[T]`` or ``[B, T]``), ``False`` positions are ignored.
    The gradient goes to the first argmax of every channel.
    """
    steps = x.shape[-1]
    if span is not None:
        if x.ndim != 2:
            raise ShapeError("span pooling takes an unbatched [C, T] input")
        start, end = span
        if start == end:
            raise SpanError(f"empty span ({start}, {end})")
        if not 0 <= start < end <= steps:
            raise SpanError(f"span ({start}, {end}) is outside [0, {steps})")
        rows = np.arange(x.shape[0])
        arg = x.data[:, start:end].argmax(axis=1) + start
        out = _wrap(x.data[rows, arg])

        def _span_backward(g):
            grad = np.zeros_like(x.data)
            grad[rows, arg] = g
            return (grad,)

        return record((x,), out, _span_backward)

    if steps == 0:
        raise ShapeError("cannot pool an empty sequence")
    data = x.data
    if mask is not None:
        keep = np.asarray(mask, dtype=bool)
        if keep.shape[-1] != steps:
            raise ShapeError(f"mask length {keep.shape[-1]} does not match sequence length {steps}")
        if not keep.any(axis=-1).all():
            raise ShapeError("every sequence needs at least one unmasked position")
        data = np.where(keep[..., None, :], data, -np.inf)
    arg = data.argmax(axis=-1)[..., None]
    out = _wrap(np.take_along_axis(x.data, arg, axis=-1)[..., 0])

    def _backward(g):
        grad = np.zeros_like(x.data)
        np.put_along_axis(grad, arg, g[..., None], axis=-1)
        return (grad,)

    return record((x,), out, _backward)


def pool_spans(x: Tensor, spans: Sequence[tuple[int, int]]) -> Tensor:
    """Max-pool every span of one ``[C, T]`` sequence; returns ``[n_spans, C]``."""
    if x.ndim != 2:
        raise ShapeError("span pooling takes an unbatched [C, T] input")
    steps = x.shape[1]
    previous_end = 0
    args = []
    for span in spans:
        start, end = span[0], span[1]
        if start == end:
            raise SpanError(f"empty span ({start}, {end})")
        if not 0 <= start < end <= steps:
            raise SpanError(f"span ({start}, {end}) is outside [0, {steps})")
        if start < previous_end:
            raise SpanError(f"span ({start}, {end}) overlaps or precedes the previous span")
        previous_end = end
        args.append(x.data[:, start:end].argmax(axis=1) + start)
    if not args:
        raise SpanError("no spans to pool")
    arg = np.stack(args)
    rows = np.arange(x.shape[0])[None, :]
    out = _wrap(x.data[rows, arg])

    def _backward(g):
        grad = np.zeros_like(x.data)
        np.add.at(grad, (np.broadcast_to(rows, arg.shape), arg), g)
        return (grad,)

    return record((x,), out, _backward)


# ── Losses ───────────────────────────────────────────────────


def softmax_cross_entropy(logits: Tensor, target) -> Tensor:
    """``-log softmax(logits)[target]``; batched logits ``[B, K]`` give the mean over B."""
    batched = logits.ndim == 2
    z = logits.data if batched else logits.data[None]
    targets = np.atleast_1d(np.asarray(target, dtype=np.int64))
    rows, classes = z.shape
    if classes < 2:
        raise ShapeError(f"cross entropy needs at least 2 classes, got {classes}")
    if targets.shape != (rows,):
        raise ShapeError(f"expected {rows} targets, got shape {targets.shape}")
    if (targets < 0).any() or (targets >= classes).any():
        raise TargetError(f"target out of range [0, {classes}): {targets.tolist()}")
    if not np.isfinite(z).all():
        raise NonFiniteError("logits contain NaN or infinity")

    shifted = z - z.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    picked = np.arange(rows)
    losses = log_norm - shifted[picked, targets]
    out = _wrap(np.asarray(losses.mean(), dtype=logits.dtype))

    def _backward(g):
        probs = np.exp(shifted - log_norm[:, None])
        probs[picked, targets] -= 1.0
        probs *= g / rows
        return (probs if batched else probs[0],)

    return record((logits,), out, _backward)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def sigmoid_bce(logits: Tensor, targets) -> Tensor:
    """Mean binary cross entropy with logits, in the log-sum-exp stable form."""
    y = np.asarray(targets.data if isinstance(targets, Tensor) else targets, dtype=logits.dtype)
    if y.shape != logits.shape:
        raise ShapeError(f"targets shape {y.shape} does not match logits shape {logits.shape}")
    if not np.isin(y, (0.0, 1.0)).all():
        raise TargetError("multi-label targets must be 0 or 1")
    z = logits.data
    if not np.isfinite(z).all():
        raise NonFiniteError("logits contain NaN or infinity")
    elementwise = np.maximum(z, 0) - z * y + np.log1p(np.exp(-np.abs(z)))
    out = _wrap(np.asarray(elementwise.mean(), dtype=logits.dtype))
    count = z.size

    def _backward(g):
        return ((_sigmoid(z) - y) * (g / count),)

    return record((logits,), out, _backward)
