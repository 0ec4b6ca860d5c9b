"""Tape semantics, precision switching, allocation accounting, checkpoints and modules."""

import threading

import numpy as np
import pytest

from towerbench.errors import CheckpointError, ShapeError, SpanError, TapeError, TargetError, VocabularyError
from towerbench.nn import Conv1d, Dropout, Embedding, LayerNorm, Linear, Module
from towerbench.tensor import Tape, Tensor, active_tape, get_dtype, ops, precision, tracking_memory
from towerbench.tensor.checkpoint import (
    MAGIC,
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    save_checkpoint,
)


# ── Tape ─────────────────────────────────────────────────────


def test_backward_populates_leaf_grads():
    x = Tensor([1.0, 2.0, 3.0], requires_grad=True)
    with Tape() as tape:
        loss = (x * x).sum()
    tape.backward(loss)
    assert x.grad.tolist() == [2.0, 4.0, 6.0]


def test_no_tape_means_inference_mode():
    x = Tensor([1.0, 2.0], requires_grad=True)
    out = (x * 3.0).sum()
    assert not out.requires_grad
    assert active_tape() is None


def test_tensors_without_grad_are_not_recorded():
    a = Tensor([1.0, 2.0])
    with Tape() as tape:
        (a * 2.0).sum()
    assert tape.nodes == []


def test_released_tape_rejects_backward():
    x = Tensor([1.0], requires_grad=True)
    with Tape() as tape:
        loss = (x * 2.0).sum()
    tape.release()
    with pytest.raises(TapeError):
        tape.backward(loss)


def test_released_tape_cannot_record_again():
    tape = Tape()
    tape.release()
    with pytest.raises(TapeError):
        with tape:
            pass


def test_backward_needs_scalar():
    x = Tensor([1.0, 2.0], requires_grad=True)
    with Tape() as tape:
        out = x * 2.0
    with pytest.raises(ShapeError):
        tape.backward(out)


def test_foreign_loss_is_rejected():
    x = Tensor([1.0], requires_grad=True)
    with Tape():
        loss = (x * 2.0).sum()
    with pytest.raises(TapeError):
        Tape().backward(Tensor(loss.data))


def test_grads_accumulate_until_zeroed():
    x = Tensor([1.0, -1.0], requires_grad=True)
    with Tape() as tape:
        loss = (x * 5.0).sum()
    tape.backward(loss)
    tape.backward(loss)
    assert x.grad.tolist() == [10.0, 10.0]
    x.zero_grad()
    assert x.grad is None


def test_shared_input_gets_summed_gradient():
    x = Tensor([2.0], requires_grad=True)
    with Tape() as tape:
        loss = (x * x + x * 3.0).sum()
    tape.backward(loss)
    assert x.grad.tolist() == [7.0]


def test_tape_is_thread_local():
    seen = []
    with Tape():
        worker = threading.Thread(target=lambda: seen.append(active_tape()))
        worker.start()
        worker.join()
        assert active_tape() is not None
    assert seen == [None]


# ── Precision ────────────────────────────────────────────────


def test_precision_controls_new_tensors():
    with precision("f32"):
        assert Tensor([1.0]).dtype == np.float32
    with precision("f64"):
        assert Tensor([1.0]).dtype == np.float64
        assert get_dtype() is np.float64


def test_precision_rejects_unknown_name():
    with pytest.raises(ValueError):
        with precision("f16"):
            pass


def test_ops_keep_input_dtype():
    with precision("f32"):
        x = Tensor(np.ones((2, 3)))
        w = Tensor(np.ones((4, 2, 1)))
        assert ops.conv1d(x, w).dtype == np.float32
        assert ops.softmax(x).dtype == np.float32


# ── Memory ───────────────────────────────────────────────────


def test_tracker_counts_live_and_peak_bytes():
    with precision("f64"), tracking_memory() as tracker:
        a = Tensor(np.zeros(100))
        b = Tensor(np.zeros(50))
        assert tracker.live_bytes == 1200
        del a
        assert tracker.live_bytes == 400
        assert tracker.peak_bytes == 1200
        del b
    assert tracker.live_bytes == 0


def test_tensors_outside_block_are_not_counted():
    with tracking_memory() as tracker:
        pass
    Tensor(np.zeros(10))
    assert tracker.peak_bytes == 0


# ── Error surfaces ───────────────────────────────────────────


def test_embed_rejects_out_of_vocabulary_ids():
    table = Tensor(np.zeros((4, 2)))
    with pytest.raises(VocabularyError):
        ops.embed(table, [0, 4])


def test_conv1d_rejects_channel_mismatch():
    with pytest.raises(ShapeError):
        ops.conv1d(Tensor(np.zeros((3, 5))), Tensor(np.zeros((2, 2, 1))))


@pytest.mark.parametrize("spans", [[(0, 0)], [(0, 3), (2, 5)], [(0, 7)], []])
def test_pool_spans_rejects_bad_spans(spans):
    with pytest.raises(SpanError):
        ops.pool_spans(Tensor(np.zeros((2, 6))), spans)


def test_cross_entropy_rejects_bad_target():
    with pytest.raises(TargetError):
        ops.softmax_cross_entropy(Tensor(np.zeros((1, 3))), [3])


def test_bce_rejects_non_binary_targets():
    with pytest.raises(TargetError):
        ops.sigmoid_bce(Tensor(np.zeros((1, 2))), [[0, 2]])


# ── Checkpoints ──────────────────────────────────────────────


class _Pair(Module):
    def __init__(self, rng):
        self.first = Linear(3, 4, rng, std=1.0)
        self.blocks = [Conv1d(4, 2, 3, rng, dilation=2, std=1.0)]
        self.norm = LayerNorm(2)


def test_checkpoint_round_trip(tmp_path, rng):
    model = _Pair(rng)
    path = str(tmp_path / "weights" / "model.lcv")
    save_checkpoint(path, model.state_dict())

    other = _Pair(np.random.default_rng(99))
    other.load_state_dict(load_checkpoint(path))
    for name, value in model.state_dict().items():
        np.testing.assert_array_equal(other.state_dict()[name], value.astype(np.float32))


def test_checkpoint_layout_starts_with_magic_and_count():
    payload = encode_checkpoint({"w": np.ones((2, 3))})
    assert payload[:4] == MAGIC
    assert int.from_bytes(payload[4:8], "little") == 1
    # name length + name + rank + dims + float32 data
    assert len(payload) == 8 + 4 + 1 + 4 + 16 + 24


def test_checkpoint_bad_magic():
    with pytest.raises(CheckpointError, match="magic"):
        decode_checkpoint(b"NOPE" + b"\x00" * 4)


def test_checkpoint_truncated():
    payload = encode_checkpoint({"w": np.ones(4)})
    with pytest.raises(CheckpointError, match="truncated"):
        decode_checkpoint(payload[:-3])


def test_checkpoint_trailing_bytes():
    payload = encode_checkpoint({"w": np.ones(4)})
    with pytest.raises(CheckpointError, match="trailing"):
        decode_checkpoint(payload + b"\x00")


def test_missing_checkpoint_file(tmp_path):
    with pytest.raises(CheckpointError, match="not found"):
        load_checkpoint(str(tmp_path / "absent.lcv"))


def test_load_state_dict_reports_name_and_shape_mismatch(rng):
    model = _Pair(rng)
    state = model.state_dict()
    renamed = dict(state)
    renamed["extra"] = renamed.pop("norm.beta")
    with pytest.raises(CheckpointError, match="missing"):
        model.load_state_dict(renamed)

    reshaped = dict(state)
    reshaped["first.bias"] = np.zeros(5)
    with pytest.raises(CheckpointError, match="first.bias"):
        model.load_state_dict(reshaped)


# ── Modules ──────────────────────────────────────────────────


def test_named_parameters_walk_lists_and_children(rng):
    names = set(_Pair(rng).named_parameters())
    assert names == {
        "first.weight", "first.bias",
        "blocks.0.weight", "blocks.0.bias",
        "norm.gamma", "norm.beta",
    }


def test_num_parameters(rng):
    assert _Pair(rng).num_parameters() == (3 * 4 + 4) + (4 * 2 * 3 + 2) + 2 * 2


def test_train_eval_propagates(rng):
    class Wrapper(Module):
        def __init__(self):
            self.drop = Dropout(0.5, rng)

    model = Wrapper().eval()
    assert not model.drop.training
    model.train()
    assert model.drop.training


def test_dropout_rejects_probability_one(rng):
    with pytest.raises(ValueError):
        Dropout(1.0, rng)


def test_embedding_load_checks_shape(tmp_path, rng):
    path = tmp_path / "emb.npy"
    np.save(path, np.ones((5, 3)))
    emb = Embedding(5, 3, rng)
    emb.load(str(path))
    assert np.all(emb.table.data == 1.0)
    with pytest.raises(ShapeError):
        Embedding(6, 3, rng).load(str(path))
