import numpy as np
import pytest

from towerbench.data import GeneratorSpec, SpecialTokens, encode_batch, gen_conversations
from towerbench.errors import MetricError, ShapeError
from towerbench.metrics import accuracy, format_mean_sd, macro_f1, per_class_f1, predict_labels
from towerbench.models import (
    ConversationHead,
    DualTowerEncoder,
    PairHead,
    UtteranceHead,
    UtteranceSpan,
    build_dual_tower_config,
    mtl_loss,
)
from towerbench.tasks import ConversationModel
from towerbench.tensor import Tape, Tensor, ops


# ── Metrics ──────────────────────────────────────────────────


def test_macro_f1_hand_example():
    assert macro_f1([0, 1, 1], [0, 0, 1], 2) == pytest.approx(2 / 3)


def test_zero_support_classes_count_as_zero():
    assert macro_f1([0], [0], 3) == pytest.approx(1 / 3)


def test_macro_f1_is_order_invariant(rng):
    golds = rng.integers(0, 4, size=30)
    preds = rng.integers(0, 4, size=30)
    order = rng.permutation(30)
    assert macro_f1(preds, golds, 4) == pytest.approx(macro_f1(preds[order], golds[order], 4))


def test_multi_label_sets_and_indicator_matrix_agree():
    preds = np.array([[1, 0, 1], [0, 0, 0]])
    golds = np.array([[1, 0, 0], [0, 1, 0]])
    from_sets = per_class_f1([{0, 2}, set()], [{0}, {1}], 3)
    np.testing.assert_allclose(per_class_f1(preds, golds, 3), from_sets)
    np.testing.assert_allclose(from_sets, [1.0, 0.0, 0.0])


def test_metric_errors():
    with pytest.raises(MetricError):
        macro_f1([], [], 2)
    with pytest.raises(MetricError):
        macro_f1([0], [0, 1], 2)
    with pytest.raises(MetricError):
        macro_f1([2], [0], 2)
    with pytest.raises(MetricError):
        accuracy([], [])


def test_accuracy():
    assert accuracy([1, 2, 3, 4], [1, 2, 0, 4]) == 0.75


def test_predict_labels_threshold():
    assert predict_labels(np.array([0.1, 0.0, -0.1])).tolist() == [1, 0, 0]
    assert predict_labels(np.array([1.0, 2.0]), threshold=0.8).tolist() == [0, 1]
    with pytest.raises(ValueError):
        predict_labels(np.zeros(1), threshold=1.0)


def test_format_mean_sd():
    assert format_mean_sd([0.55, 0.57]) == "56.0 (±1.4)"
    assert format_mean_sd([0.558]) == "55.8 (±0.0)"
    with pytest.raises(MetricError):
        format_mean_sd([])


# ── Heads and joint loss ─────────────────────────────────────


def test_conversation_head_pools_then_projects(rng):
    head = ConversationHead(3, 4, rng)
    features = Tensor(rng.normal(size=(3, 10)))
    logits = head(features)
    expected = head.proj.weight.data @ features.data.max(axis=1) + head.proj.bias.data
    np.testing.assert_allclose(logits.data, expected, rtol=1e-5)


def test_utterance_head_one_row_per_span(rng):
    head = UtteranceHead(3, 5, rng)
    spans = [UtteranceSpan(0, 4, 0), UtteranceSpan(4, 7, 1), UtteranceSpan(7, 10, 2)]
    assert head(Tensor(rng.normal(size=(3, 10))), spans).shape == (3, 5)


def test_pair_head_checks_shapes(rng):
    head = PairHead(3, rng)
    assert head(Tensor(np.ones(3)), Tensor(np.zeros(3))).shape == (2,)
    with pytest.raises(ShapeError):
        head(Tensor(np.ones(3)), Tensor(np.ones(4)))


def test_mtl_loss_weights_the_utterance_term(rng):
    conv = Tensor(rng.normal(size=4))
    utt = Tensor(rng.normal(size=(2, 3)))
    targets = np.array([[1, 0, 1], [0, 0, 1]])
    parts = mtl_loss(conv, 2, utt, targets, utt_weight=0.5)
    expected = ops.softmax_cross_entropy(conv, 2).item() + 0.5 * ops.sigmoid_bce(utt, targets).item()
    assert parts.total.item() == pytest.approx(expected, rel=1e-6)
    assert parts.utterance.item() == pytest.approx(ops.sigmoid_bce(utt, targets).item())


def test_mtl_loss_single_head():
    conv = Tensor([0.0, 0.0])
    parts = mtl_loss(conv, 1, None, None)
    assert parts.utterance is None
    assert parts.total.item() == pytest.approx(np.log(2))

    utt = Tensor([[0.0]])
    parts = mtl_loss(None, None, utt, [[1]])
    assert parts.conversation is None
    assert parts.total.item() == pytest.approx(np.log(2))


def test_mtl_loss_needs_a_head():
    with pytest.raises(ShapeError):
        mtl_loss(None, None, None, None)


def test_utterance_targets_leave_the_conversation_term_alone(rng):
    conv = Tensor(rng.normal(size=(2, 4)))
    utt = Tensor(rng.normal(size=(3, 5)))
    labels = np.array([1, 3])
    silent = mtl_loss(conv, labels, utt, np.zeros((3, 5)), utt_weight=0.7)
    busy = mtl_loss(conv, labels, utt, np.ones((3, 5)), utt_weight=0.7)
    assert silent.conversation.item() == busy.conversation.item()
    assert silent.utterance.item() != busy.utterance.item()
    for parts in (silent, busy):
        expected = parts.conversation.item() + 0.7 * parts.utterance.item()
        assert parts.total.item() == pytest.approx(expected, rel=1e-9)


@pytest.mark.usefixtures("f64")
@pytest.mark.parametrize("head", ["conversation", "utterance"])
def test_each_head_alone_reaches_every_encoder_parameter(head):
    spec = GeneratorSpec(
        seed=5, n_conversations=4, num_conv_labels=3, num_utt_labels=4, vocab_size=64,
        mean_length=40.0, sd_length=10.0, max_length=96, mean_utterance_length=8.0, pattern_vocab=16,
    )
    tokens = SpecialTokens(spec.vocab_size)
    batch = encode_batch(gen_conversations(spec).conversations, tokens, spec.num_utt_labels)
    rng = np.random.default_rng(0)
    cfg = build_dual_tower_config(tokens.model_vocab_size, 4, (3, 5), (4, 4), (1, 2), dropout=0.0)
    model = ConversationModel(DualTowerEncoder(cfg, rng), spec.num_conv_labels, spec.num_utt_labels, "mtl", rng)
    model.zero_grad()
    with Tape() as tape:
        out = model(batch)
        if head == "conversation":
            parts = mtl_loss(out.conv_logits, batch.conv_labels, None, None)
        else:
            parts = mtl_loss(None, None, out.utt_logits, batch.utt_labels)
    tape.backward(parts.total)
    for name, p in model.encoder.named_parameters().items():
        assert p.grad is not None and np.any(p.grad != 0), name
