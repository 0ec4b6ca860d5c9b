import time

import numpy as np
import pytest

from towerbench.models import AttentionConfig, preset_config, receptive_field, retrieval_config
from towerbench.profiler import (
    REPORT_COMMENT,
    BenchReport,
    append_report_csv,
    count_flops,
    flops_breakdown,
    measure_latency,
    measure_throughput,
    read_report_csv,
    track_peak_memory,
)
from towerbench.tensor import Tensor, precision

ABLATION_KERNELS = (17, 21, 65, 129, 257, 513)


def _lra_cnn():
    return preset_config("lra_text", vocab_size=257)


def _lra_attention():
    return AttentionConfig(vocab_size=257, layers=2, model_dim=64, heads=2, ff_dim=128, max_len=4096)


# ── FLOPs ────────────────────────────────────────────────────


def test_lra_cnn_is_an_order_of_magnitude_cheaper_at_4096():
    cnn = count_flops(_lra_cnn(), 4096)
    attention = count_flops(_lra_attention(), 4096)
    assert cnn == pytest.approx(0.287, abs=0.01)
    assert attention == pytest.approx(4.56, abs=0.05)
    assert cnn <= 0.1 * attention


def test_conv_terms_by_hand():
    cfg = preset_config("lra_text", vocab_size=257)
    terms = flops_breakdown(cfg, 1)
    # layer 0 of the k=9 tower: two convs plus the 1x1 skip from 64 to 8 channels
    assert terms["tower0.layer0"] == 64 * 8 * 9 + 8 * 8 * 9 + 64 * 8
    assert terms["tower1.layer2"] == 2 * 32 * 32 * 13
    assert sum(terms.values()) == 70016


@pytest.mark.parametrize("name", ["cnn_large", "cnn_small", "lra_text"])
@pytest.mark.parametrize("steps", [1, 100, 4096])
def test_cnn_flops_are_linear_in_length(name, steps):
    cfg = preset_config(name, vocab_size=100)
    double = sum(flops_breakdown(cfg, 2 * steps).values())
    single = sum(flops_breakdown(cfg, steps).values())
    assert double == 2 * single


@pytest.mark.parametrize("n", [512, 1024])
def test_attention_scores_are_quadratic(n):
    cfg = _lra_attention()
    assert flops_breakdown(cfg, 2 * n)["scores"] == 4 * flops_breakdown(cfg, n)["scores"]
    ratio = count_flops(cfg, 2 * n) / count_flops(cfg, n)
    assert 2.0 < ratio < 4.0


def test_kernel_sweep_grows_cost_and_receptive_field():
    configs = [retrieval_config(k, vocab_size=257) for k in ABLATION_KERNELS]
    flops = [count_flops(c, 4000) for c in configs]
    fields = [receptive_field(c).final for c in configs]
    assert all(a < b for a, b in zip(flops, flops[1:]))
    assert all(a < b for a, b in zip(fields, fields[1:]))
    assert fields[0] == 97


def test_flops_need_a_positive_length():
    with pytest.raises(ValueError):
        count_flops(_lra_cnn(), 0)


# ── Timing and memory ────────────────────────────────────────


def test_throughput_of_a_sleeping_closure():
    rate = measure_throughput(lambda: time.sleep(0.02), n_steps=5, warmup_steps=0, repeats=1)
    assert 35.0 <= rate <= 50.0


def test_throughput_needs_steps():
    with pytest.raises(ValueError):
        measure_throughput(lambda: None, n_steps=0)


def test_latency_is_seconds_per_call():
    assert 0.01 <= measure_latency(lambda: time.sleep(0.01), repeats=3, warmup=0) < 0.05


def test_peak_memory_sees_transient_tensors():
    def run():
        with precision("f64"):
            big = Tensor(np.zeros(1000))
            del big
            Tensor(np.zeros(10))

    assert track_peak_memory(run) == 8000


# ── Report files ─────────────────────────────────────────────


def _report(seed, quality=0.5):
    return BenchReport("text", "cnn_lra", quality, 0.287, 12.5, 1024, 3000, seed)


def test_report_csv_has_one_comment_and_header(tmp_path):
    path = str(tmp_path / "report.csv")
    append_report_csv(path, [_report(0)])
    append_report_csv(path, [_report(1), _report(2, 0.75)])
    lines = (tmp_path / "report.csv").read_text().splitlines()
    assert lines[0] == REPORT_COMMENT
    assert lines[1].startswith("task,model,quality")
    assert len(lines) == 5
    rows = read_report_csv(path)
    assert [r.seed for r in rows] == [0, 1, 2]
    assert rows[2] == _report(2, 0.75)


def test_report_rejects_negative_numbers():
    with pytest.raises(ValueError):
        BenchReport("text", "cnn_lra", 0.5, 0.1, -1.0, 0, 0, 0)
