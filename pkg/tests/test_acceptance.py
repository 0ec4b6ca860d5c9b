"""Full-length runs on the shipped configs. Deselect with ``-m "not slow"``."""

from collections import Counter
from pathlib import Path

import pytest

from towerbench.bench import run_bench
from towerbench.config import check_config, config_from_dict
from towerbench.config_loader import build_parser, load_config
from towerbench.metrics import macro_f1
from towerbench.training import load_examples, run_training

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

pytestmark = pytest.mark.slow


def test_planted_corpus_is_learnable(tmp_path):
    args = build_parser().parse_args([
        "train", "--config", str(CONFIG_DIR / "learnability.yaml"), "--out-dir", str(tmp_path),
    ])
    cfg = load_config(args)
    scores = run_training(cfg).results[0].scores
    assert scores["conv"] >= 0.95
    assert scores["utt"] >= 0.85


def test_listops_cnn_beats_chance(tmp_path):
    args = build_parser().parse_args([
        "train", "--config", str(CONFIG_DIR / "listops.yaml"), "--out-dir", str(tmp_path),
    ])
    scores = run_training(load_config(args)).results[0].scores
    assert scores["acc"] > 0.30


def test_majority_baseline_is_far_below_the_model():
    args = build_parser().parse_args(["train", "--config", str(CONFIG_DIR / "learnability.yaml")])
    splits = load_examples(check_config(load_config(args)))
    majority = Counter(c.conv_label for c in splits["train"]).most_common(1)[0][0]
    golds = [c.conv_label for c in splits["test"]]
    assert macro_f1([majority] * len(golds), golds, 10) < 0.1


def test_convolutional_encoder_is_cheaper_than_attention_at_length(tmp_path):
    cfg = config_from_dict({
        "out_dir": str(tmp_path),
        "bench": {"models": ["cnn_lra", "full_attention"], "lengths": [2048], "n_steps": 2, "repeats": 1},
    })
    cnn, attention = run_bench(cfg)
    assert cnn.flops_g < 0.2 * attention.flops_g
    assert cnn.peak_bytes < attention.peak_bytes
    assert cnn.steps_per_sec > attention.steps_per_sec
