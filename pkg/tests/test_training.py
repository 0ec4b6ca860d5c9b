"""Small end-to-end runs: training, artifacts, re-evaluation, sweeps and cost tables."""

import csv
import json
import os

import pytest

from towerbench.bench import ABLATION_NAME, BENCH_NAME, run_ablation, run_bench
from towerbench.config import config_from_dict
from towerbench.data.io import write_split
from towerbench.errors import ConfigError, TrainingDivergedError
from towerbench.profiler import read_report_csv
from towerbench.tensor.checkpoint import load_checkpoint
from towerbench.training import (
    CHECKPOINT_NAME,
    CONFIG_NAME,
    REPORT_NAME,
    SUMMARY_NAME,
    TRACE_NAME,
    evaluate_run,
    generate_examples,
    run_training,
    split_examples,
)

TINY_ARCH = {"embedding_dim": 8, "kernel_sizes": [3, 5], "filters": [4, 4], "dilations": [1, 2], "dropout": 0.1}


def _config(tmp_path, **overrides):
    data = {
        "task": "conversations",
        "model": "cnn_custom",
        "total_steps": 4,
        "batch_size": 4,
        "eval_batch_size": 8,
        "log_every": 2,
        "out_dir": str(tmp_path / "runs"),
        "arch": TINY_ARCH,
        "data": {
            "n_examples": 80, "vocab_size": 64, "num_conv_labels": 3, "num_utt_labels": 4,
            "mean_length": 40.0, "sd_length": 10.0, "max_length": 96,
        },
    }
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(data.get(key), dict):
            data[key] = {**data[key], **value}
        else:
            data[key] = value
    return config_from_dict(data)


def _read_csv(path):
    with open(path, encoding="utf-8") as f:
        return list(csv.DictReader(line for line in f if not line.startswith("#")))


# ── Training ─────────────────────────────────────────────────


def test_same_seed_gives_identical_traces(tmp_path):
    first = run_training(_config(tmp_path / "a"))
    second = run_training(_config(tmp_path / "b"))
    assert first.results[0].trace == second.results[0].trace
    assert first.results[0].scores == second.results[0].scores


def test_different_seeds_give_different_traces(tmp_path):
    first = run_training(_config(tmp_path / "a", seed=0))
    second = run_training(_config(tmp_path / "b", seed=1))
    assert first.results[0].trace != second.results[0].trace


def test_run_writes_its_artifacts(tmp_path):
    cfg = _config(tmp_path)
    result = run_training(cfg).results[0]
    run_dir = os.path.join(cfg.out_dir, "conversations-cnn_custom-mtl", "seed-0")
    assert result.run_dir == run_dir
    for name in (CHECKPOINT_NAME, TRACE_NAME, CONFIG_NAME):
        assert os.path.exists(os.path.join(run_dir, name))

    trace = _read_csv(os.path.join(run_dir, TRACE_NAME))
    assert [int(r["step"]) for r in trace] == [0, 1, 2, 3]
    assert all(r["loss_conv"] and r["loss_utt"] for r in trace)

    with open(os.path.join(run_dir, CONFIG_NAME), encoding="utf-8") as f:
        saved = json.load(f)
    assert saved["optim"]["optimizer"] == "sgd"
    assert saved["data"]["max_length"] == 96

    reports = read_report_csv(os.path.join(cfg.out_dir, REPORT_NAME))
    assert [r.task for r in reports] == ["conversations.conv", "conversations.utt"]
    assert all(0.0 <= r.quality <= 1.0 and r.peak_bytes > 0 and r.params > 0 for r in reports)
    assert set(result.scores) == {"conv", "utt"}


def test_checkpoint_holds_every_parameter(tmp_path):
    cfg = _config(tmp_path)
    result = run_training(cfg).results[0]
    names = set(load_checkpoint(os.path.join(result.run_dir, CHECKPOINT_NAME)))
    assert "encoder.embedding.table" in names
    assert "conv_head.proj.weight" in names
    assert "utt_head.proj.weight" in names


@pytest.mark.parametrize(("paradigm", "metric", "present", "absent"), [
    ("stl_conv", "conv", "loss_conv", "loss_utt"),
    ("stl_utt", "utt", "loss_utt", "loss_conv"),
])
def test_single_task_paradigms_train_one_head(tmp_path, paradigm, metric, present, absent):
    result = run_training(_config(tmp_path, paradigm=paradigm)).results[0]
    assert set(result.scores) == {metric}
    trace = _read_csv(os.path.join(result.run_dir, TRACE_NAME))
    assert all(r[present] != "" and r[absent] == "" for r in trace)


def test_evaluate_run_reproduces_test_scores(tmp_path):
    result = run_training(_config(tmp_path)).results[0]
    cfg, scores = evaluate_run(result.run_dir)
    assert cfg.seed == 0
    assert scores == result.scores


def test_seed_sweep_writes_a_summary(tmp_path):
    cfg = _config(tmp_path, seeds=[0, 1])
    summary = run_training(cfg)
    assert [r.seed for r in summary.results] == [0, 1]
    rows = _read_csv(os.path.join(cfg.out_dir, cfg.run_name, SUMMARY_NAME))
    assert [r["metric"] for r in rows] == ["conv", "utt"]
    assert all(r["seeds"] == "0 1" and "(±" in r["mean_sd"] for r in rows)
    assert len(read_report_csv(os.path.join(cfg.out_dir, REPORT_NAME))) == 4


def test_training_reads_a_corpus_directory(tmp_path):
    cfg = _config(tmp_path)
    examples, _ = generate_examples(cfg)
    corpus = tmp_path / "corpus"
    for split, items in split_examples(examples).items():
        write_split(str(corpus), "conversations", split, items)
    from_disk = run_training(_config(tmp_path / "disk", data={"dir": str(corpus)})).results[0]
    in_memory = run_training(cfg).results[0]
    assert from_disk.trace == in_memory.trace


@pytest.mark.parametrize("task", ["text", "listops", "retrieval"])
def test_byte_level_tasks_train(tmp_path, task):
    cfg = _config(
        tmp_path, task=task, total_steps=2,
        data={"n_examples": 80, "mean_length": 32.0, "sd_length": 8.0, "max_length": 64},
    )
    result = run_training(cfg).results[0]
    assert set(result.scores) == {"acc"}
    assert 0.0 <= result.scores["acc"] <= 1.0


def test_small_planted_corpus_is_learnable(tmp_path):
    cfg = _config(
        tmp_path, total_steps=1000, batch_size=8, log_every=250,
        optim={"optimizer": "adam", "schedule": "one_cycle", "max_lr": 0.005, "weight_decay": 0.0},
        arch={"embedding_dim": 16, "kernel_sizes": [3, 7], "filters": [16, 16], "dilations": [1, 2],
              "dropout": 0.0},
        data={"n_examples": 500, "num_conv_labels": 4, "num_utt_labels": 6,
              "mean_length": 48.0, "sd_length": 12.0, "max_length": 96},
    )
    scores = run_training(cfg).results[0].scores
    assert scores["conv"] >= 0.9
    assert scores["utt"] >= 0.8


def test_attention_baseline_trains(tmp_path):
    cfg = _config(
        tmp_path, model="full_attention",
        attention={"layers": 1, "model_dim": 8, "heads": 2, "ff_dim": 16, "max_len": 128},
    )
    result = run_training(cfg).results[0]
    assert set(result.scores) == {"conv", "utt"}


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_names_the_step(tmp_path):
    cfg = _config(tmp_path, total_steps=6, optim={"max_lr": 1e30})
    with pytest.raises(TrainingDivergedError) as info:
        run_training(cfg)
    assert 0 <= info.value.step < 6


def test_invalid_config_is_rejected_before_training(tmp_path):
    with pytest.raises(ConfigError):
        run_training(_config(tmp_path, total_steps=0))
    assert not (tmp_path / "runs").exists()


# ── Cost tables ──────────────────────────────────────────────


def test_bench_sweeps_models_and_lengths(tmp_path):
    cfg = _config(
        tmp_path,
        attention={"layers": 1, "model_dim": 8, "heads": 2, "ff_dim": 16},
        bench={"models": ["cnn_custom", "full_attention"], "lengths": [16, 32], "batch_size": 2,
               "n_steps": 1, "repeats": 1, "inference": True, "inference_batch_size": 2},
    )
    rows = run_bench(cfg)
    assert [(r.model, r.length) for r in rows] == [
        ("cnn_custom", 16), ("cnn_custom", 32), ("full_attention", 16), ("full_attention", 32),
    ]
    assert rows[1].flops_g == pytest.approx(2 * rows[0].flops_g)
    assert all(r.steps_per_sec > 0 and r.peak_bytes > 0 and r.latency_s > 0 for r in rows)
    table = _read_csv(os.path.join(cfg.out_dir, BENCH_NAME))
    assert len(table) == 4


def test_bench_throughput_falls_as_sequences_grow(tmp_path):
    cfg = _config(
        tmp_path,
        arch={"filters": [64, 64], "dropout": 0.0},
        bench={"models": ["cnn_custom"], "lengths": [16, 1024, 4096], "batch_size": 2,
               "n_steps": 1, "repeats": 3},
    )
    rates = [r.steps_per_sec for r in run_bench(cfg)]
    assert rates == sorted(rates, reverse=True)


def test_ablation_grows_receptive_field(tmp_path):
    cfg = _config(
        tmp_path, total_steps=2, task="retrieval",
        data={"n_examples": 80, "mean_length": 32.0, "sd_length": 0.0, "max_length": 32},
        bench={"kernels": [3, 5], "batch_size": 2, "n_steps": 1, "repeats": 1},
    )
    rows = run_ablation(cfg)
    assert [r.kernel_size for r in rows] == [3, 5]
    assert rows[0].receptive_field < rows[1].receptive_field
    assert rows[0].flops_g < rows[1].flops_g
    assert all(0.0 <= r.accuracy <= 1.0 for r in rows)
    assert len(_read_csv(os.path.join(cfg.out_dir, ABLATION_NAME))) == 2
    assert os.path.isdir(os.path.join(cfg.out_dir, "k3"))


def test_ablation_rejects_attention(tmp_path):
    with pytest.raises(ConfigError):
        run_ablation(_config(tmp_path, model="full_attention", task="retrieval"))
