"""Cost sweeps: encoder cost against sequence length, and the retrieval kernel-size ablation."""

from __future__ import annotations

import csv
import dataclasses
import io
import logging
import os
import statistics
from dataclasses import dataclass
from typing import Callable

from .config import RunConfig, check_config
from .data import TextExample
from .errors import ConfigError
from .models.tcn import receptive_field
from .profiler import count_flops, measure_latency, measure_throughput
from .tasks import text_task
from .tensor import precision, tracking_memory
from .training import (
    StepCallback,
    build_encoder,
    build_model,
    build_optimizer,
    build_task,
    encoder_config,
    load_examples,
    run_single,
    train_step,
)
from .utils import atomic_write_text, derived_rng

log = logging.getLogger(__name__)

BENCH_NAME = "bench.csv"
ABLATION_NAME = "ablation.csv"

_BENCH_STREAM = 3


def _write_rows(path: str, rows: list) -> None:
    if not rows:
        return
    buffer = io.StringIO()
    names = [f.name for f in dataclasses.fields(rows[0])]
    writer = csv.DictWriter(buffer, fieldnames=names, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: "" if v is None else v for k, v in dataclasses.asdict(row).items()})
    atomic_write_text(path, buffer.getvalue())


# ── Length sweep ─────────────────────────────────────────────


@dataclass
class BenchRow:
    model: str
    length: int
    flops_g: float
    steps_per_sec: float
    peak_bytes: int
    params: int
    latency_s: float | None = None


def _random_texts(cfg: RunConfig, count: int, length: int) -> list[TextExample]:
    rng = derived_rng(cfg.seed, _BENCH_STREAM, length)
    return [
        TextExample(f"bench-{i}", tuple(int(b) for b in rng.integers(0, 256, size=length)), i % 2)
        for i in range(count)
    ]


def bench_config(cfg: RunConfig, model: str, length: int) -> RunConfig:
    """``cfg`` retargeted to byte-level text of exactly ``length`` tokens."""
    return dataclasses.replace(
        cfg,
        task="text",
        model=model,
        paradigm="mtl",
        data=dataclasses.replace(cfg.data, max_length=length),
        attention=dataclasses.replace(cfg.attention, max_len=max(cfg.attention.max_len, length)),
    )


def bench_one(cfg: RunConfig, model_name: str, length: int) -> BenchRow:
    b = cfg.bench
    run_cfg = check_config(bench_config(cfg, model_name, length))
    task = text_task(length)
    enc_cfg = encoder_config(run_cfg, task.model_vocab_size)
    with precision(run_cfg.precision):
        with tracking_memory() as tracker:
            rng = derived_rng(cfg.seed, 0)
            model = task.build_model(build_encoder(run_cfg, enc_cfg, rng), rng)
            optimizer = build_optimizer(run_cfg, model)
            batch = task.make_batch(_random_texts(cfg, b.batch_size, length))
            rate = measure_throughput(
                lambda: train_step(model, task, batch, optimizer, 0.0),
                b.n_steps, b.warmup_steps, b.repeats,
            )
        latency = None
        if b.inference:
            model.eval()
            sample = task.make_batch(_random_texts(cfg, b.inference_batch_size, length))
            latency = measure_latency(lambda: model(sample), repeats=b.repeats)
    row = BenchRow(
        model=model_name,
        length=length,
        flops_g=count_flops(enc_cfg, length),
        steps_per_sec=rate,
        peak_bytes=tracker.peak_bytes,
        params=model.num_parameters(),
        latency_s=latency,
    )
    log.info("%s @ %d: %.4g GMACs, %.3g steps/s, %d peak bytes", model_name, length,
             row.flops_g, row.steps_per_sec, row.peak_bytes)
    return row


def run_bench(cfg: RunConfig, on_row: Callable[[BenchRow], None] | None = None) -> list[BenchRow]:
    """Every model of ``bench.models`` at every length of ``bench.lengths``."""
    cfg = check_config(cfg)
    rows = []
    for model_name in cfg.bench.models:
        for length in cfg.bench.lengths:
            row = bench_one(cfg, model_name, length)
            rows.append(row)
            if on_row is not None:
                on_row(row)
    os.makedirs(cfg.out_dir, exist_ok=True)
    _write_rows(os.path.join(cfg.out_dir, BENCH_NAME), rows)
    return rows


# ── Kernel-size ablation ─────────────────────────────────────


@dataclass
class AblationRow:
    kernel_size: int
    receptive_field: int
    flops_g: float
    steps_per_sec: float
    peak_bytes: int
    accuracy: float
    params: int


def ablation_config(cfg: RunConfig, kernel_size: int) -> RunConfig:
    model = "cnn_small" if cfg.model == "cnn_custom" else cfg.model
    return dataclasses.replace(
        cfg,
        task="retrieval",
        model=model,
        paradigm="mtl",
        out_dir=os.path.join(cfg.out_dir, f"k{kernel_size}"),
        arch=dataclasses.replace(cfg.arch, retrieval_kernel=kernel_size),
    )


def run_ablation(
    cfg: RunConfig,
    on_step: StepCallback | None = None,
    on_kernel: Callable[[int], None] | None = None,
) -> list[AblationRow]:
    """Train the single-tower retrieval encoder once per kernel size of ``bench.kernels``.

    Throughput is measured on one fixed batch so that it reflects the
    architecture rather than the sampled document lengths.
    """
    if cfg.model == "full_attention":
        raise ConfigError(["model: the kernel ablation needs a convolutional model"])
    base = check_config(dataclasses.replace(cfg, task="retrieval", paradigm="mtl"))
    splits = load_examples(base)
    rows = []
    for k in base.bench.kernels:
        if on_kernel is not None:
            on_kernel(k)
        run_cfg = check_config(ablation_config(base, k))
        results = [run_single(run_cfg, seed, splits, on_step) for seed in run_cfg.seed_list]
        task = build_task(run_cfg)
        with precision(run_cfg.precision):
            model, enc_cfg = build_model(run_cfg, task, run_cfg.seed)
            optimizer = build_optimizer(run_cfg, model)
            batch = task.make_batch(splits["train"][: run_cfg.bench.batch_size])
            rate = measure_throughput(
                lambda: train_step(model, task, batch, optimizer, 0.0),
                run_cfg.bench.n_steps, run_cfg.bench.warmup_steps, run_cfg.bench.repeats,
            )
        row = AblationRow(
            kernel_size=k,
            receptive_field=receptive_field(enc_cfg).final,
            flops_g=count_flops(enc_cfg, int(run_cfg.data.max_length)),
            steps_per_sec=rate,
            peak_bytes=max(r.reports[0].peak_bytes for r in results),
            accuracy=statistics.fmean(r.scores["acc"] for r in results),
            params=model.num_parameters(),
        )
        log.info("k=%d: receptive field %d, acc %.4f", k, row.receptive_field, row.accuracy)
        rows.append(row)
    os.makedirs(cfg.out_dir, exist_ok=True)
    _write_rows(os.path.join(cfg.out_dir, ABLATION_NAME), rows)
    return rows
