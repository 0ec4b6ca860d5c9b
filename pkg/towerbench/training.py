"""Training, evaluation and seed sweeps for one resolved ``RunConfig``."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
import os
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .config import RunConfig, check_config, config_from_dict
from .data import gen_conversations, gen_listops, gen_retrieval, gen_text_bytes
from .data.conversations import GeneratorSpec, PlantedOracle
from .data.io import read_split
from .data.sampling import SPLITS, split_of
from .errors import NonFiniteError, TrainingDivergedError
from .metrics import format_mean_sd
from .models.attention import AttentionConfig, AttentionEncoder
from .models.presets import preset_config, retrieval_config
from .models.tcn import DualTowerConfig, DualTowerEncoder, build_dual_tower_config
from .nn import Module
from .optim import SGD, Adam, Optimizer, ScheduleConfig, lr_at
from .profiler import BenchReport, append_report_csv, count_flops
from .tasks import ConversationTask, RetrievalTask, listops_task, text_task
from .tensor import Tape, precision, tracking_memory
from .tensor.checkpoint import load_checkpoint, save_checkpoint
from .utils import atomic_write_text, derived_rng

log = logging.getLogger(__name__)

CHECKPOINT_NAME = "model.lcv"
TRACE_NAME = "trace.csv"
CONFIG_NAME = "resolved_config.json"
REPORT_NAME = "report.csv"
SUMMARY_NAME = "summary.csv"

_INIT_STREAM = 0
_SAMPLER_STREAM = 1

StepCallback = Callable[[int, float], None]


# ── Building blocks ──────────────────────────────────────────


def build_task(cfg: RunConfig):
    d = cfg.data
    if cfg.task == "conversations":
        return ConversationTask(
            d.vocab_size, d.num_conv_labels, d.num_utt_labels,
            cfg.paradigm, cfg.utt_weight, cfg.threshold, d.max_length,
        )
    if cfg.task == "text":
        return text_task(d.max_length)
    if cfg.task == "listops":
        return listops_task(d.max_length)
    return RetrievalTask(d.max_length)


def generator_spec(cfg: RunConfig) -> GeneratorSpec:
    d = cfg.data
    return GeneratorSpec(
        seed=d.seed,
        n_conversations=d.n_examples,
        num_conv_labels=d.num_conv_labels,
        num_utt_labels=d.num_utt_labels,
        vocab_size=d.vocab_size,
        mean_length=d.mean_length,
        sd_length=d.sd_length,
        max_length=d.max_length,
        utterance_label_rate=d.utterance_label_rate,
        label_skew=d.label_skew,
    )


def generate_examples(cfg: RunConfig) -> tuple[list, PlantedOracle | None]:
    """All examples of the configured task, plus the labelling oracle for conversations."""
    d = cfg.data
    if cfg.task == "conversations":
        corpus = gen_conversations(generator_spec(cfg))
        return corpus.conversations, corpus.oracle
    if cfg.task == "text":
        return gen_text_bytes(d.seed, d.n_examples, mean_length=d.mean_length,
                              sd_length=d.sd_length, max_length=d.max_length), None
    if cfg.task == "listops":
        return gen_listops(d.seed, d.n_examples, d.listops_max_depth, d.listops_max_args, d.max_length), None
    return gen_retrieval(d.seed, d.n_examples, int(d.mean_length), d.signature_size), None


def split_examples(examples: Sequence) -> dict[str, list]:
    out: dict[str, list] = {name: [] for name in SPLITS}
    for example in examples:
        out[split_of(example.id)].append(example)
    return out


def load_examples(cfg: RunConfig) -> dict[str, list]:
    """Read ``data.dir`` when set, otherwise generate in memory."""
    if cfg.data.dir:
        log.info("reading %s corpus from %s", cfg.task, cfg.data.dir)
        return {name: read_split(cfg.data.dir, cfg.task, name) for name in SPLITS}
    examples, _ = generate_examples(cfg)
    return split_examples(examples)


def encoder_config(cfg: RunConfig, vocab_size: int) -> DualTowerConfig | AttentionConfig:
    a = cfg.arch
    if cfg.is_attention:
        t = cfg.attention
        return AttentionConfig(vocab_size, t.layers, t.model_dim, t.heads, t.ff_dim, t.max_len, t.dropout)
    if cfg.model == "cnn_custom":
        return build_dual_tower_config(
            vocab_size, a.embedding_dim, a.kernel_sizes, a.filters, a.dilations,
            a.padding_mode, a.dropout, a.cross_feed,
        )
    if cfg.task == "retrieval":
        return retrieval_config(a.retrieval_kernel, vocab_size, a.embedding_dim, a.dropout)
    name = "lra_text" if cfg.model == "cnn_lra" else cfg.model
    return preset_config(name, vocab_size, a.embedding_dim, a.padding_mode, a.dropout, a.cross_feed)


def build_encoder(cfg: RunConfig, enc_cfg: DualTowerConfig | AttentionConfig, rng: np.random.Generator) -> Module:
    if isinstance(enc_cfg, AttentionConfig):
        encoder = AttentionEncoder(enc_cfg, rng)
    else:
        encoder = DualTowerEncoder(enc_cfg, rng)
    if cfg.arch.embedding_file:
        encoder.embedding.load(cfg.arch.embedding_file)
    return encoder


def build_model(cfg: RunConfig, task, seed: int) -> tuple[Module, DualTowerConfig | AttentionConfig]:
    rng = derived_rng(seed, _INIT_STREAM)
    enc_cfg = encoder_config(cfg, task.model_vocab_size)
    return task.build_model(build_encoder(cfg, enc_cfg, rng), rng), enc_cfg


def schedule_config(cfg: RunConfig) -> ScheduleConfig:
    o = cfg.optim
    return ScheduleConfig(
        total_steps=cfg.total_steps,
        kind=o.schedule,
        max_lr=o.max_lr,
        warmup_fraction=o.warmup_fraction,
        div_factor=o.div_factor,
        final_div_factor=o.final_div_factor,
    )


def build_optimizer(cfg: RunConfig, model: Module) -> Optimizer:
    o = cfg.optim
    if o.optimizer == "adam":
        return Adam(model.parameters(), (o.beta1, o.beta2), o.eps, o.weight_decay)
    return SGD(model.parameters(), o.momentum, o.weight_decay)


def train_step(model: Module, task, batch, optimizer: Optimizer, lr: float):
    """One forward/backward/update; returns the loss parts."""
    with Tape() as tape:
        losses = task.loss(model, batch)
    optimizer.zero_grad()
    tape.backward(losses.total)
    tape.release()
    optimizer.step(lr)
    return losses


# ── Training ─────────────────────────────────────────────────


@dataclass
class TraceRow:
    step: int
    loss_conv: float | None
    loss_utt: float | None
    lr: float


@dataclass
class SeedResult:
    seed: int
    scores: dict[str, float]
    reports: list[BenchReport]
    trace: list[TraceRow]
    run_dir: str


@dataclass
class TrainingSummary:
    config: RunConfig
    results: list[SeedResult] = field(default_factory=list)

    def summary(self) -> dict[str, str]:
        """``metric -> "mean (±sd)"`` across seeds."""
        metrics = self.results[0].scores.keys() if self.results else []
        return {m: format_mean_sd(r.scores[m] for r in self.results) for m in metrics}


def _scalar(t) -> float | None:
    return None if t is None else t.item()


def fit(
    cfg: RunConfig,
    task,
    model: Module,
    train: Sequence,
    seed: int,
    on_step: StepCallback | None = None,
) -> tuple[list[TraceRow], float]:
    """Train for ``cfg.total_steps`` steps; returns the trace and steps per second."""
    if not train:
        raise ValueError("training split is empty")
    sampler = derived_rng(seed, _SAMPLER_STREAM)
    optimizer = build_optimizer(cfg, model)
    sched = schedule_config(cfg)
    size = min(cfg.batch_size, len(train))
    trace: list[TraceRow] = []
    durations: list[float] = []
    model.train()
    for step in range(cfg.total_steps):
        picks = sampler.choice(len(train), size=size, replace=False)
        batch = task.make_batch([train[i] for i in picks])
        lr = lr_at(step, sched)
        start = time.perf_counter()
        with Tape() as tape:
            try:
                losses = task.loss(model, batch)
            except NonFiniteError as e:
                raise TrainingDivergedError(step, math.nan) from e
        value = losses.total.item()
        if not math.isfinite(value):
            tape.release()
            raise TrainingDivergedError(step, value)
        optimizer.zero_grad()
        tape.backward(losses.total)
        tape.release()
        try:
            optimizer.step(lr)
        except NonFiniteError as e:
            raise TrainingDivergedError(step, math.nan) from e
        durations.append(time.perf_counter() - start)
        trace.append(TraceRow(step, _scalar(losses.conversation), _scalar(losses.utterance), lr))
        if (step + 1) % cfg.log_every == 0:
            log.info("step %d/%d loss %.4f lr %.3g", step + 1, cfg.total_steps, value, lr)
        if on_step is not None:
            on_step(step, value)
    model.eval()
    timed = durations[1:] or durations
    return trace, len(timed) / sum(timed)


def evaluate(cfg: RunConfig, task, model: Module, examples: Sequence) -> dict[str, float]:
    model.eval()
    return task.evaluate(model, examples, cfg.eval_batch_size)


def flops_length(cfg: RunConfig) -> int:
    return int(cfg.data.max_length)


def write_trace(path: str, trace: Sequence[TraceRow]) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["step", "loss_conv", "loss_utt", "lr"])
    for row in trace:
        writer.writerow([
            row.step,
            "" if row.loss_conv is None else repr(row.loss_conv),
            "" if row.loss_utt is None else repr(row.loss_utt),
            repr(row.lr),
        ])
    atomic_write_text(path, buffer.getvalue())


def write_resolved_config(path: str, cfg: RunConfig) -> None:
    atomic_write_text(path, json.dumps(cfg.to_dict(), indent=2) + "\n")


def run_single(cfg: RunConfig, seed: int, splits: dict[str, list], on_step: StepCallback | None = None) -> SeedResult:
    """Train and test one seed, writing checkpoint, trace and resolved config."""
    seed_cfg = dataclasses.replace(cfg, seed=seed, seeds=[])
    task = build_task(seed_cfg)
    with precision(seed_cfg.precision), tracking_memory() as tracker:
        model, enc_cfg = build_model(seed_cfg, task, seed)
        trace, steps_per_sec = fit(seed_cfg, task, model, splits["train"], seed, on_step)
        scores = evaluate(seed_cfg, task, model, splits["test"])

    run_dir = os.path.join(cfg.out_dir, cfg.run_name, f"seed-{seed}")
    os.makedirs(run_dir, exist_ok=True)
    save_checkpoint(os.path.join(run_dir, CHECKPOINT_NAME), model.state_dict())
    write_trace(os.path.join(run_dir, TRACE_NAME), trace)
    write_resolved_config(os.path.join(run_dir, CONFIG_NAME), seed_cfg)

    flops = count_flops(enc_cfg, flops_length(seed_cfg))
    reports = [
        BenchReport(
            task=f"{cfg.task}.{metric}" if cfg.task == "conversations" else cfg.task,
            model=cfg.model,
            quality=value,
            flops_g=flops,
            steps_per_sec=steps_per_sec,
            peak_bytes=tracker.peak_bytes,
            params=model.num_parameters(),
            seed=seed,
        )
        for metric, value in scores.items()
    ]
    append_report_csv(os.path.join(cfg.out_dir, REPORT_NAME), reports)
    log.info("seed %d finished: %s", seed, ", ".join(f"{k}={v:.4f}" for k, v in scores.items()))
    return SeedResult(seed, scores, reports, trace, run_dir)


def write_summary(path: str, summary: TrainingSummary) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["task", "model", "paradigm", "metric", "seeds", "mean_sd"])
    cfg = summary.config
    seeds = " ".join(str(r.seed) for r in summary.results)
    for metric, text in summary.summary().items():
        writer.writerow([cfg.task, cfg.model, cfg.paradigm, metric, seeds, text])
    atomic_write_text(path, buffer.getvalue())


def run_training(
    cfg: RunConfig,
    on_step: StepCallback | None = None,
    on_seed: Callable[[int], None] | None = None,
) -> TrainingSummary:
    """Train every seed of ``cfg`` and write per-seed artifacts plus the sweep summary."""
    cfg = check_config(cfg)
    splits = load_examples(cfg)
    log.info("%s: %s", cfg.task, ", ".join(f"{k}={len(v)}" for k, v in splits.items()))
    summary = TrainingSummary(cfg)
    for seed in cfg.seed_list:
        if on_seed is not None:
            on_seed(seed)
        summary.results.append(run_single(cfg, seed, splits, on_step))
    if len(summary.results) > 1:
        write_summary(os.path.join(cfg.out_dir, cfg.run_name, SUMMARY_NAME), summary)
    return summary


# ── Evaluation of a saved run ────────────────────────────────


def load_run_config(run_dir: str) -> RunConfig:
    with open(os.path.join(run_dir, CONFIG_NAME), encoding="utf-8") as f:
        return check_config(config_from_dict(json.load(f)))


def evaluate_run(run_dir: str, split: str = "test") -> tuple[RunConfig, dict[str, float]]:
    """Rebuild the model of a finished run from its resolved config and checkpoint."""
    cfg = load_run_config(run_dir)
    task = build_task(cfg)
    with precision(cfg.precision):
        model, _ = build_model(cfg, task, cfg.seed)
        model.load_state_dict(load_checkpoint(os.path.join(run_dir, CHECKPOINT_NAME)))
        scores = evaluate(cfg, task, model, load_examples(cfg)[split])
    return cfg, scores

