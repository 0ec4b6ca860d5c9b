"""Analytic FLOPs, wall-clock throughput and peak tensor memory."""

from __future__ import annotations

import csv
import io
import os
import statistics
import time
from dataclasses import asdict, dataclass, fields
from typing import Callable

from .models.attention import AttentionConfig
from .models.tcn import DualTowerConfig
from .tensor import tracking_memory
from .utils import atomic_write_text

GIGA = 1e9
REPORT_COMMENT = "# flops_g = giga-MACs per forward pass of one encoder over one sequence"


# ── FLOPs ────────────────────────────────────────────────────


def conv_macs(steps: int, c_in: int, c_out: int, k: int) -> int:
    return steps * c_out * c_in * k


def flops_breakdown(config: DualTowerConfig | AttentionConfig, steps: int) -> dict[str, int]:
    """Multiply-accumulates per term for one sequence of ``steps`` tokens.

    Convolutions are keyed ``tower{i}.layer{l}``; attention terms are
    ``projections``, ``scores`` and ``ffn`` summed over layers. Embedding
    lookups, biases and nonlinearities cost nothing.
    """
    if steps < 1:
        raise ValueError(f"sequence length must be >= 1, got {steps}")
    if isinstance(config, AttentionConfig):
        d, layers = config.model_dim, config.layers
        return {
            "projections": layers * 4 * steps * d * d,
            "scores": layers * 2 * steps * steps * d,
            "ffn": layers * 2 * steps * d * config.ff_dim,
        }
    out = {}
    for i, tower in enumerate(config.towers):
        for l, b in enumerate(tower.layers):
            macs = conv_macs(steps, b.in_channels, b.out_channels, b.kernel_size)
            macs += conv_macs(steps, b.out_channels, b.out_channels, b.kernel_size)
            if b.in_channels != b.out_channels:
                macs += conv_macs(steps, b.in_channels, b.out_channels, 1)
            out[f"tower{i}.layer{l}"] = macs
    return out


def count_flops(config: DualTowerConfig | AttentionConfig, steps: int) -> float:
    """Giga-MACs of one encoder forward pass; one MAC counts as one FLOP."""
    return sum(flops_breakdown(config, steps).values()) / GIGA


# ── Timing and memory ────────────────────────────────────────


def measure_throughput(
    step: Callable[[], object],
    n_steps: int,
    warmup_steps: int = 1,
    repeats: int = 3,
) -> float:
    """Median steps per second over ``repeats`` timed runs of ``n_steps`` calls.

    Every repetition first makes ``warmup_steps`` untimed calls.
    """
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    rates = []
    for _ in range(repeats):
        for _ in range(warmup_steps):
            step()
        start = time.perf_counter()
        for _ in range(n_steps):
            step()
        rates.append(n_steps / (time.perf_counter() - start))
    return statistics.median(rates)


def measure_latency(forward: Callable[[], object], repeats: int = 5, warmup: int = 1) -> float:
    """Median seconds per call."""
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    for _ in range(warmup):
        forward()
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        forward()
        times.append(time.perf_counter() - start)
    return statistics.median(times)


def track_peak_memory(run: Callable[[], object]) -> int:
    """Largest number of simultaneously live tensor bytes allocated by ``run``."""
    with tracking_memory() as tracker:
        run()
    return tracker.peak_bytes


# ── Reports ──────────────────────────────────────────────────


@dataclass
class BenchReport:
    task: str
    model: str
    quality: float
    flops_g: float
    steps_per_sec: float
    peak_bytes: int
    params: int
    seed: int

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, (int, float)) and value < 0:
                raise ValueError(f"{f.name} must be non-negative, got {value}")


REPORT_FIELDS = [f.name for f in fields(BenchReport)]


def append_report_csv(path: str, reports: list[BenchReport]) -> None:
    """Add rows to ``path``; a new file starts with the units comment and the header."""
    existing = ""
    if os.path.exists(path):
        with open(path, encoding="utf-8") as f:
            existing = f.read()
    buffer = io.StringIO()
    if not existing:
        buffer.write(REPORT_COMMENT + "\n")
    writer = csv.DictWriter(buffer, fieldnames=REPORT_FIELDS, lineterminator="\n")
    if not existing:
        writer.writeheader()
    for report in reports:
        writer.writerow(asdict(report))
    atomic_write_text(path, existing + buffer.getvalue())


def read_report_csv(path: str) -> list[BenchReport]:
    with open(path, encoding="utf-8") as f:
        lines = [line for line in f if not line.startswith("#")]
    rows = []
    for row in csv.DictReader(lines):
        rows.append(BenchReport(
            task=row["task"],
            model=row["model"],
            quality=float(row["quality"]),
            flops_g=float(row["flops_g"]),
            steps_per_sec=float(row["steps_per_sec"]),
            peak_bytes=int(row["peak_bytes"]),
            params=int(row["params"]),
            seed=int(row["seed"]),
        ))
    return rows
