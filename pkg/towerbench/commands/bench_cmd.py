"""Cost against sequence length for each configured model."""

import os

from ..bench import BENCH_NAME, run_bench
from ..config import check_config
from ..config_loader import load_config
from ..i18n import t
from ..ui import counting_progress, info, ok, render_bench, section, step


def run_bench_command(args):
    cfg = check_config(load_config(args))
    b = cfg.bench
    section(t("commands.bench.title"))
    step(t("commands.bench.plan", models=", ".join(b.models), lengths=", ".join(map(str, b.lengths))))
    if b.inference:
        info(t("commands.bench.inference", batch=b.inference_batch_size))

    with counting_progress(t("commands.bench.progress"), len(b.models) * len(b.lengths)) as advance:
        rows = run_bench(cfg, on_row=lambda _row: advance())

    render_bench(rows)
    ok(t("commands.bench.done", path=os.path.join(cfg.out_dir, BENCH_NAME)))
