"""Retrieval kernel-size sweep."""

import os

from ..bench import ABLATION_NAME, run_ablation
from ..config import check_config
from ..config_loader import load_config
from ..i18n import t
from ..ui import info, ok, render_ablation, section, step, training_progress


def run_ablate(args):
    cfg = check_config(load_config(args))
    kernels = cfg.bench.kernels
    section(t("commands.ablate.title"))
    step(t("commands.ablate.plan", kernels=", ".join(map(str, kernels)), steps=cfg.total_steps))

    with training_progress(t("commands.train.progress"), cfg.total_steps) as on_step:
        rows = run_ablation(
            cfg,
            on_step=on_step,
            on_kernel=lambda k: info(t("commands.ablate.kernel", k=k)),
        )

    render_ablation(rows)
    ok(t("commands.ablate.done", path=os.path.join(cfg.out_dir, ABLATION_NAME)))
