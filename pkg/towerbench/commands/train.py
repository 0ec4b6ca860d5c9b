"""Train one config, or a seed sweep, and report."""

import os
import sys

from ..config import check_config
from ..config_loader import load_config
from ..configure import run_configure
from ..i18n import t
from ..prompts import confirm_action
from ..training import run_training
from ..ui import info, ok, render_reports, render_summary, section, step, training_progress


def _interactive(args) -> bool:
    return not getattr(args, "config", None) and not args.yes and sys.stdin.isatty()


def run_train(args):
    cfg = load_config(args)
    if _interactive(args):
        cfg = run_configure(cfg)
    cfg = check_config(cfg)

    run_root = os.path.join(cfg.out_dir, cfg.run_name)
    if os.path.isdir(run_root) and not args.yes and sys.stdin.isatty():
        if not confirm_action(t("commands.train.overwrite", path=run_root), default=False):
            info(t("common.cancelled"))
            return

    seeds = cfg.seed_list
    section(t("commands.train.title", name=cfg.run_name))
    step(t("commands.train.plan", steps=cfg.total_steps, batch=cfg.batch_size,
           seeds=", ".join(map(str, seeds)), optimizer=cfg.optim.optimizer,
           schedule=cfg.optim.schedule))

    with training_progress(t("commands.train.progress"), cfg.total_steps) as on_step:
        summary = run_training(
            cfg,
            on_step=on_step,
            on_seed=lambda seed: info(t("commands.train.seed", seed=seed)),
        )

    render_reports([r for result in summary.results for r in result.reports])
    if len(summary.results) > 1:
        render_summary(summary.summary())
    for result in summary.results:
        info(t("commands.train.saved", path=result.run_dir))
    ok(t("commands.train.done"))
