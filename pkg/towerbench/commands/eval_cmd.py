"""Re-evaluate a saved run."""

from ..i18n import t
from ..training import evaluate_run
from ..ui import ok, render_scores, section, step


def run_eval(args):
    section(t("commands.eval.title"))
    step(t("commands.eval.loading", path=args.run_dir))
    cfg, scores = evaluate_run(args.run_dir, args.split)
    render_scores(scores, t("commands.eval.scores", name=cfg.run_name, split=args.split))
    ok(t("commands.eval.done"))
