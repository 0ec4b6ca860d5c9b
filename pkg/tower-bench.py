#!/usr/bin/env python3
# /// script
# requires-python = ">=3.10"
# dependencies = ["rich>=13.9.0", "questionary>=2.1.0", "pyyaml>=6.0", "numpy>=1.26"]
# ///
"""
towerbench: dual-tower convolutional encoders against a full-attention baseline

Usage:
    uv run tower-bench.py gen-data --task conversations --out-dir runs
    uv run tower-bench.py train                            # interactive setup on a terminal
    uv run tower-bench.py train --config configs/desk_conversations.yaml
    uv run tower-bench.py train --config configs/desk_conversations.yaml --seeds 0,1,2,3
    uv run tower-bench.py eval runs/conversations-cnn_small-mtl/seed-0
    uv run tower-bench.py bench --config configs/lra_text.yaml --inference
    uv run tower-bench.py ablate --config configs/retrieval_ablation.yaml
"""

import os
import sys

# Timings assume one BLAS thread; must be set before numpy is imported.
for _var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

from rich.markup import escape

from towerbench.config_loader import build_parser
from towerbench.errors import ConfigError, TowerbenchError
from towerbench.i18n import init as i18n_init
from towerbench.i18n import t
from towerbench.ui import banner, fail, setup_logging


# ── Subcommand handlers ────────────────────────────────────────


def _run_gen_data(args) -> None:
    from towerbench.commands import run_gen_data
    run_gen_data(args)


def _run_train(args) -> None:
    from towerbench.commands import run_train
    run_train(args)


def _run_eval(args) -> None:
    from towerbench.commands import run_eval
    run_eval(args)


def _run_bench(args) -> None:
    from towerbench.commands import run_bench_command
    run_bench_command(args)


def _run_ablate(args) -> None:
    from towerbench.commands import run_ablate
    run_ablate(args)


_HANDLERS = {
    "gen-data": _run_gen_data,
    "train": _run_train,
    "eval": _run_eval,
    "bench": _run_bench,
    "ablate": _run_ablate,
}


# ── Main dispatch ───────────────────────────────────────────────


def main():
    parser = build_parser()
    args = parser.parse_args()
    handler = _HANDLERS.get(args.command)
    if handler is None:
        parser.print_help()
        sys.exit(1)

    i18n_init(getattr(args, "lang", None) or "en")
    setup_logging(getattr(args, "verbose", False))
    banner()
    handler(args)


if __name__ == "__main__":
    try:
        main()
    except KeyboardInterrupt:
        from towerbench.theme import console
        console.print(f"\n  [yellow]{t('common.interrupted')}[/yellow]")
        sys.exit(130)
    except SystemExit:
        raise
    except ConfigError as e:
        fail(t("common.config_errors"))
        for problem in e.errors:
            fail(f"  - {escape(problem)}")
        sys.exit(1)
    except TowerbenchError as e:
        fail(t("common.run_error", kind=type(e).__name__, error=escape(str(e))))
        sys.exit(1)
    except Exception as e:
        fail(t("common.unexpected_error", error=escape(str(e))))
        sys.exit(1)
