"""Subcommand handlers; each takes the parsed ``argparse`` namespace."""

from .ablate import run_ablate
from .bench_cmd import run_bench_command
from .eval_cmd import run_eval
from .gen_data import run_gen_data
from .train import run_train

__all__ = ["run_ablate", "run_bench_command", "run_eval", "run_gen_data", "run_train"]
