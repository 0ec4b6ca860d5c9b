"""Command-line parser and run-config loading from YAML files plus flag overrides."""

import argparse

import yaml

from .config import MODELS, PARADIGMS, PRECISIONS, TASKS, RunConfig, check_config, config_from_dict
from .errors import ConfigError


# ── Shared argument helpers ─────────────────────────────────────

def _add_lang_arg(parser: argparse.ArgumentParser) -> None:
    """Add --lang to a subparser so it works in any position.

    Uses SUPPRESS default so the subparser does not override a value
    already set by the root parser when --lang appears before the subcommand.
    """
    parser.add_argument("--lang", type=str, default=argparse.SUPPRESS,
                        help="Language code (e.g., en)")


def _add_run_args(parser: argparse.ArgumentParser) -> None:
    """Flags shared by every subcommand that builds a RunConfig."""
    _add_lang_arg(parser)
    parser.add_argument("--config", type=str,
                        help="Path to a YAML (or JSON) run config")
    parser.add_argument("--seed", type=int, help="Seed for initialisation and batch sampling")
    parser.add_argument("--out-dir", type=str, help="Output directory (default: runs)")
    parser.add_argument("--precision", choices=list(PRECISIONS), help="Floating-point width")
    parser.add_argument("--verbose", action="store_true", help="Show debug log records")
    model = parser.add_argument_group("Run options")
    model.add_argument("--task", choices=list(TASKS))
    model.add_argument("--model", choices=list(MODELS))
    model.add_argument("--paradigm", choices=list(PARADIGMS))
    model.add_argument("--steps", type=int, dest="total_steps", help="Training steps")
    model.add_argument("--batch-size", type=int)
    model.add_argument("--data-dir", type=str, help="Read train/valid/test JSON lines from here")


# ── Parser builder ──────────────────────────────────────────────

def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with subcommands.

    Global flag:  --lang
    Subcommands:  gen-data, train, eval, bench, ablate
    """
    parser = argparse.ArgumentParser(
        description="Dual-tower convolutional encoders against a full-attention baseline",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--lang", type=str, help="Language code (e.g., en)")

    subparsers = parser.add_subparsers(dest="command")

    gen_p = subparsers.add_parser("gen-data", help="Write a synthetic corpus as train/valid/test JSON lines")
    _add_run_args(gen_p)
    gen_p.add_argument("--n", type=int, dest="n_examples", help="Number of examples")

    train_p = subparsers.add_parser("train", help="Train, test and report one config (or a seed sweep)")
    _add_run_args(train_p)
    train_p.add_argument("--seeds", type=str, help="Comma-separated seeds for a sweep")
    train_p.add_argument("--yes", action="store_true", help="Skip interactive setup and confirmations")

    eval_p = subparsers.add_parser("eval", help="Re-evaluate a finished run directory")
    _add_lang_arg(eval_p)
    eval_p.add_argument("run_dir", help="A seed directory holding model.lcv and resolved_config.json")
    eval_p.add_argument("--split", choices=["train", "valid", "test"], default="test")
    eval_p.add_argument("--verbose", action="store_true")

    bench_p = subparsers.add_parser("bench", help="FLOPs, throughput and memory against sequence length")
    _add_run_args(bench_p)
    bench_p.add_argument("--lengths", type=str, help="Comma-separated sequence lengths")
    bench_p.add_argument("--inference", action="store_true",
                         help="Also time an eval-mode forward pass per length")

    ablate_p = subparsers.add_parser("ablate", help="Retrieval kernel-size sweep")
    _add_run_args(ablate_p)
    ablate_p.add_argument("--kernels", type=str, help="Comma-separated kernel sizes")

    return parser


# ── Config loading helpers ──────────────────────────────────────

def _int_list(text: str, flag: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError([f"{flag}: expected comma-separated integers, got {text!r}"]) from None


def _config_from_yaml(path: str) -> dict:
    """Parse a YAML config file into a plain mapping."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except FileNotFoundError:
        raise ConfigError([f"config file not found: {path}"]) from None
    except yaml.YAMLError as e:
        raise ConfigError([f"invalid YAML in {path}: {e}"]) from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError([f"config file must contain a YAML mapping, got {type(data).__name__}"])
    return data


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    """CLI flags win over file values."""
    for name in ("task", "model", "paradigm", "seed", "precision", "total_steps", "batch_size"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    if getattr(args, "out_dir", None):
        cfg.out_dir = args.out_dir
    if getattr(args, "data_dir", None):
        cfg.data.dir = args.data_dir
    if getattr(args, "n_examples", None) is not None:
        cfg.data.n_examples = args.n_examples
    if getattr(args, "seeds", None):
        cfg.seeds = _int_list(args.seeds, "--seeds")
    if getattr(args, "lengths", None):
        cfg.bench.lengths = _int_list(args.lengths, "--lengths")
    if getattr(args, "kernels", None):
        cfg.bench.kernels = _int_list(args.kernels, "--kernels")
    if getattr(args, "inference", False):
        cfg.bench.inference = True
    return cfg


def load_config(args) -> RunConfig:
    """Build the RunConfig for a subcommand from ``--config`` and flag overrides.

    The result is validated but left unresolved so that later edits (for
    example an interactive task change) still pick up the right defaults.
    """
    config_path = getattr(args, "config", None)
    data = _config_from_yaml(config_path) if config_path else {}
    cfg = _apply_overrides(config_from_dict(data), args)
    check_config(cfg)
    return cfg
