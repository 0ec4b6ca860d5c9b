"""Run configuration: dataclass tree, dict parsing, auto-resolution and validation."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any

from .errors import ConfigError

TASKS = ("conversations", "listops", "text", "retrieval")
MODELS = ("cnn_large", "cnn_small", "cnn_lra", "cnn_custom", "full_attention")
PARADIGMS = ("mtl", "stl_conv", "stl_utt")
OPTIMIZERS = ("sgd", "adam")
SCHEDULES = ("one_cycle", "warmup_linear")
PRECISIONS = ("f32", "f64")
AUTO = "auto"

# Desk-scale data defaults per task; any of them can be set explicitly.
TASK_DATA_DEFAULTS: dict[str, dict[str, Any]] = {
    "conversations": {"mean_length": 252.0, "sd_length": 92.0, "max_length": 1024},
    "text": {"mean_length": 1296.0, "sd_length": 893.0, "max_length": 4096},
    "listops": {"mean_length": None, "sd_length": None, "max_length": 2000},
    "retrieval": {"mean_length": 1024.0, "sd_length": 0.0, "max_length": 1024},
}


@dataclass
class OptimConfig:
    optimizer: str = AUTO
    schedule: str = AUTO
    max_lr: Any = AUTO
    momentum: float = 0.9
    weight_decay: Any = AUTO
    warmup_fraction: float = 0.3
    div_factor: float = 25.0
    final_div_factor: float = 1e4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass
class ArchConfig:
    """Convolutional encoder settings; ``kernel_sizes``/``filters`` apply to ``cnn_custom``."""

    embedding_dim: int = 64
    kernel_sizes: list = field(default_factory=lambda: [9, 13])
    filters: list = field(default_factory=lambda: [8, 16, 32])
    dilations: Any = None
    padding_mode: str = "bidirectional"
    dropout: float = 0.1
    cross_feed: bool = True
    retrieval_kernel: int = 17
    embedding_file: Any = None


@dataclass
class AttentionArchConfig:
    layers: int = 2
    model_dim: int = 64
    heads: int = 2
    ff_dim: int = 128
    max_len: int = 4096
    dropout: float = 0.1


@dataclass
class DataConfig:
    dir: Any = None
    seed: int = 0
    n_examples: int = 2000
    vocab_size: int = 256
    num_conv_labels: int = 10
    num_utt_labels: int = 30
    mean_length: Any = None
    sd_length: Any = None
    max_length: Any = None
    label_skew: float = 0.0
    utterance_label_rate: float = 0.3
    listops_max_depth: int = 2
    listops_max_args: int = 5
    signature_size: int = 6


@dataclass
class BenchConfig:
    models: list = field(default_factory=lambda: ["cnn_lra", "full_attention"])
    lengths: list = field(default_factory=lambda: [512, 1024, 2048, 4096])
    batch_size: int = 2
    n_steps: int = 3
    warmup_steps: int = 1
    repeats: int = 3
    inference: bool = False
    inference_batch_size: int = 8
    kernels: list = field(default_factory=lambda: [17, 21, 65, 129, 257, 513])


@dataclass
class RunConfig:
    task: str = "conversations"
    model: str = "cnn_small"
    paradigm: str = "mtl"
    seed: int = 0
    seeds: list = field(default_factory=list)
    total_steps: int = 300
    batch_size: int = 8
    eval_batch_size: int = 16
    utt_weight: float = 1.0
    threshold: float = 0.5
    precision: str = "f32"
    out_dir: str = "runs"
    log_every: int = 10
    optim: OptimConfig = field(default_factory=OptimConfig)
    arch: ArchConfig = field(default_factory=ArchConfig)
    attention: AttentionArchConfig = field(default_factory=AttentionArchConfig)
    data: DataConfig = field(default_factory=DataConfig)
    bench: BenchConfig = field(default_factory=BenchConfig)

    @property
    def run_name(self) -> str:
        return f"{self.task}-{self.model}-{self.paradigm}"

    @property
    def seed_list(self) -> list[int]:
        return list(self.seeds) or [self.seed]

    @property
    def is_attention(self) -> bool:
        return self.model == "full_attention"

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


# ── Parsing ──────────────────────────────────────────────────


def _type_error(path: str, default: Any, value: Any) -> str | None:
    """Check ``value`` against the kind of the field's default."""
    if default is None or default == AUTO:
        return None
    if isinstance(default, bool):
        ok = isinstance(value, bool)
        kind = "a boolean"
    elif isinstance(default, int):
        ok = isinstance(value, int) and not isinstance(value, bool)
        kind = "an integer"
    elif isinstance(default, float):
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        kind = "a number"
    elif isinstance(default, str):
        ok = isinstance(value, str)
        kind = "a string"
    elif isinstance(default, list):
        ok = isinstance(value, list)
        kind = "a list"
    else:
        return None
    return None if ok else f"{path}: expected {kind}, got {value!r}"


def _build(cls, data: dict, path: str, errors: list[str]):
    if not isinstance(data, dict):
        errors.append(f"{path or 'config'}: expected a mapping, got {type(data).__name__}")
        return cls()
    instance = cls()
    known = {f.name: f for f in dataclasses.fields(cls)}
    for key, value in data.items():
        where = f"{path}.{key}" if path else str(key)
        if key not in known:
            errors.append(f"{where}: unknown key")
            continue
        default = getattr(instance, key)
        if dataclasses.is_dataclass(default):
            setattr(instance, key, _build(type(default), value, where, errors))
            continue
        problem = _type_error(where, default, value)
        if problem:
            errors.append(problem)
            continue
        if isinstance(default, float) and isinstance(value, int):
            value = float(value)
        setattr(instance, key, value)
    return instance


def config_from_dict(data: dict | None) -> RunConfig:
    """Parse a nested mapping; every unknown key and wrong type is reported with its path."""
    errors: list[str] = []
    cfg = _build(RunConfig, data or {}, "", errors)
    if errors:
        raise ConfigError(errors)
    return cfg


# ── Resolution and validation ────────────────────────────────


def resolve_config(cfg: RunConfig) -> RunConfig:
    """Replace every ``auto``/unset value with its concrete default."""
    cfg = dataclasses.replace(
        cfg,
        optim=dataclasses.replace(cfg.optim),
        data=dataclasses.replace(cfg.data),
    )
    attention = cfg.is_attention
    o = cfg.optim
    if o.optimizer == AUTO:
        o.optimizer = "adam" if attention else "sgd"
    if o.schedule == AUTO:
        o.schedule = "warmup_linear" if attention else "one_cycle"
    if o.max_lr == AUTO:
        o.max_lr = 1e-4 if attention else 0.01
    if o.weight_decay == AUTO:
        o.weight_decay = 0.01 if o.optimizer == "adam" else 0.0
    d = cfg.data
    for key, value in TASK_DATA_DEFAULTS.get(cfg.task, {}).items():
        if getattr(d, key) is None:
            setattr(d, key, value)
    return cfg


def _positive(errors: list[str], path: str, value: Any) -> None:
    if isinstance(value, (int, float)) and not isinstance(value, bool) and value <= 0:
        errors.append(f"{path}: must be positive, got {value}")


def _choice(errors: list[str], path: str, value: Any, allowed: tuple[str, ...]) -> None:
    if value not in allowed:
        errors.append(f"{path}: must be one of {', '.join(allowed)}; got {value!r}")


def validate_config(cfg: RunConfig) -> list[str]:
    """All problems of a resolved config, one ``path: message`` string each."""
    errors: list[str] = []
    _choice(errors, "task", cfg.task, TASKS)
    _choice(errors, "model", cfg.model, MODELS)
    _choice(errors, "paradigm", cfg.paradigm, PARADIGMS)
    _choice(errors, "precision", cfg.precision, PRECISIONS)
    if cfg.task != "conversations" and cfg.paradigm != "mtl":
        errors.append(f"paradigm: {cfg.paradigm} only applies to the conversations task")
    for name in ("total_steps", "batch_size", "eval_batch_size", "log_every"):
        _positive(errors, name, getattr(cfg, name))
    if not all(isinstance(s, int) and not isinstance(s, bool) for s in cfg.seeds):
        errors.append(f"seeds: expected a list of integers, got {cfg.seeds!r}")
    if cfg.utt_weight < 0:
        errors.append(f"utt_weight: must be non-negative, got {cfg.utt_weight}")
    if not 0.0 < cfg.threshold < 1.0:
        errors.append(f"threshold: must be in (0, 1), got {cfg.threshold}")

    o = cfg.optim
    _choice(errors, "optim.optimizer", o.optimizer, OPTIMIZERS)
    _choice(errors, "optim.schedule", o.schedule, SCHEDULES)
    if not isinstance(o.max_lr, (int, float)) or o.max_lr <= 0:
        errors.append(f"optim.max_lr: must be a positive number, got {o.max_lr!r}")
    if not isinstance(o.weight_decay, (int, float)) or o.weight_decay < 0:
        errors.append(f"optim.weight_decay: must be a non-negative number, got {o.weight_decay!r}")
    if not 0.0 < o.warmup_fraction < 1.0:
        errors.append(f"optim.warmup_fraction: must be in (0, 1), got {o.warmup_fraction}")
    if not 0.0 <= o.momentum < 1.0:
        errors.append(f"optim.momentum: must be in [0, 1), got {o.momentum}")
    for name in ("div_factor", "final_div_factor", "eps"):
        _positive(errors, f"optim.{name}", getattr(o, name))

    a = cfg.arch
    _positive(errors, "arch.embedding_dim", a.embedding_dim)
    _positive(errors, "arch.retrieval_kernel", a.retrieval_kernel)
    _choice(errors, "arch.padding_mode", a.padding_mode, ("causal", "bidirectional"))
    if not 0.0 <= a.dropout < 1.0:
        errors.append(f"arch.dropout: must be in [0, 1), got {a.dropout}")
    if cfg.model == "cnn_custom":
        if len(a.kernel_sizes) not in (1, 2):
            errors.append(f"arch.kernel_sizes: expected 1 or 2 kernel sizes, got {a.kernel_sizes!r}")
        if not a.filters:
            errors.append("arch.filters: at least one layer is required")
        if a.dilations is not None and len(a.dilations) != len(a.filters):
            errors.append(f"arch.dilations: expected {len(a.filters)} values, got {a.dilations!r}")
        for value in list(a.kernel_sizes) + list(a.filters) + list(a.dilations or []):
            if not isinstance(value, int) or value < 1:
                errors.append(f"arch: kernel sizes, filters and dilations must be positive integers, got {value!r}")
                break

    t = cfg.attention
    for name in ("layers", "model_dim", "heads", "ff_dim", "max_len"):
        _positive(errors, f"attention.{name}", getattr(t, name))
    if t.heads > 0 and t.model_dim % t.heads:
        errors.append(f"attention.model_dim: {t.model_dim} is not divisible by heads={t.heads}")

    d = cfg.data
    for name in ("n_examples", "vocab_size", "num_conv_labels", "num_utt_labels", "max_length",
                 "listops_max_depth", "signature_size"):
        _positive(errors, f"data.{name}", getattr(d, name))
    if d.listops_max_args < 2:
        errors.append(f"data.listops_max_args: must be >= 2, got {d.listops_max_args}")
    if cfg.is_attention and isinstance(d.max_length, int) and d.max_length > t.max_len:
        errors.append(f"data.max_length: {d.max_length} exceeds attention.max_len={t.max_len}")

    b = cfg.bench
    for name in ("batch_size", "n_steps", "repeats", "inference_batch_size"):
        _positive(errors, f"bench.{name}", getattr(b, name))
    for m in b.models:
        _choice(errors, "bench.models", m, MODELS)
    if not b.kernels:
        errors.append("bench.kernels: at least one kernel size is required")
    return errors


def check_config(cfg: RunConfig) -> RunConfig:
    """Resolve and validate; raises ``ConfigError`` listing every problem."""
    cfg = resolve_config(cfg)
    errors = validate_config(cfg)
    if errors:
        raise ConfigError(errors)
    return cfg
