from pathlib import Path

import pytest

from towerbench.config import RunConfig, check_config, config_from_dict, resolve_config, validate_config
from towerbench.config_loader import build_parser, load_config
from towerbench.errors import ConfigError

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def _errors(data):
    with pytest.raises(ConfigError) as info:
        config_from_dict(data)
    return info.value.errors


# ── Parsing ──────────────────────────────────────────────────


def test_empty_mapping_gives_defaults():
    assert config_from_dict(None) == RunConfig()
    assert config_from_dict({}) == RunConfig()


def test_nested_values_are_applied():
    cfg = config_from_dict({"task": "listops", "optim": {"max_lr": 0.5}, "arch": {"filters": [4, 8]}})
    assert cfg.task == "listops"
    assert cfg.optim.max_lr == 0.5
    assert cfg.arch.filters == [4, 8]


def test_unknown_keys_are_reported_with_their_path():
    errors = _errors({"colour": 1, "optim": {"lr": 0.1}, "data": {"seed": 1, "bogus": 2}})
    assert errors == ["colour: unknown key", "optim.lr: unknown key", "data.bogus: unknown key"]


def test_type_errors_are_reported_with_their_path():
    errors = _errors({"total_steps": "many", "arch": {"cross_feed": 1}, "bench": {"lengths": 512}})
    assert errors == [
        "total_steps: expected an integer, got 'many'",
        "arch.cross_feed: expected a boolean, got 1",
        "bench.lengths: expected a list, got 512",
    ]


def test_integers_widen_to_floats():
    cfg = config_from_dict({"utt_weight": 2})
    assert cfg.utt_weight == 2.0 and isinstance(cfg.utt_weight, float)


def test_section_must_be_a_mapping():
    assert _errors({"optim": [1, 2]}) == ["optim: expected a mapping, got list"]


# ── Resolution ───────────────────────────────────────────────


def test_cnn_resolves_to_sgd_one_cycle():
    o = resolve_config(RunConfig()).optim
    assert (o.optimizer, o.schedule, o.max_lr, o.weight_decay) == ("sgd", "one_cycle", 0.01, 0.0)


def test_attention_resolves_to_adam_warmup_linear():
    o = resolve_config(RunConfig(model="full_attention")).optim
    assert (o.optimizer, o.schedule, o.max_lr, o.weight_decay) == ("adam", "warmup_linear", 1e-4, 0.01)


def test_explicit_values_survive_resolution():
    cfg = config_from_dict({"optim": {"optimizer": "adam", "max_lr": 0.003}, "data": {"max_length": 64}})
    resolved = resolve_config(cfg)
    assert resolved.optim.optimizer == "adam"
    assert resolved.optim.weight_decay == 0.01
    assert resolved.optim.max_lr == 0.003
    assert resolved.data.max_length == 64


def test_resolution_does_not_touch_the_input():
    cfg = RunConfig(task="text")
    resolved = resolve_config(cfg)
    assert cfg.optim.optimizer == "auto"
    assert cfg.data.max_length is None
    assert resolved.data.max_length == 4096


# ── Validation ───────────────────────────────────────────────


def test_default_config_is_valid():
    assert validate_config(resolve_config(RunConfig())) == []


def test_validation_collects_every_problem():
    cfg = config_from_dict({
        "task": "text",
        "paradigm": "stl_utt",
        "total_steps": 0,
        "optim": {"momentum": 1.0},
        "attention": {"heads": 3},
    })
    with pytest.raises(ConfigError) as info:
        check_config(cfg)
    joined = "\n".join(info.value.errors)
    assert "paradigm: stl_utt only applies to the conversations task" in joined
    assert "total_steps: must be positive, got 0" in joined
    assert "optim.momentum" in joined
    assert "attention.model_dim: 64 is not divisible by heads=3" in joined


def test_attention_length_must_fit_positional_table():
    cfg = config_from_dict({"model": "full_attention", "task": "text", "attention": {"max_len": 512}})
    with pytest.raises(ConfigError, match="data.max_length"):
        check_config(cfg)


def test_custom_model_checks_its_layers():
    cfg = config_from_dict({"model": "cnn_custom", "arch": {"kernel_sizes": [3, 5, 7], "filters": [8, 0],
                                                            "dilations": [1]}})
    errors = validate_config(resolve_config(cfg))
    assert any(e.startswith("arch.kernel_sizes") for e in errors)
    assert any(e.startswith("arch.dilations") for e in errors)
    assert any("positive integers" in e for e in errors)


def test_unknown_choice_lists_the_options():
    errors = validate_config(resolve_config(RunConfig(model="lstm")))
    assert errors == ["model: must be one of cnn_large, cnn_small, cnn_lra, cnn_custom, full_attention; got 'lstm'"]


# ── Files and flags ──────────────────────────────────────────


@pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.yaml")), ids=lambda p: p.name)
def test_shipped_configs_are_valid(path):
    args = build_parser().parse_args(["train", "--config", str(path)])
    check_config(load_config(args))


def test_flags_override_the_file(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("task: listops\nmodel: cnn_small\ntotal_steps: 50\nseeds: [1, 2]\n")
    args = build_parser().parse_args([
        "train", "--config", str(path), "--model", "cnn_lra", "--steps", "7",
        "--seeds", "4,5,6", "--out-dir", "elsewhere", "--data-dir", "corpus",
    ])
    cfg = load_config(args)
    assert (cfg.task, cfg.model, cfg.total_steps) == ("listops", "cnn_lra", 7)
    assert cfg.seed_list == [4, 5, 6]
    assert cfg.out_dir == "elsewhere"
    assert cfg.data.dir == "corpus"


def test_loaded_config_stays_unresolved():
    args = build_parser().parse_args(["train", "--task", "text"])
    cfg = load_config(args)
    assert cfg.optim.optimizer == "auto"
    assert cfg.data.max_length is None


def test_bench_and_ablate_list_flags():
    cfg = load_config(build_parser().parse_args(["bench", "--lengths", "64,128", "--inference"]))
    assert cfg.bench.lengths == [64, 128]
    assert cfg.bench.inference
    cfg = load_config(build_parser().parse_args(["ablate", "--kernels", "17,21"]))
    assert cfg.bench.kernels == [17, 21]


def test_bad_integer_list():
    with pytest.raises(ConfigError, match="--seeds"):
        load_config(build_parser().parse_args(["train", "--seeds", "1,two"]))


@pytest.mark.parametrize(
    ("content", "message"),
    [
        ("task: [unclosed\n", "invalid YAML"),
        ("- a\n- b\n", "YAML mapping"),
    ],
)
def test_yaml_file_errors(tmp_path, content, message):
    path = tmp_path / "bad.yaml"
    path.write_text(content)
    with pytest.raises(ConfigError, match=message):
        load_config(build_parser().parse_args(["train", "--config", str(path)]))


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(build_parser().parse_args(["train", "--config", str(tmp_path / "absent.yaml")]))


def test_empty_yaml_file_means_defaults(tmp_path):
    path = tmp_path / "empty.yaml"
    path.write_text("")
    assert load_config(build_parser().parse_args(["train", "--config", str(path)])) == RunConfig()


def test_eval_takes_a_run_directory():
    args = build_parser().parse_args(["eval", "runs/x/seed-0", "--split", "valid"])
    assert (args.command, args.run_dir, args.split) == ("eval", "runs/x/seed-0", "valid")
