"""Write a synthetic corpus to disk."""

import json
import os

from ..config import check_config
from ..config_loader import load_config
from ..data.conversations import spec_dict
from ..data.io import write_split
from ..i18n import t
from ..theme import console
from ..training import generate_examples, generator_spec, split_examples
from ..ui import info, ok, section, step
from ..utils import atomic_write_text


def data_directory(cfg) -> str:
    return cfg.data.dir or os.path.join(cfg.out_dir, "data", cfg.task)


def run_gen_data(args):
    """Generate the configured task and write ``train/valid/test.jsonl``."""
    cfg = check_config(load_config(args))
    directory = data_directory(cfg)
    section(t("commands.gen_data.title", task=cfg.task))
    step(t("commands.gen_data.generating", n=cfg.data.n_examples, seed=cfg.data.seed))

    with console.status(t("commands.gen_data.working")):
        examples, oracle = generate_examples(cfg)
    splits = split_examples(examples)
    for name, part in splits.items():
        path = write_split(directory, cfg.task, name, part)
        info(t("commands.gen_data.wrote", path=path, count=len(part)))

    if oracle is not None:
        oracle.save(os.path.join(directory, "oracle.json"))
        atomic_write_text(os.path.join(directory, "generator.json"),
                          json.dumps(spec_dict(generator_spec(cfg)), indent=2) + "\n")
        info(t("commands.gen_data.oracle", path=directory))
    ok(t("commands.gen_data.done", path=directory))
