"""Interactive run setup for ``train`` when no config file is given."""

import dataclasses
import sys

from rich import box
from rich.align import Align
from rich.panel import Panel
from rich.table import Table

from .config import MODELS, PARADIGMS, PRECISIONS, TASKS, RunConfig
from .i18n import t
from .prompts import ask_int_field, ask_select_field, confirm_action
from .theme import ACCENT, HEADING, MUTED, TABLE_BOX, WARN, console
from .ui import section


def _choices(values, prefix: str) -> list[tuple[str, str]]:
    return [(v, t(f"{prefix}.{v}")) for v in values]


def _summary(cfg: RunConfig) -> Table:
    table = Table(
        title=t("configure.summary_title"),
        box=TABLE_BOX,
        border_style=ACCENT,
        title_style=HEADING,
        header_style="bold bright_white",
        padding=(0, 2),
        show_lines=True,
    )
    table.add_column(t("configure.col_setting"), style="white", min_width=22)
    table.add_column(t("configure.col_value"), style=f"bold {ACCENT}", min_width=20)
    table.add_row(t("configure.task"), cfg.task)
    table.add_row(t("configure.model"), cfg.model)
    if cfg.task == "conversations":
        table.add_row(t("configure.paradigm"), cfg.paradigm)
    table.add_row(t("configure.total_steps"), str(cfg.total_steps))
    table.add_row(t("configure.batch_size"), str(cfg.batch_size))
    table.add_row(t("configure.seed"), str(cfg.seed))
    table.add_row(t("configure.precision"), cfg.precision)
    table.add_row(t("configure.out_dir"), cfg.out_dir)
    return table


def run_configure(base: RunConfig) -> RunConfig:
    """Ask for the main run settings, starting from ``base``; loops until confirmed."""
    section(t("configure.title"))
    while True:
        console.print(Panel(f"[dim]{t('configure.intro')}[/dim]", box=box.ROUNDED,
                            border_style=MUTED, padding=(0, 2)))
        console.print()
        n = 1
        task = ask_select_field(n, t("configure.task"), _choices(TASKS, "configure.tasks"),
                                default=base.task)
        n += 1
        model = ask_select_field(n, t("configure.model"), _choices(MODELS, "configure.models"),
                                 hint=t("configure.model_hint"), default=base.model)
        n += 1
        paradigm = "mtl"
        if task == "conversations":
            paradigm = ask_select_field(n, t("configure.paradigm"), _choices(PARADIGMS, "configure.paradigms"),
                                        default=base.paradigm)
            n += 1
        total_steps = ask_int_field(n, t("configure.total_steps"), base.total_steps)
        n += 1
        batch_size = ask_int_field(n, t("configure.batch_size"), base.batch_size)
        n += 1
        seed = ask_int_field(n, t("configure.seed"), base.seed, minimum=0)
        n += 1
        precision = ask_select_field(n, t("configure.precision"), [(p, p) for p in PRECISIONS],
                                     default=base.precision)

        cfg = dataclasses.replace(
            base, task=task, model=model, paradigm=paradigm, total_steps=total_steps,
            batch_size=batch_size, seed=seed, precision=precision,
        )
        console.print()
        console.print(Align.center(_summary(cfg)))
        if confirm_action(t("configure.confirm")):
            return cfg
        if not confirm_action(t("configure.confirm_declined")):
            console.print(Panel(f"[yellow]{t('common.cancelled')}[/yellow]", border_style=WARN))
            sys.exit(0)
        console.print()
