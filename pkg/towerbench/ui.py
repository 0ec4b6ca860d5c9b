"""UI primitives: banner, section headers, status lines, progress bars and result tables."""

from __future__ import annotations

import logging
from contextlib import contextmanager
from typing import Iterator, Sequence

from rich.align import Align
from rich.logging import RichHandler
from rich.panel import Panel
from rich.progress import (
    BarColumn,
    MofNCompleteColumn,
    Progress,
    SpinnerColumn,
    TextColumn,
    TimeElapsedColumn,
    TimeRemainingColumn,
)
from rich.rule import Rule
from rich.table import Table
from rich.text import Text

from . import __version__
from .i18n import t
from .theme import ACCENT, BRAND, COST, ERR, HEADING, LOSS, METRIC, MUTED, OK, TABLE_BOX, console


# ── Logging ──────────────────────────────────────────────────

def setup_logging(verbose: bool = False) -> None:
    """Route library log records through the shared console."""
    handler = RichHandler(console=console, show_path=False, markup=False, rich_tracebacks=True)
    root = logging.getLogger("towerbench")
    root.handlers[:] = [handler]
    root.setLevel(logging.DEBUG if verbose else logging.WARNING)
    root.propagate = False


# ── Banner ───────────────────────────────────────────────────

def banner():
    title = Text.assemble(
        ("tower", BRAND),
        ("bench", "bold white"),
        (f"  v{__version__}", MUTED),
    )
    console.print(Align.center(Panel(
        Align.center(Text.assemble(title, "\n", (t("banner.subtitle"), "bright_white"))),
        box=TABLE_BOX,
        border_style=ACCENT,
        padding=(1, 6),
    )))
    console.print()


# ── Section header ───────────────────────────────────────────

def section(title: str, index: int | None = None, total: int | None = None):
    """A rule plus a centred heading; ``index/total`` adds dot progress."""
    console.print()
    console.print(Rule(style=ACCENT))
    heading = Text(title, style="bold white")
    if index is not None and total is not None:
        dots = "● " * index + "○ " * (total - index)
        heading = Text.assemble((f"{index}/{total}", HEADING), ("  ", MUTED), heading,
                                ("   ", MUTED), (dots.strip(), ACCENT))
    console.print(Align.center(heading))
    console.print()


# ── Status messages ──────────────────────────────────────────

def step(text: str):
    console.print(f"  [bold {ACCENT}]⟐[/]  {text}")


def ok(text: str):
    console.print(f"  [bold {OK}]✔[/]  [green]{text}[/green]")


def fail(text: str):
    console.print(f"  [bold {ERR}]✘[/]  [red]{text}[/red]")


def info(text: str):
    console.print(f"  [{MUTED}]   ↳ {text}[/]")


# ── Progress bars ────────────────────────────────────────────

def _progress() -> Progress:
    return Progress(
        SpinnerColumn("dots", style=f"bold {ACCENT}"),
        TextColumn("[bold white]{task.description}[/]"),
        BarColumn(bar_width=40, style=MUTED, complete_style=ACCENT, finished_style=OK),
        MofNCompleteColumn(),
        TextColumn(f"[{LOSS}]{{task.fields[loss]}}[/]"),
        TimeElapsedColumn(),
        TimeRemainingColumn(),
        console=console,
        transient=False,
    )


@contextmanager
def training_progress(description: str, total: int) -> Iterator:
    """Yield an ``on_step(step, loss)`` callback that advances a progress bar.

    The bar restarts when the step index wraps to 0, so one bar serves a
    whole seed sweep.
    """
    with _progress() as progress:
        task = progress.add_task(description, total=total, loss="")

        def on_step(index: int, loss: float) -> None:
            if index == 0:
                progress.reset(task, total=total, loss="")
            progress.update(task, completed=index + 1, loss=f"{t('ui.loss')} {loss:.4f}")

        yield on_step


@contextmanager
def counting_progress(description: str, total: int) -> Iterator:
    """Yield an ``advance()`` callable for plain item counting."""
    with _progress() as progress:
        task = progress.add_task(description, total=total, loss="")
        yield lambda: progress.advance(task, 1)


# ── Tables ───────────────────────────────────────────────────

def _table(title: str, columns: Sequence[str]) -> Table:
    table = Table(
        title=title,
        title_style=HEADING,
        box=TABLE_BOX,
        border_style=ACCENT,
        padding=(0, 2),
    )
    for i, name in enumerate(columns):
        table.add_column(name, style=f"bold {ACCENT}" if i == 0 else "white",
                         justify="left" if i == 0 else "right")
    return table


def _bytes(n: int) -> str:
    for unit in ("B", "KiB", "MiB"):
        if n < 1024:
            return f"{n:.0f} {unit}" if unit == "B" else f"{n:.1f} {unit}"
        n /= 1024
    return f"{n:.2f} GiB"


def render_scores(scores: dict[str, float], title: str):
    table = _table(title, [t("ui.metric"), t("ui.value")])
    for metric, value in scores.items():
        table.add_row(metric, f"[{METRIC}]{value:.4f}[/]")
    console.print(Align.center(table))


def render_reports(reports: Sequence):
    """One row per ``BenchReport``."""
    table = _table(t("ui.report_title"), [
        t("ui.task"), t("ui.model"), t("ui.seed"), t("ui.quality"),
        t("ui.flops"), t("ui.steps_per_sec"), t("ui.peak"), t("ui.params"),
    ])
    for r in reports:
        table.add_row(
            r.task, r.model, str(r.seed), f"[{METRIC}]{r.quality:.4f}[/]",
            f"[{COST}]{r.flops_g:.4g}[/]", f"{r.steps_per_sec:.3g}",
            _bytes(r.peak_bytes), f"{r.params:,}",
        )
    console.print()
    console.print(Align.center(table))


def render_summary(summary: dict[str, str]):
    table = _table(t("ui.summary_title"), [t("ui.metric"), t("ui.mean_sd")])
    for metric, text in summary.items():
        table.add_row(metric, f"[{METRIC}]{text}[/]")
    console.print()
    console.print(Align.center(table))


def render_bench(rows: Sequence):
    table = _table(t("ui.bench_title"), [
        t("ui.model"), t("ui.length"), t("ui.flops"), t("ui.steps_per_sec"),
        t("ui.peak"), t("ui.params"), t("ui.latency"),
    ])
    for r in rows:
        table.add_row(
            r.model, str(r.length), f"[{COST}]{r.flops_g:.4g}[/]", f"{r.steps_per_sec:.3g}",
            _bytes(r.peak_bytes), f"{r.params:,}",
            "-" if r.latency_s is None else f"{r.latency_s * 1000:.1f} ms",
        )
    console.print()
    console.print(Align.center(table))


def render_ablation(rows: Sequence):
    table = _table(t("ui.ablation_title"), [
        "k", t("ui.receptive_field"), t("ui.flops"), t("ui.steps_per_sec"),
        t("ui.peak"), t("ui.accuracy"), t("ui.params"),
    ])
    for r in rows:
        table.add_row(
            str(r.kernel_size), str(r.receptive_field), f"[{COST}]{r.flops_g:.4g}[/]",
            f"{r.steps_per_sec:.3g}", _bytes(r.peak_bytes),
            f"[{METRIC}]{r.accuracy:.4f}[/]", f"{r.params:,}",
        )
    console.print()
    console.print(Align.center(table))
