"""Interactive prompts powered by questionary + Rich headers."""

import sys

import questionary
from rich.text import Text

from .i18n import t
from .theme import ACCENT, MUTED, OK, Q_STYLE, WARN, console

_FIELD_NUM = ["❶", "❷", "❸", "❹", "❺", "❻", "❼", "❽", "❾", "❿"]
_QMARK = "      ▸"


def _field_header(number: int, label: str):
    badge = _FIELD_NUM[number - 1] if number <= len(_FIELD_NUM) else f"({number})"
    console.print(Text.assemble((f" {badge}  ", f"bold {ACCENT}"), (label, "bold bright_white")))


def _cancelled():
    console.print(f"\n  [{WARN}]{t('common.cancelled')}[/]")
    sys.exit(0)


def _accepted(display: str):
    console.print(f"      [bold {OK}]✔[/] [green]{display}[/green]")
    console.print()


def ask_field(number: int, label: str, hint: str = "", default: str = "", validate=None) -> str:
    """Free-text field."""
    _field_header(number, label)
    if hint:
        console.print(f"      [{MUTED}]{hint}[/]")
    kwargs = dict(message="", default=default, qmark=_QMARK, style=Q_STYLE)
    if validate is not None:
        kwargs["validate"] = validate
    value = questionary.text(**kwargs).ask()
    if value is None:
        _cancelled()
    _accepted(value)
    return value


def ask_int_field(number: int, label: str, default: int, minimum: int = 1, hint: str = "") -> int:
    """Integer field, re-asked until the value is at least ``minimum``."""

    def _validate(val: str) -> bool | str:
        if val.strip().isdigit() and int(val) >= minimum:
            return True
        return t("prompts.int_invalid", minimum=minimum)

    return int(ask_field(number, label, hint=hint, default=str(default), validate=_validate))


def ask_select_field(number: int, label: str, choices: list[tuple[str, str]], hint: str = "",
                     default: str | None = None) -> str:
    """Single select over ``(value, display)`` pairs; returns the value."""
    _field_header(number, label)
    if hint:
        console.print(f"      [{MUTED}]{hint}[/]")
    q_choices = [questionary.Choice(title=display, value=value) for value, display in choices]
    selected = questionary.select(
        message="",
        choices=q_choices,
        default=default,
        qmark=_QMARK,
        style=Q_STYLE,
    ).ask()
    if selected is None:
        _cancelled()
    _accepted(next(d for v, d in choices if v == selected))
    return selected


def confirm_action(question: str, default: bool = True) -> bool:
    """Styled yes/no confirmation."""
    console.print()
    result = questionary.confirm(message=question, default=default, qmark="  ▸", style=Q_STYLE).ask()
    if result is None:
        _cancelled()
    return result
