"""Console singleton, colour tokens for run output, and the prompt style."""

from questionary import Style as QStyle
from rich import box
from rich.console import Console

console = Console()

# status
ACCENT  = "cyan"
OK      = "green"
WARN    = "yellow"
ERR     = "red"
MUTED   = "dim white"
HEADING = "bold cyan"
BRAND   = "bold bright_cyan"

# metrics and costs in tables and progress bars
METRIC = "bold bright_white"
LOSS   = "magenta"
COST   = "bright_yellow"

TABLE_BOX = box.DOUBLE_EDGE

Q_STYLE = QStyle([
    ("qmark",       f"fg:ansi{ACCENT} bold"),
    ("question",    "fg:ansiwhite bold"),
    ("answer",      f"fg:ansi{ACCENT} bold"),
    ("pointer",     f"fg:ansi{ACCENT} bold"),
    ("highlighted", f"fg:ansi{ACCENT} bold"),
    ("selected",    f"fg:ansi{ACCENT}"),
    ("instruction", "fg:ansibrightblack"),
])
