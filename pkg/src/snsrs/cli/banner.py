"""Run summary panel for the snsrs CLI."""

from typing import Any

from rich.console import Console
from rich.panel import Panel
from rich.text import Text

from snsrs.config.models import RunConfig

TAGLINE = "SNS twin-field QKD key rates with redundant space"


def _append(content: Text, label: str, value: str, style: str) -> None:
    if content:
        content.append("\n")
    content.append(f"{label:<12} ", style="dim")
    content.append(value, style=style)


def print_run_panel(
    console: Console,
    command: str,
    config: RunConfig | None,
    options: dict[str, Any],
    seed: int,
) -> None:
    """Display the command, device and run options in a panel.

    Args:
        console: Console to print on (the CLI uses standard error)
        command: Subcommand name
        config: Base configuration, if the command has one
        options: Resolved command options
        seed: Root seed
    """
    content = Text()
    _append(content, "Command:", command, "bright_green bold")
    if config is not None:
        channel = config.channel
        _append(
            content,
            "Device:",
            f"d={channel.dark:g}  eta0={channel.eta0:g}  E_d={channel.e_mis:g}",
            "bright_blue",
        )
        _append(content, "Windows:", f"N={config.protocol.n_windows:.3g}", "bright_blue")
    for key in ("distances", "m_values", "trials", "budget", "sigma"):
        if key in options and options[key] is not None:
            value = options[key]
            rendered = ", ".join(f"{v:g}" for v in value) if isinstance(value, list) else f"{value}"
            _append(content, f"{key}:", rendered, "bright_magenta")
    if "asymptotic" in options:
        mode = "asymptotic" if options["asymptotic"] else "finite-key"
        _append(content, "Analysis:", mode, "bright_cyan bold")
    _append(content, "Seed:", str(seed), "yellow")

    console.print(
        Panel(
            content,
            title=f"[bold bright_white]{TAGLINE}[/bold bright_white]",
            border_style="bright_cyan",
            padding=(1, 2),
            expand=False,
        )
    )
