"""CLI interface for the Kraus dilation simulator."""

from __future__ import annotations

import importlib
import os
import sys
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Sequence, Union

import rich.traceback
import rich_click as click
from rich.console import Console

from kraus_dilation.core.exceptions import ConfigInvalid, ModelNotFound, SimulationError
from kraus_dilation.utils.logging import configure_logging, get_logger, set_debug

if TYPE_CHECKING:
    from kraus_dilation.core.experiment import Experiment


console = Console()
logger = get_logger(__name__)

BUILTIN_EXPERIMENTS = "kraus_dilation.experiments"
PLUGIN_GROUP = "kraus_dilation.plugins.experiments"


def exit_code_for(error: SimulationError) -> int:
    return 2 if isinstance(error, (ConfigInvalid, ModelNotFound)) else 1


class ExperimentGroup(click.RichGroup):
    _current_plugin: Optional[str] = None
    _loading_from_plugins: bool = False
    _plugins_loaded: bool = False
    _failed_plugin_entry_points: set[tuple[str, Exception]] = set()
    _experiment_collisions: set[tuple[str, str, str]] = set()
    _completion_mode: bool  # if set, don't log errors

    loaded_from_plugins: dict[str, str] = {}
    experiment_sources: dict[str, set[Optional[str]]] = {}

    def __init__(
        self,
        name: Optional[str] = None,
        commands: Optional[
            Union[Dict[str, click.Command], Sequence[click.Command]]
        ] = None,
        **attrs: Any,
    ):
        super().__init__(name=name, commands=commands, **attrs)
        self._completion_mode = "_KRAUS_DILATION_COMPLETE" in os.environ

    def _load_plugins(self) -> None:
        from importlib.metadata import entry_points

        # built-in commands register themselves on first import
        self._current_plugin = None
        importlib.import_module(BUILTIN_EXPERIMENTS)

        self._loading_from_plugins = True
        for cmd in self.loaded_from_plugins.keys():
            self.commands.pop(cmd, None)
        self.loaded_from_plugins.clear()
        self._failed_plugin_entry_points.clear()
        self._experiment_collisions.clear()

        plugin_entry_points = entry_points().select(group=PLUGIN_GROUP)
        for entry_point in sorted(plugin_entry_points, key=lambda e: e.module):
            self._current_plugin = entry_point.module

            # unload target module and all its children
            for m in [
                k
                for k in sys.modules.keys()
                if k == entry_point.module or k.startswith(entry_point.module + ".")
            ]:
                sys.modules.pop(m)

            try:
                entry_point.load()
            except Exception as e:
                self._failed_plugin_entry_points.add((entry_point.module, e))
                if not self._completion_mode:
                    logger.error(
                        f"Failed to load experiments from plugin module '{entry_point.module}': {e}"
                    )

        self._loading_from_plugins = False
        self._current_plugin = None

    def add_command(self, cmd: click.Command, name: Optional[str] = None) -> None:
        name = name or cmd.name
        assert name is not None

        self.experiment_sources.setdefault(name, set()).add(self._current_plugin)

        if self._loading_from_plugins and name in self.commands:
            prev = (
                f"plugin module '{self.loaded_from_plugins[name]}'"
                if name in self.loaded_from_plugins
                else "built-in"
            )
            current = f"plugin module '{self._current_plugin}'"
            self._experiment_collisions.add((name, prev, current))
            if not self._completion_mode:
                logger.warning(
                    f"Experiment '{name}' already loaded from {prev}. "
                    f"Second load from '{self._current_plugin}' will be ignored."
                )
            return

        super().add_command(cmd, name)
        if self._loading_from_plugins:
            self.loaded_from_plugins[name] = self._current_plugin  # type: ignore[assignment]

    def get_command(
        self,
        ctx: click.Context,
        cmd_name: str,
        force_load_plugins: bool = False,
    ) -> Optional[click.Command]:
        if not self._plugins_loaded or force_load_plugins:
            self._load_plugins()
            self._plugins_loaded = True
        return self.commands.get(cmd_name)

    def list_commands(
        self,
        ctx: click.Context,
        force_load_plugins: bool = False,
    ) -> List[str]:
        if not self._plugins_loaded or force_load_plugins:
            self._load_plugins()
            self._plugins_loaded = True
        return sorted(self.commands)

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except SimulationError as e:
            click.echo(e.to_line(), err=True)
            ctx.exit(exit_code_for(e))


def list_experiments(ctx: click.Context, group: ExperimentGroup) -> None:
    """Display all available experiments in a formatted table."""
    from rich.table import Table

    names = group.list_commands(ctx, force_load_plugins=True)

    table = Table(title="Available Experiments", show_header=True, header_style="bold magenta")
    table.add_column("Experiment", style="cyan", no_wrap=True)
    table.add_column("Source", style="dim")
    table.add_column("Description", style="white")

    for name in names:
        cmd = group.commands[name]
        source = "built-in"
        if name in group.loaded_from_plugins:
            source = f"plugin: {group.loaded_from_plugins[name]}"

        description = (cmd.help or "").split("\n")[0].strip()
        sources = group.experiment_sources.get(name, set())
        if len(sources) > 1:
            listed = [s if s else "built-in" for s in sources]
            description += f" [yellow](⚠ Multiple sources: {', '.join(sorted(listed))})[/yellow]"

        table.add_row(name, source, description)

    if group._failed_plugin_entry_points:
        console.print("\n[yellow]Warning: Some plugins failed to load:[/yellow]")
        for module, error in group._failed_plugin_entry_points:
            console.print(f"  • {module}: {error}")

    if group._experiment_collisions:
        console.print("\n[yellow]Warning: Some experiments were registered twice:[/yellow]")
        for name, prev, current in sorted(group._experiment_collisions):
            console.print(f"  • {name}: kept {prev}, ignored {current}")

    console.print(table)
    console.print(f"\n[dim]Total experiments available: {len(names)}[/dim]")
    console.print("\n[dim]Run an experiment with: kraus-dilation <experiment> [options][/dim]")


@click.group(cls=ExperimentGroup, invoke_without_command=True)
@click.option(
    "--config",
    "config_file",
    type=click.Path(dir_okay=False, path_type=Path),
    help="Run configuration file (.json, .yaml) supplying defaults for command options",
)
@click.option(
    "--verbose",
    "-v",
    is_flag=True,
    help="Enable verbose logging (debug level)"
)
@click.option(
    "--no-progress",
    is_flag=True,
    help="Disable the live step table during execution"
)
@click.option(
    "--list",
    "-l",
    "list_",
    is_flag=True,
    help="List all available experiments"
)
@click.pass_context
def main(ctx: click.Context, config_file: Optional[Path], verbose: bool, no_progress: bool, list_: bool):
    """Open quantum dynamics through Kraus operators and unitary dilations.

    Each command builds Kraus products of a Lindblad model, dilates them into
    unitaries and reads out populations or observables, next to classical
    reference integrations.
    """
    rich.traceback.install(console=console)
    configure_logging(console)

    if verbose:
        set_debug(True)
        console.print("[dim]Debug logging enabled[/dim]")

    if list_:
        group = ctx.command
        if not isinstance(group, ExperimentGroup):
            console.print("[red]Error: Cannot access experiment group[/red]")
            ctx.exit(1)

        list_experiments(ctx, group)
        ctx.exit(0)

    if ctx.invoked_subcommand is not None:
        from kraus_dilation.config import load_run_config

        ctx.ensure_object(dict)
        ctx.obj["name"] = ctx.invoked_subcommand
        ctx.obj["show_progress"] = not no_progress
        ctx.obj["console"] = console
        if config_file is not None:
            ctx.obj["run_config"] = load_run_config(config_file)


@main.result_callback()
def run_callback(experiment: Optional[Experiment], **kwargs):
    ctx = click.get_current_context()

    if experiment is None:
        click.echo(ctx.get_help())
        return

    console.print(f"[blue]Starting {experiment.name} experiment[/blue]")
    failed = False
    try:
        results, formatted_results = experiment.execute()
    except SimulationError:
        raise
    except KeyboardInterrupt:
        console.print("\n[yellow]Experiment interrupted.[/yellow]")
        failed = True
    except Exception:
        console.print_exception()
        failed = True
    if failed:
        ctx.exit(1)

    output = experiment.get_context("output")
    if output:
        formatted_results.export(Path(output))
        console.print(f"[green]Results written to:[/green] {output}")
    else:
        formatted_results.pretty_print(console)


if __name__ == "__main__":
    main()
