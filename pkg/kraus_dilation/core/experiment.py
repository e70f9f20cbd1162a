"""Base experiment infrastructure: ordered steps, shared context and a live status panel."""

import time
from abc import ABC, abstractmethod
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime
from functools import wraps
from typing import Any, Callable, Dict, List, Optional, Tuple, Type

import rich_click as click
from rich.console import Console
from rich.live import Live
from rich.panel import Panel
from rich.table import Table

from ..results import ExperimentResult
from ..utils.logging import get_logger
from .exceptions import ExperimentExecutionError, SimulationError

logger = get_logger(__name__)


def require_initialized(func):
    """Decorator to ensure __init__ was called on Experiment instances."""

    @wraps(func)
    def wrapper(self, *args, **kwargs):
        if isinstance(self, Experiment) and not getattr(self, "_init_called", False):
            raise RuntimeError(
                f"Experiment.__init__() was not called. "
                f"Make sure to call super().__init__(...) in {self.__class__.__name__}.__init__()"
            )
        return func(self, *args, **kwargs)

    return wrapper


@dataclass
class ExperimentStep:
    """One named unit of work; ``action`` receives the experiment and may return a detail string."""

    name: str
    action: Callable[["Experiment"], Any]
    condition: Optional[Callable[[Dict[str, Any]], bool]] = None


@dataclass
class StepExecutionInfo:
    """Information about a single step execution."""

    name: str
    duration: float  # in seconds
    status: str  # "completed", "skipped", "failed", "running"
    start_time: Optional[datetime] = None
    detail: str = ""


@dataclass
class ExperimentState:
    current_step: int = 0
    completed_steps: List[str] = field(default_factory=list)
    skipped_steps: List[str] = field(default_factory=list)
    context: Dict[str, Any] = field(default_factory=dict)
    errors: List[Dict[str, Any]] = field(default_factory=list)
    started_at: Optional[float] = None
    completed_at: Optional[float] = None
    step_info: Dict[int, StepExecutionInfo] = field(default_factory=dict)


class Experiment(ABC):
    """Base class for experiments run by the CLI."""

    name: str
    result_class: Type[ExperimentResult]
    steps: List[ExperimentStep]
    state: ExperimentState
    _init_called: bool

    def __init__(
        self,
        name: Optional[str] = None,
        result_class: Optional[Type[ExperimentResult]] = None,
        show_progress: Optional[bool] = None,
        console: Optional[Console] = None,
    ):
        """Initialize experiment.

        Args:
            name: Experiment name (defaults to the invoking CLI command)
            result_class: Result class built from the final context
            show_progress: Whether to show the live step table (default: True)
            console: Rich Console instance for coordinated output (optional)
        """
        ctx = click.get_current_context(silent=True)
        if ctx is None:
            cli: Dict[str, Any] = {}
        else:
            ctx.ensure_object(dict)
            cli = ctx.obj

        if "name" not in cli and name is None:
            raise ValueError("Experiment name is required")

        self.name = name or cli["name"]
        if result_class is None:
            raise ValueError("Experiment result class is required")
        self.result_class = result_class
        self.steps = []
        self.state = ExperimentState()
        self._show_progress = (
            show_progress if show_progress is not None else cli.get("show_progress", True)
        )
        self._console = console or cli.get("console")
        self._status_context: Optional[Live] = None
        self._current_step_name = ""
        self._init_called = True

    @abstractmethod
    def _setup_steps(self):
        """Setup experiment steps. Must be implemented by subclasses."""
        ...

    @require_initialized
    def add_step(
        self,
        name: str,
        action: Callable[["Experiment"], Any],
        condition: Optional[Callable[[Dict[str, Any]], bool]] = None,
        after_step: Optional[str] = None,
    ):
        """Add a step to the experiment.

        Args:
            name: Step name
            action: Callable run with the experiment; a returned string is shown as detail
            condition: Optional function that takes context and returns bool. Step is skipped if False.
            after_step: Optional step name after which to insert this step. If None, appends to end.
        """
        step = ExperimentStep(name=name, action=action, condition=condition)
        if after_step is None:
            self.steps.append(step)
        else:
            insert_pos = None
            for i, existing_step in enumerate(self.steps):
                if existing_step.name == after_step:
                    insert_pos = i + 1
                    break

            if insert_pos is None:
                raise ValueError(f"Step '{after_step}' not found in experiment")

            self.steps.insert(insert_pos, step)
        logger.debug(f"Added step '{name}' to experiment (after: {after_step})")

    @require_initialized
    def add_context(self, key: str, value: Any):
        """Add a context variable."""
        self.state.context[key] = value

    @require_initialized
    def get_context(self, key: str) -> Any:
        """Get a context variable."""
        return self.state.context.get(key)

    @require_initialized
    def execute(
        self, context: Optional[Dict[str, Any]] = None
    ) -> Tuple[Dict[str, Any], ExperimentResult]:
        """Execute the experiment.

        Returns:
            Tuple of (raw results dict, formatted ExperimentResult object)

        Raises:
            SimulationError: Re-raised from the failing step; other exceptions
                are wrapped in ``ExperimentExecutionError``.
        """
        self._setup_steps()
        logger.debug(f"Experiment '{self.name}' initialized with {len(self.steps)} steps")
        if context:
            self.state.context.update(context)
        self.state.started_at = time.perf_counter()

        with self._status_display():
            while self.state.current_step < len(self.steps):
                index = self.state.current_step
                step = self.steps[index]

                if step.condition is not None and not step.condition(self.state.context):
                    logger.info(
                        f"Skipping step {index + 1}/{len(self.steps)}: '{step.name}' (condition not met)"
                    )
                    self.state.skipped_steps.append(step.name)
                    self.state.step_info[index] = StepExecutionInfo(
                        name=step.name, duration=0.0, status="skipped"
                    )
                    self._update_status_display()
                    self.state.current_step += 1
                    continue

                logger.info(f"Executing step {index + 1}/{len(self.steps)}: '{step.name}'")
                self._current_step_name = step.name
                started = time.perf_counter()
                self.state.step_info[index] = StepExecutionInfo(
                    name=step.name, duration=0.0, status="running", start_time=datetime.now()
                )
                self._update_status_display()

                try:
                    detail = step.action(self)
                except Exception as e:
                    info = self.state.step_info[index]
                    info.status = "failed"
                    info.duration = time.perf_counter() - started
                    self.state.errors.append({"step": step.name, "error": str(e)})
                    self._update_status_display()
                    logger.error(f"Step '{step.name}' failed: {e}")
                    if isinstance(e, SimulationError):
                        raise
                    raise ExperimentExecutionError(self.name, step.name, e) from e

                info = self.state.step_info[index]
                info.status = "completed"
                info.duration = time.perf_counter() - started
                info.detail = detail if isinstance(detail, str) else ""
                self.state.completed_steps.append(step.name)
                self._update_status_display()
                self.state.current_step += 1

        self.state.completed_at = time.perf_counter()
        results = self._prepare_results()
        return results, self.format_results(results)

    def _prepare_results(self) -> Dict[str, Any]:
        return {
            "experiment": self.name,
            "completed_steps": self.state.completed_steps,
            "skipped_steps": self.state.skipped_steps,
            "errors": self.state.errors,
            "duration": (
                self.state.completed_at - self.state.started_at
                if self.state.started_at is not None and self.state.completed_at is not None
                else None
            ),
            "metadata": [
                {
                    "name": info.name,
                    "status": info.status,
                    "duration": info.duration,
                    "detail": info.detail,
                }
                for info in self.state.step_info.values()
            ],
        }

    def _update_status_display(self) -> None:
        if self._status_context:
            try:
                self._status_context.update(self._get_status_display())
            except Exception as e:
                logger.debug(f"Failed to update live display: {e}")

    def _format_duration(self, seconds: float) -> str:
        minutes = int(seconds // 60)
        secs = seconds % 60
        if minutes > 0:
            return f"{minutes:d}m {secs:05.2f}s"
        return f"{secs:.2f}s"

    def _get_status_display(self) -> Panel:
        table = Table(
            show_header=True,
            header_style="bold cyan",
            box=None,
            padding=(0, 1),
            width=80,
        )
        table.add_column("Step", no_wrap=True, width=30)
        table.add_column("Time", justify="right", width=12)
        table.add_column("Detail", width=34)

        for i, step in enumerate(self.steps):
            if i not in self.state.step_info:
                table.add_row(f"  {step.name}", "-", "", style="dim")
                continue
            info = self.state.step_info[i]
            if info.status == "completed":
                row_style, step_name = "green", f"✓ {step.name}"
            elif info.status == "skipped":
                row_style, step_name = "yellow", f"○ {step.name}"
            elif info.status == "running":
                row_style, step_name = "bright_cyan", f"⟳ {step.name}"
            else:
                row_style, step_name = "red", f"✗ {step.name}"

            if info.status == "running" and info.start_time:
                duration = self._format_duration(
                    (datetime.now() - info.start_time).total_seconds()
                )
            elif info.duration > 0:
                duration = self._format_duration(info.duration)
            else:
                duration = "-"
            table.add_row(step_name, duration, info.detail, style=row_style)

        done = len(self.state.completed_steps) + len(self.state.skipped_steps)
        title = f"{self.name}: {done}/{len(self.steps)} steps"
        if self._current_step_name:
            title = f"{title} - {self._current_step_name}"
        return Panel(table, title=title, border_style="blue", width=84)

    @contextmanager
    def _status_display(self):
        if self._show_progress and self._console:
            self._status_context = Live(
                self._get_status_display(),
                refresh_per_second=10,
                auto_refresh=True,
                console=self._console,
                transient=True,
                get_renderable=lambda: self._get_status_display(),
            )
            self._status_context.start()

        try:
            yield
        finally:
            if self._status_context:
                try:
                    self._status_context.stop()
                    self._console.print(self._get_status_display())
                except Exception as e:
                    logger.debug(f"Error stopping live display: {e}")
                finally:
                    self._status_context = None

    @require_initialized
    def format_results(self, results: Dict[str, Any]) -> ExperimentResult:
        """Build the experiment's result class from the final context."""
        return self.result_class.from_context(self.state.context, results)
