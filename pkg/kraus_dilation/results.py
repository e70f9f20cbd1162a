"""Modular result system for experiments."""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Sequence

from .utils.formatters import (
    atomic_write_text,
    print_key_values,
    print_terms,
    print_trajectory,
    render_csv,
    render_json,
)

if TYPE_CHECKING:
    from rich.console import Console


class ExperimentResult(ABC):
    """Base class for experiment results.

    Any result type that implements these methods can be used by the CLI.
    This allows each experiment to define its own result structure and formatting.
    """

    @classmethod
    @abstractmethod
    def from_context(
        cls, context: Dict[str, Any], raw_results: Dict[str, Any]
    ) -> "ExperimentResult":
        """Create a result instance from the experiment's final context.

        Args:
            context: Context dict populated by the experiment steps
            raw_results: Raw results dict from experiment execution

        Returns:
            An instance of the result class
        """
        ...

    @abstractmethod
    def pretty_print(self, console: "Console") -> None:
        """Print the result in a human-readable format to the console."""
        ...

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        """Convert the result to a dictionary for JSON serialization."""
        ...

    def render(self, path: Path) -> str:
        """Text written by ``export``; JSON of ``to_dict()`` unless overridden."""
        return render_json(self.to_dict())

    def export(self, path: Path) -> None:
        """Write the result atomically to ``path``."""
        atomic_write_text(Path(path), self.render(Path(path)))


class TrajectoryResult(ExperimentResult):
    """Rows of a time-resolved run, exported as CSV or JSON by file suffix."""

    def __init__(
        self,
        fields: Sequence[str],
        rows: List[Dict[str, Any]],
        metadata: Optional[Dict[str, Any]] = None,
        title: str = "Trajectory",
    ):
        self.fields = list(fields)
        self.rows = rows
        self.metadata = metadata or {}
        self.title = title

    @classmethod
    def from_context(
        cls, context: Dict[str, Any], raw_results: Dict[str, Any]
    ) -> "TrajectoryResult":
        return cls(
            context["fields"],
            context["rows"],
            context.get("metadata"),
            context.get("title", "Trajectory"),
        )

    def pretty_print(self, console: "Console") -> None:
        print_trajectory(self.fields, self.rows, console, title=self.title)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "fields": self.fields,
            "rows": [{name: row.get(name) for name in self.fields} for row in self.rows],
            "metadata": self.metadata,
        }

    def render(self, path: Path) -> str:
        if path.suffix == ".csv":
            return render_csv(self.fields, self.rows)
        return super().render(path)


class ReportResult(ExperimentResult):
    """A JSON report; the ``terms`` entry, when present, gets its own table."""

    def __init__(self, data: Dict[str, Any], title: str = "Report"):
        self.data = data
        self.title = title

    @classmethod
    def from_context(
        cls, context: Dict[str, Any], raw_results: Dict[str, Any]
    ) -> "ReportResult":
        return cls(context["report"], context.get("title", "Report"))

    def pretty_print(self, console: "Console") -> None:
        summary = {k: v for k, v in self.data.items() if k != "terms"}
        print_key_values(summary, console, title=self.title)
        if self.data.get("terms"):
            print_terms(self.data["terms"], console)

    def to_dict(self) -> Dict[str, Any]:
        return self.data
