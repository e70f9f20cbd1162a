"""Formatting utilities for trajectories and reports."""

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Sequence

if TYPE_CHECKING:
    from rich.console import Console


def format_float(value: float) -> str:
    """Shortest round-tripping text for a float; ``-0.0`` becomes ``0.0``."""
    value = float(value)
    if value == 0.0:
        value = 0.0
    return repr(value)


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_float(value)
    if hasattr(value, "item"):
        # numpy scalar
        return format_value(value.item())
    return str(value)


def render_csv(fields: Sequence[str], rows: Sequence[Dict[str, Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(fields), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({name: format_value(row.get(name)) for name in fields})
    return buffer.getvalue()


def _json_default(value: Any) -> Any:
    if hasattr(value, "tolist"):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def render_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n"


def atomic_write_text(path: Path, text: str) -> None:
    """Write ``text`` to a temporary file next to ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return format_value(value)


def print_trajectory(
    fields: Sequence[str],
    rows: Sequence[Dict[str, Any]],
    console: "Console",
    title: str = "Trajectory",
    max_rows: Optional[int] = 40,
) -> None:
    """Print trajectory rows as a table, eliding the middle of long runs."""
    from rich.table import Table

    table = Table(title=title, show_header=True, header_style="bold cyan")
    for name in fields:
        table.add_column(name, justify="left" if name == "mode" else "right")

    shown: List[Optional[Dict[str, Any]]] = list(rows)
    if max_rows is not None and len(rows) > max_rows:
        half = max_rows // 2
        shown = [*rows[:half], None, *rows[-half:]]
    for row in shown:
        if row is None:
            table.add_row(*("..." for _ in fields), style="dim")
        else:
            table.add_row(*(_cell(row.get(name)) for name in fields))
    console.print(table)


def print_key_values(data: Dict[str, Any], console: "Console", title: str = "Result") -> None:
    from rich.table import Table

    table = Table(title=title, show_header=True)
    table.add_column("Key", style="cyan")
    table.add_column("Value")
    for key, value in data.items():
        table.add_row(key, _cell(value))
    console.print(table)


def print_terms(terms: Sequence[Dict[str, Any]], console: "Console", limit: int = 20) -> None:
    """Print the heaviest terms of a term report."""
    from rich.table import Table

    heaviest = sorted(terms, key=lambda t: t["weight"], reverse=True)[:limit]
    table = Table(title=f"Top {len(heaviest)} of {len(terms)} terms by weight")
    table.add_column("Word", style="cyan")
    table.add_column("Weight", justify="right")
    table.add_column("|T|_F", justify="right")
    table.add_column("Raw", justify="right")
    for term in heaviest:
        word = " ".join(f"M{i}" for i in term["word"]) or "I"
        table.add_row(
            word,
            f"{term['weight']:.4g}",
            f"{term['frobenius_norm']:.4g}",
            str(term["multiplicity"]),
        )
    console.print(table)
