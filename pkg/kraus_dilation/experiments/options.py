"""Click options shared by the experiment commands and their merge into a RunConfig."""

from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import rich_click as click
from pydantic import ValidationError

from ..config import RunConfig, config_invalid_from, default_dt_fs
from ..core.exceptions import ConfigInvalid
from ..utils.common import EstimationMode, NormKind

F = Callable[..., Any]


def _apply(options: List[Callable[[F], F]]) -> Callable[[F], F]:
    def decorator(f: F) -> F:
        for option in reversed(options):
            f = option(f)
        return f

    return decorator


def model_options(f: F) -> F:
    return _apply(
        [
            click.option(
                "--model",
                "model_file",
                type=click.Path(dir_okay=False),
                help="Lindblad model file (.json, .yaml)",
            ),
            click.option("--preset", type=str, help="Built-in model name (see README)"),
        ]
    )(f)


def step_options(f: F) -> F:
    return _apply(
        [
            click.option("--dt-fs", type=float, help="Time step in fs"),
            click.option("--dt-au", type=float, help="Time step in atomic units"),
            click.option("--steps", type=click.IntRange(min=0), help="Number of steps"),
            click.option("--total-t-fs", type=float, help="Total simulated time in fs"),
        ]
    )(f)


def pruning_options(f: F) -> F:
    return _apply(
        [
            click.option(
                "--threshold", type=click.FloatRange(min=0), help="Norm threshold for pruning terms [default: 0.01]"
            ),
            click.option(
                "--norm-kind",
                type=click.Choice([k.value for k in NormKind]),
                help="Matrix norm used for pruning [default: frobenius]",
            ),
        ]
    )(f)


def estimation_options(f: F) -> F:
    return _apply(
        [
            click.option("--shots", type=click.IntRange(min=1), help="Shots per term [default: 9216]"),
            click.option("--seed", type=click.IntRange(min=0), help="Random seed [default: 0]"),
            click.option(
                "--mode",
                type=click.Choice([m.value for m in EstimationMode]),
                help="exact amplitudes or sampled shots [default: exact]",
            ),
        ]
    )(f)


def initial_site_option(f: F) -> F:
    return click.option(
        "--initial-site",
        type=click.IntRange(min=0),
        help="Basis state holding the initial excitation [default: 1]",
    )(f)


def output_option(f: F) -> F:
    return click.option(
        "--output",
        "-o",
        type=click.Path(dir_okay=False, path_type=Path),
        help="Write results to this file (.csv or .json) instead of printing",
    )(f)


def build_run_config(command: str, **flags: Any) -> RunConfig:
    """Merge explicit flags over the ``--config`` file and validate.

    Raises:
        ConfigInvalid: On conflicting or out-of-range values.
    """
    ctx = click.get_current_context(silent=True)
    obj = (ctx.obj if ctx is not None else None) or {}
    base: Optional[RunConfig] = obj.get("run_config")
    values: Dict[str, Any] = base.model_dump(exclude_unset=True) if base else {}

    model_file = flags.pop("model_file", None)
    preset = flags.pop("preset", None)
    if model_file is not None and preset is not None:
        raise ConfigInvalid("give at most one of --model and --preset")
    if model_file is not None or preset is not None:
        values["model"] = model_file if model_file is not None else preset

    if flags.get("dt_fs") is not None or flags.get("dt_au") is not None:
        values.pop("dt_fs", None)
        values.pop("dt_au", None)

    values.update({key: value for key, value in flags.items() if value is not None})
    values["command"] = command
    try:
        return RunConfig.model_validate(values)
    except ValidationError as e:
        raise config_invalid_from(e, "command-line options")


def resolve_dt(
    config: RunConfig, source: Any = None, fallback: Optional[float] = None
) -> Optional[float]:
    """Explicit step, else the step of the preset named by ``source``, else ``fallback``."""
    dt = config.resolved_dt_fs()
    if dt is None:
        dt = default_dt_fs(source if source is not None else config.model)
    return dt if dt is not None else fallback


def resolve_steps(config: RunConfig, dt: Optional[float], default: int) -> int:
    """``--steps``, else ``--total-t-fs / dt`` when that is a whole number, else ``default``."""
    if config.steps is not None:
        return config.steps
    if config.total_t_fs is not None and dt is not None:
        ratio = config.total_t_fs / dt
        steps = round(ratio)
        if steps < 1 or abs(ratio - steps) > 1e-9 * max(1.0, ratio):
            raise ConfigInvalid(
                f"total_t_fs = {config.total_t_fs} is not a whole number of {dt} fs steps"
            )
        return steps
    return default
