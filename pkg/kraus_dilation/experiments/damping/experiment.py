"""Finite-temperature amplitude damping: naive closed-form Kraus set vs the iterated channel."""

from typing import Any, Dict, List

import rich_click as click

from kraus_dilation import experiment
from kraus_dilation.channels import (
    DensityMatrix,
    apply_channel,
    damping_channel,
    finite_temperature_ground_population,
    naive_finite_temperature_channel,
)
from kraus_dilation.core.exceptions import ConfigInvalid

from ..base import ModelExperiment
from ..options import (
    build_run_config,
    initial_site_option,
    output_option,
    resolve_dt,
    resolve_steps,
    step_options,
)

DEFAULT_GAMMA1 = 1.52e-2
DEFAULT_GAMMA2 = 0.5e-2
DEFAULT_STEPS = 50


@experiment.command(name="damping")
@click.option("--gamma1", type=click.FloatRange(min=0), default=DEFAULT_GAMMA1, show_default=True, help="Decay rate in fs^-1")
@click.option("--gamma2", type=click.FloatRange(min=0), default=DEFAULT_GAMMA2, show_default=True, help="Excitation rate in fs^-1")
@step_options
@initial_site_option
@output_option
def factory(gamma1: float, gamma2: float, **flags):
    """Compare ground populations of the naive and the iterated damping channels."""
    exp = DampingExperiment(build_run_config("damping", **flags))
    exp.gamma1 = gamma1
    exp.gamma2 = gamma2
    return exp


class DampingExperiment(ModelExperiment):
    """The naive set freezes the ground population at ``rho11(0)`` for long times;
    the iterated channel relaxes to ``gamma1 / (gamma1 + gamma2)``."""

    default_model = "finite-temperature-damping"
    title = "Ground population"

    gamma1: float = DEFAULT_GAMMA1
    gamma2: float = DEFAULT_GAMMA2

    def _setup_steps(self):
        self.add_step("compare_channels", DampingExperiment._compare)

    def _compare(self) -> str:
        config = self.config
        if config.initial_site not in (0, 1):
            raise ConfigInvalid(f"initial site must be 0 or 1, got {config.initial_site}")
        dt = resolve_dt(config, self.model_source)
        if dt is None:
            raise ConfigInvalid("a time step is required: pass --dt-fs or --dt-au")
        steps = resolve_steps(config, dt, DEFAULT_STEPS)
        rho0 = DensityMatrix.basis_state(2, config.initial_site)
        rho00 = float(rho0.matrix[0, 0].real)

        step_channel = damping_channel(self.gamma1 * dt, self.gamma2 * dt, dt=dt)
        iterated = rho0
        rows: List[Dict[str, Any]] = []
        for step in range(steps + 1):
            t = step * dt
            if step > 0:
                iterated = apply_channel(step_channel, iterated)
            naive = apply_channel(naive_finite_temperature_channel(self.gamma1, self.gamma2, t), rho0)
            rows.append(
                {
                    "t_fs": t,
                    "rho00_naive": float(naive.matrix[0, 0].real),
                    "rho00_iterated": float(iterated.matrix[0, 0].real),
                    "rho00_exact": finite_temperature_ground_population(
                        self.gamma1, self.gamma2, t, rho00
                    ),
                }
            )
        fields = ["t_fs", "rho00_naive", "rho00_iterated", "rho00_exact"]
        return self.publish(
            fields, rows, gamma1=self.gamma1, gamma2=self.gamma2, dt_fs=dt, steps=steps
        )
