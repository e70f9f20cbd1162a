"""Classical reference: explicit Euler integration of the Lindblad equation."""

from typing import Any, Dict, List

import numpy as np

from kraus_dilation import experiment
from kraus_dilation.channels import DensityMatrix
from kraus_dilation.core.exceptions import ConfigInvalid
from kraus_dilation.evolution import euler_step_count, evolve_lindblad_euler
from kraus_dilation.fmo import DEFAULT_REFERENCE_DT

from ..base import ModelExperiment
from ..options import (
    build_run_config,
    initial_site_option,
    model_options,
    output_option,
    step_options,
)


@experiment.command(name="reference")
@model_options
@step_options
@initial_site_option
@output_option
def factory(**flags):
    """Integrate the Lindblad equation with explicit Euler steps.

    --dt-fs is the Euler step (default 0.25 fs) and --steps the number of
    reporting intervals over --total-t-fs (default: every Euler step).
    """
    return ReferenceExperiment(build_run_config("reference", **flags))


class ReferenceExperiment(ModelExperiment):
    title = "Euler reference"

    def _setup_steps(self):
        self.add_step("load_model", ReferenceExperiment._load_model)
        self.add_step("integrate", ReferenceExperiment._integrate)

    def _integrate(self) -> str:
        config = self.config
        dt = config.resolved_dt_fs() or DEFAULT_REFERENCE_DT
        if config.total_t_fs is None:
            raise ConfigInvalid("the reference run needs --total-t-fs")
        n_steps = euler_step_count(config.total_t_fs, dt)
        intervals = config.steps or n_steps
        if n_steps % intervals:
            raise ConfigInvalid(
                f"{n_steps} Euler steps cannot be split into {intervals} reporting intervals"
            )
        stride = n_steps // intervals

        rho0 = DensityMatrix.basis_state(self.model.dim, config.initial_site)
        trajectory = evolve_lindblad_euler(self.model, rho0, config.total_t_fs, dt)

        n = self.model.dim
        fields = ["t_fs", *(f"pop{i}" for i in range(n)), "trace"]
        rows: List[Dict[str, Any]] = []
        for k in range(0, n_steps + 1, stride):
            rho = trajectory[k]
            populations = rho.populations()
            rows.append(
                {
                    "t_fs": k * dt,
                    **{f"pop{i}": float(populations[i]) for i in range(n)},
                    "trace": float(np.trace(rho.matrix).real),
                }
            )
        return self.publish(fields, rows, dt_fs=dt, total_t_fs=config.total_t_fs, stride=stride)
