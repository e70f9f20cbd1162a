"""Observable expectation values through shifted, factored observables."""

from typing import Any, Dict, List

import numpy as np
import rich_click as click

from kraus_dilation import experiment
from kraus_dilation.channels import DensityMatrix, KrausSet, apply_channel, kraus_from_lindblad
from kraus_dilation.config import load_matrix
from kraus_dilation.core.exceptions import ConfigInvalid
from kraus_dilation.evolution import PruningPolicy, extend_products, identity_term
from kraus_dilation.linalg import ComplexMatrix
from kraus_dilation.measurement import ObservableSpec, estimate_expectation, shift_observable
from kraus_dilation.utils.common import derive_seed

from ..base import ModelExperiment
from ..options import (
    build_run_config,
    estimation_options,
    initial_site_option,
    model_options,
    output_option,
    pruning_options,
    resolve_dt,
    resolve_steps,
    step_options,
)

DEFAULT_STEPS = 6


def sigma_z(dim: int) -> ComplexMatrix:
    """+1 on the first half of the basis, -1 on the rest."""
    signs = np.where(np.arange(dim) < dim // 2, 1.0, -1.0)
    return np.diag(signs).astype(np.complex128)


@experiment.command(name="expectation")
@model_options
@step_options
@pruning_options
@estimation_options
@initial_site_option
@click.option(
    "--observable",
    type=str,
    help="'energy' (the model Hamiltonian), 'sigma-z' or a matrix file [default: energy]",
)
@output_option
def factory(**flags):
    """Estimate <A>(t) from first-half projection probabilities."""
    return ExpectationExperiment(build_run_config("expectation", **flags))


class ExpectationExperiment(ModelExperiment):
    default_model = "fmo-default"
    title = "Expectation value"

    dt: float
    n_steps: int
    kraus: KrausSet
    observable: ObservableSpec

    def _setup_steps(self):
        self.add_step("load_model", ExpectationExperiment._load_model)
        self.add_step("shift_observable", ExpectationExperiment._shift_observable)
        self.add_step("estimate", ExpectationExperiment._estimate)

    def _load_model(self) -> str:
        detail = super()._load_model()
        self.dt = resolve_dt(self.config, self.model_source)
        self.n_steps = resolve_steps(self.config, self.dt, DEFAULT_STEPS)
        if self.dt is None:
            raise ConfigInvalid("a time step is required: pass --dt-fs or --dt-au")
        if self.n_steps > 0:
            self.kraus = kraus_from_lindblad(self.model, self.dt)
        return detail

    def _observable_matrix(self) -> ComplexMatrix:
        name = self.config.observable
        if name == "energy":
            return self.model.hamiltonian
        if name == "sigma-z":
            return sigma_z(self.model.dim)
        return load_matrix(name)

    def _shift_observable(self) -> str:
        self.observable = shift_observable(self._observable_matrix())
        return f"|A| = {self.observable.norm:.6g}"

    def _estimate(self) -> str:
        config = self.config
        policy = PruningPolicy(config.threshold, norm_kind=config.norm_kind)
        n = self.model.dim
        rho = DensityMatrix.basis_state(n, config.initial_site)
        terms = [identity_term(n)]
        rows: List[Dict[str, Any]] = []
        for step in range(self.n_steps + 1):
            if step > 0:
                terms = extend_products(terms, self.kraus, policy)
                rho = apply_channel(self.kraus, rho)
            value = estimate_expectation(
                self.observable,
                terms,
                self.ensemble,
                config.shots,
                derive_seed(config.seed, step),
                config.mode,
            )
            rows.append(
                {
                    "t_fs": step * self.dt if step else 0.0,
                    "expectation": float(value),
                    "expectation_ref": float(np.trace(self.observable.matrix @ rho.matrix).real),
                    "n_terms": len(terms),
                    "mode": str(config.mode),
                    "seed": config.seed,
                }
            )
        fields = ["t_fs", "expectation", "expectation_ref", "n_terms", "mode", "seed"]
        return self.publish(
            fields,
            rows,
            observable=config.observable,
            dt_fs=self.dt,
            steps=self.n_steps,
            threshold=config.threshold,
            shots=config.shots,
            seed=config.seed,
            mode=str(config.mode),
        )
