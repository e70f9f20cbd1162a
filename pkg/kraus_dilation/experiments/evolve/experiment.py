"""Operator-sum evolution read out through dilated Kraus products."""

from typing import Any, Dict, List

from kraus_dilation import experiment
from kraus_dilation.channels import KrausSet, kraus_from_lindblad
from kraus_dilation.core.exceptions import ConfigInvalid
from kraus_dilation.evolution import PruningPolicy, extend_products, identity_term
from kraus_dilation.measurement import estimate_diagonal
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

DEFAULT_STEPS = 10


@experiment.command(name="evolve")
@model_options
@step_options
@pruning_options
@estimation_options
@initial_site_option
@output_option
def factory(**flags):
    """Evolve a model step by step and estimate populations from dilations."""
    return EvolveExperiment(build_run_config("evolve", **flags))


class EvolveExperiment(ModelExperiment):
    """Populations after 0..S applications of the Kraus map, one row per step."""

    title = "Populations"

    dt: float
    n_steps: int
    kraus: KrausSet

    def _setup_steps(self):
        self.add_step("load_model", EvolveExperiment._load_model)
        self.add_step(
            "build_kraus",
            EvolveExperiment._build_kraus,
            condition=lambda context: context["steps"] > 0,
        )
        self.add_step("estimate_populations", EvolveExperiment._estimate)

    def _load_model(self) -> str:
        detail = super()._load_model()
        self.dt = resolve_dt(self.config, self.model_source)
        self.n_steps = resolve_steps(self.config, self.dt, DEFAULT_STEPS)
        if self.n_steps > 0 and self.dt is None:
            raise ConfigInvalid("a time step is required: pass --dt-fs or --dt-au")
        self.add_context("steps", self.n_steps)
        return detail

    def _build_kraus(self) -> str:
        self.kraus = kraus_from_lindblad(self.model, self.dt)
        return f"{len(self.kraus)} Kraus operators at dt = {self.dt:g} fs"

    def _estimate(self) -> str:
        config = self.config
        policy = PruningPolicy(config.threshold, norm_kind=config.norm_kind)
        n = self.model.dim
        fields = ["t_fs", *(f"pop{i}" for i in range(n)), "n_terms", "mode", "seed"]
        rows: List[Dict[str, Any]] = []
        terms = [identity_term(n)]
        for step in range(self.n_steps + 1):
            if step > 0:
                terms = extend_products(terms, self.kraus, policy)
            populations = estimate_diagonal(
                terms, self.ensemble, config.shots, derive_seed(config.seed, step), config.mode
            )
            rows.append(
                {
                    "t_fs": step * self.dt if step else 0.0,
                    **{f"pop{i}": float(populations[i]) for i in range(n)},
                    "n_terms": len(terms),
                    "mode": str(config.mode),
                    "seed": config.seed,
                }
            )
        return self.publish(
            fields,
            rows,
            dt_fs=self.dt,
            steps=self.n_steps,
            threshold=config.threshold,
            norm_kind=str(config.norm_kind),
            shots=config.shots,
            seed=config.seed,
            mode=str(config.mode),
        )
