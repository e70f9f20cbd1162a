"""Scheduled FMO exciton-transfer run with its Euler reference."""

import rich_click as click

from kraus_dilation import experiment
from kraus_dilation.config import load_model
from kraus_dilation.core.exceptions import ConfigInvalid, InvalidModel
from kraus_dilation.fmo import (
    DEFAULT_REFERENCE_DT,
    FMO_DIM,
    FMO_FIELDS,
    FmoParams,
    fmo_params_from_model,
    fmo_schedule,
    run_fmo_experiment,
)

from ..base import ModelExperiment
from ..options import (
    build_run_config,
    estimation_options,
    initial_site_option,
    model_options,
    output_option,
    pruning_options,
)


@experiment.command(name="fmo")
@model_options
@pruning_options
@estimation_options
@initial_site_option
@click.option(
    "--reference-dt",
    type=click.FloatRange(min=0, min_open=True),
    default=DEFAULT_REFERENCE_DT,
    show_default=True,
    help="Euler step of the reference trajectory in fs",
)
@click.option("--include-initial", is_flag=True, help="Also emit the t = 0 row")
@output_option
def factory(reference_dt: float, include_initial: bool, **flags):
    """Reproduce the FMO population and energy dynamics on 30 scheduled times."""
    exp = FmoExperiment(build_run_config("fmo", **flags))
    exp.reference_dt = reference_dt
    exp.include_initial = include_initial
    return exp


class FmoExperiment(ModelExperiment):
    """Five staggered groups of six steps each, compared against a fine Euler run."""

    default_model = "fmo-default"
    title = "FMO dynamics"

    reference_dt: float = DEFAULT_REFERENCE_DT
    include_initial: bool = False
    params: FmoParams

    def _setup_steps(self):
        self.add_step("build_model", FmoExperiment._build_model)
        self.add_step("run_schedule", FmoExperiment._run_schedule)
        self.add_step("compare", FmoExperiment._compare)

    def _build_model(self) -> str:
        model = load_model(self.model_source)
        try:
            self.params = fmo_params_from_model(model)
        except InvalidModel as e:
            raise ConfigInvalid(f"fmo needs a model with the fmo-default layout: {e.message}") from e
        groups = fmo_schedule()
        return f"{model.label or 'model'}: {FMO_DIM} levels, {len(model.jumps)} jumps, {len(groups)} groups"

    def _run_schedule(self) -> str:
        config = self.config
        rows = run_fmo_experiment(
            self.params,
            initial_site=config.initial_site,
            shots=config.shots,
            threshold=config.threshold,
            seed=config.seed,
            mode=config.mode,
            include_initial=self.include_initial,
            reference_dt=self.reference_dt,
            norm_kind=config.norm_kind,
        )
        return self.publish(
            FMO_FIELDS,
            rows,
            threshold=config.threshold,
            norm_kind=str(config.norm_kind),
            shots=config.shots,
            seed=config.seed,
            mode=str(config.mode),
            reference_dt_fs=self.reference_dt,
        )

    def _compare(self) -> str:
        rows = self.get_context("rows")
        population_gap = max(
            abs(row[f"pop{i}"] - row[f"pop_ref{i}"]) for row in rows for i in range(FMO_DIM)
        )
        energy_gap = max(abs(row["energy_ev"] - row["energy_ref_ev"]) for row in rows)
        return f"max |dpop| = {population_gap:.4f}, max |dE| = {energy_gap:.5f} eV"
