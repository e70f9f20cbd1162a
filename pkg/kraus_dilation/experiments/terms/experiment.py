"""Kraus-product enumeration report: grouped and raw term counts at a given depth."""

from kraus_dilation import experiment
from kraus_dilation.channels import kraus_from_lindblad
from kraus_dilation.core.exceptions import ConfigInvalid
from kraus_dilation.evolution import PruningPolicy, term_report
from kraus_dilation.fmo import SCHEDULE_STEPS, FmoParams, fmo_term_report
from kraus_dilation.results import ReportResult

from ..base import ModelExperiment
from ..options import (
    build_run_config,
    model_options,
    output_option,
    pruning_options,
    resolve_dt,
    resolve_steps,
    step_options,
)


@experiment.command(name="terms")
@model_options
@step_options
@pruning_options
@output_option
def factory(**flags):
    """Count the pruned, grouped Kraus products of the S-step channel."""
    return TermsExperiment(build_run_config("terms", **flags), result_class=ReportResult)


class TermsExperiment(ModelExperiment):
    default_model = "fmo-default"
    title = "Term report"

    def _setup_steps(self):
        self.add_step("load_model", TermsExperiment._load_model)
        self.add_step("enumerate", TermsExperiment._enumerate)

    def _enumerate(self) -> str:
        config = self.config
        dt = resolve_dt(config, self.model_source)
        steps = resolve_steps(config, dt, SCHEDULE_STEPS)
        if self.model_source == "fmo-default":
            report = fmo_term_report(
                FmoParams(dt_fs=dt), steps, config.threshold, config.norm_kind
            )
        else:
            if dt is None:
                raise ConfigInvalid("a time step is required: pass --dt-fs or --dt-au")
            ks = kraus_from_lindblad(self.model, dt)
            policy = PruningPolicy(config.threshold, norm_kind=config.norm_kind)
            report = term_report(ks, steps, policy)
        report["dt_fs"] = dt
        self.add_context("report", report)
        return f"{report['grouped_terms']} grouped of {report['raw_terms_total']} raw"
