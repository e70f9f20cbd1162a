"""Observable expectation values."""

from .experiment import ExpectationExperiment

__all__ = ["ExpectationExperiment"]
