"""FMO exciton-transfer experiment."""

from .experiment import FmoExperiment

__all__ = ["FmoExperiment"]
