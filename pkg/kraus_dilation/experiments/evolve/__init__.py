"""Population evolution through dilated Kraus products."""

from .experiment import EvolveExperiment

__all__ = ["EvolveExperiment"]
