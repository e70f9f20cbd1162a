"""Euler reference trajectories."""

from .experiment import ReferenceExperiment

__all__ = ["ReferenceExperiment"]
