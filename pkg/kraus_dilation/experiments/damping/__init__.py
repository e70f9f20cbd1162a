"""Finite-temperature damping comparison."""

from .experiment import DampingExperiment

__all__ = ["DampingExperiment"]
