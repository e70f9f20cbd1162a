"""Term enumeration report."""

from .experiment import TermsExperiment

__all__ = ["TermsExperiment"]
