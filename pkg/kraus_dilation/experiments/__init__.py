"""Built-in experiments; importing this package registers their CLI commands."""

from .damping import DampingExperiment
from .evolve import EvolveExperiment
from .expectation import ExpectationExperiment
from .fmo import FmoExperiment
from .reference import ReferenceExperiment
from .terms import TermsExperiment
