"""Exact generalization errors and Wasserstein, TV, KL and f-divergence
generalization bounds for finite learners and the Gaussian location model."""

from .bounds_standard import BoundReport, standard_report
from .bounds_subsample import subsample_report
from .divergences import (
    DivergencePair,
    SubgaussianParams,
    chi_squared,
    hellinger,
    kl,
    psi,
    total_variation,
)
from .errors import EnumerationGuardError, InvariantError, UnconditionableError
from .prob import (
    ConditionalKernel,
    DiscreteScenario,
    FiniteDistribution,
    SupersampleScenario,
    condition,
    exact_empirical_gen_error,
    exact_gen_error,
    marginal,
)
from .transport import Coupling, MetricSpace, wasserstein1, wasserstein1_exact

__version__ = "0.1.0"

__all__ = [
    "BoundReport", "ConditionalKernel", "Coupling", "DiscreteScenario", "DivergencePair",
    "EnumerationGuardError", "FiniteDistribution", "InvariantError", "MetricSpace",
    "SubgaussianParams", "SupersampleScenario", "UnconditionableError", "chi_squared",
    "condition", "exact_empirical_gen_error", "exact_gen_error", "hellinger", "kl", "marginal",
    "psi", "standard_report", "subsample_report", "total_variation", "wasserstein1",
    "wasserstein1_exact",
]
