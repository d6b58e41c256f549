"""Error exponents for discriminating two quantum states from n copies.

Divergences and their classical embedding, explicit achieving tests, a
computable converse, a certified Neyman-Pearson oracle and finite-n bounds.
"""
__version__ = "0.1.0"

from .errors import (AtomBudgetExceeded, BudgetExceeded, DegenerateVariance,  # noqa: E402
                     InvariantViolation, NotHermitian, NotNormalized, NotProjector, ParseError,
                     QSteinError, SupportViolation, ToleranceNotReached)
from .linalg import DensityMatrix, kron_power  # noqa: E402
from .states import StatePair  # noqa: E402
from .divergences import (divergence_report, quantum_relative_entropy,  # noqa: E402
                          quantum_relative_variance, third_abs_moment)
from .ns_classical import build_ns_joint, convolve_n, llr_distribution, tail_prob  # noqa: E402
from .achievability import build_test  # noqa: E402
from .optimality import ConverseParams, alpha_lower_bound, lemma2_gap  # noqa: E402
from .np_oracle import (alpha_of_beta, beta_of_epsilon, classical_np,  # noqa: E402
                        tradeoff_curve)
from .bounds import theorem1_limit, theorem2_bounds  # noqa: E402

__all__ = [
    "AtomBudgetExceeded", "BudgetExceeded", "ConverseParams", "DegenerateVariance",
    "DensityMatrix", "InvariantViolation", "NotHermitian", "NotNormalized", "NotProjector",
    "ParseError", "QSteinError", "StatePair", "SupportViolation", "ToleranceNotReached",
    "alpha_lower_bound", "alpha_of_beta", "beta_of_epsilon", "build_ns_joint", "build_test",
    "classical_np", "convolve_n", "divergence_report", "kron_power", "lemma2_gap",
    "llr_distribution", "quantum_relative_entropy", "quantum_relative_variance", "tail_prob",
    "theorem1_limit", "theorem2_bounds", "third_abs_moment", "tradeoff_curve",
]
