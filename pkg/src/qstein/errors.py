"""Exception types shared across the package."""


class QSteinError(Exception):
    """Base class for all package errors."""


class NotHermitian(QSteinError, ValueError):
    pass


class BudgetExceeded(QSteinError):
    """Raised when a dense n-copy operator would exceed the dimension budget."""

    def __init__(self, required_dim, budget):
        self.required_dim = required_dim
        self.budget = budget
        super().__init__(
            f"n-copy dimension {required_dim} exceeds budget {budget}")


class SupportViolation(QSteinError, ValueError):
    pass


class DegenerateVariance(QSteinError, ValueError):
    """The relative variance vanishes where a positive one is required."""


class AtomBudgetExceeded(QSteinError):
    def __init__(self, count, max_atoms):
        self.count = count
        self.max_atoms = max_atoms
        super().__init__(
            f"convolution would produce {count} atoms (> {max_atoms}); "
            "use monte_carlo_tail instead")


class NotProjector(QSteinError, ValueError):
    pass


class NotNormalized(QSteinError, ValueError):
    pass


class ToleranceNotReached(QSteinError):
    def __init__(self, gap, tol):
        self.gap = gap
        self.tol = tol
        super().__init__(f"duality gap {gap:.3e} above tolerance {tol:.3e}")


class ParseError(QSteinError, ValueError):
    pass


class InvariantViolation(QSteinError, ValueError):
    """Carries every violated invariant found while validating an input."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
