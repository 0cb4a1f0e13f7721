"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the set where a formula is defined."""


class KinkError(DomainError):
    """A one-sided quantity was requested at a kink without naming the side."""


class ValidationError(ValueError):
    """A problem specification violates one or more invariants.

    ``violations`` carries the names of the broken rules.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(f"{v.rule}: {v.message}" for v in self.violations))


class NonConvergenceError(RuntimeError):
    """An iterative numerical procedure failed to meet its tolerance."""
