"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested operation."""


class BudgetExceededError(RuntimeError):
    """A simulation would draw more random coordinates than the configured budget."""
