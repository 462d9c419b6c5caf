"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or out-of-contract input (bad shapes, non-finite entries, ...)."""


class NotApplicableError(ValueError):
    """A bound or numerical method whose preconditions do not hold for the input."""
