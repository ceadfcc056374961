"""Exception types shared across the package."""


class PreconditionError(ValueError):
    """An operation was called outside its domain of validity."""


class ContractError(ValueError):
    """Inputs that must agree (grids, dimensions, profiles) do not."""


class ConfigError(ValueError):
    """Invalid run configuration. ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConvergenceError(RuntimeError):
    """An iterative method stalled before reaching its tolerance."""


class DivergenceError(RuntimeError):
    """Non-finite values appeared in an iterate."""

    def __init__(self, message, iteration):
        super().__init__(f"{message} (iteration {iteration})")
        self.iteration = iteration
