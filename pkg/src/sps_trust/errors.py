"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid configuration: bad breakpoints, incomplete rule base, bad weights."""


class EmptyEnvelopeError(ArithmeticError):
    """The aggregated fuzzy output is identically zero, so it has no centroid."""


class ConvergenceError(RuntimeError):
    """Power iteration did not reach the tolerance within the iteration cap."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(f"{message} (residual={residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations
