"""Exception hierarchy shared by all orbitlab modules."""


class OrbitLabError(Exception):
    """Base class for every error raised by orbitlab."""


class ConfigError(OrbitLabError, ValueError):
    """Invalid parameters or malformed configuration (CLI exit code 2)."""


class PrecisionCapError(OrbitLabError):
    """Requested working precision exceeds the configured cap."""


class StraddleError(OrbitLabError):
    """A certified point still straddles an integer after all retries."""

    def __init__(self, index, retries):
        self.index = index
        self.retries = retries
        super().__init__(
            f"point {index} straddles an integer after {retries} precision doublings"
        )


class InvariantViolation(OrbitLabError):
    """A proven inequality failed numerically; ``witness`` holds the values."""

    def __init__(self, message, witness=None):
        self.witness = witness or {}
        super().__init__(message)


class PreconditionError(OrbitLabError, ValueError):
    """Operation called outside its domain (distinct from a bound failure)."""


class QuadratureBudgetError(OrbitLabError):
    """Oscillatory quadrature needed more nodes than the budget allows."""

    def __init__(self, message, achieved=None):
        self.achieved = achieved
        super().__init__(message)
