"""Certified fractional parts of power orbits, their discrepancies, and
the oscillatory integral bounds and limit laws built on them."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    InvariantViolation,
    OrbitLabError,
    PrecisionCapError,
    PreconditionError,
    QuadratureBudgetError,
    StraddleError,
)
from .seqgen import (  # noqa: E402
    CertifiedPointList,
    ExponentRule,
    OrbitSpec,
    generate_iid,
    generate_linear_orbit,
    generate_power_orbit,
    sample_x,
)
from .discrepancy import (  # noqa: E402
    dyadic_large_discrepancy,
    dyadic_small_discrepancy,
    extremal_discrepancy,
    sandwich_check,
    star_discrepancy,
)

__all__ = [
    "CertifiedPointList", "ConfigError", "ExponentRule", "InvariantViolation",
    "OrbitLabError", "OrbitSpec", "PrecisionCapError", "PreconditionError",
    "QuadratureBudgetError", "StraddleError", "dyadic_large_discrepancy",
    "dyadic_small_discrepancy", "extremal_discrepancy", "generate_iid",
    "generate_linear_orbit", "generate_power_orbit", "sample_x", "sandwich_check",
    "star_discrepancy",
]
