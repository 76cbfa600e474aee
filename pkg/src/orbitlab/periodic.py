"""Period-1, mean-zero functions of bounded variation.

Two families are modelled: centered indicators ``1_[a,b)(t) - (b - a)``
and trigonometric polynomials ``sum a_j cos 2 pi j t + b_j sin 2 pi j t``.
Both have closed-form Fourier coefficients and L2 norms over one period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

TWO_PI = 2.0 * math.pi
MAX_VARIATION = 2.0


@dataclass(frozen=True)
class CenteredIndicator:
    a: float
    b: float

    def __post_init__(self):
        if not (0.0 <= self.a < self.b <= 1.0):
            raise ConfigError(f"indicator needs 0 <= a < b <= 1, got [{self.a}, {self.b})")

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def variation(self) -> float:
        # two unit jumps per period; [0, 1) itself is the constant zero
        return 0.0 if self.length == 1.0 else 2.0

    def __call__(self, t):
        return eval_function(self, t)


@dataclass(frozen=True)
class TrigPolynomial:
    cos: tuple = ()
    sin: tuple = ()

    def __post_init__(self):
        c = tuple(float(v) for v in self.cos)
        s = tuple(float(v) for v in self.sin)
        d = max(len(c), len(s))
        object.__setattr__(self, "cos", c + (0.0,) * (d - len(c)))
        object.__setattr__(self, "sin", s + (0.0,) * (d - len(s)))

    @property
    def degree(self) -> int:
        return len(self.cos)

    @property
    def variation(self) -> float:
        """Total variation over one period, from a dense uniform grid."""
        if self.degree == 0:
            return 0.0
        m = 4096 * self.degree
        t = np.arange(m + 1) / m
        return float(np.sum(np.abs(np.diff(eval_function(self, t)))))

    def __call__(self, t):
        return eval_function(self, t)


PeriodicFunction = CenteredIndicator | TrigPolynomial


@dataclass(frozen=True)
class FourierExpansion:
    """Coefficients a_j, b_j for j = 1..degree (index 0 holds j = 1)."""

    a: np.ndarray
    b: np.ndarray

    @property
    def degree(self) -> int:
        return int(self.a.size)

    def as_polynomial(self) -> TrigPolynomial:
        return TrigPolynomial(tuple(self.a), tuple(self.b))


def eval_function(f: PeriodicFunction, t):
    t = np.asarray(t, dtype=np.float64)
    if isinstance(f, CenteredIndicator):
        u = t - np.floor(t)
        return ((u >= f.a) & (u < f.b)).astype(np.float64) - f.length
    out = np.zeros_like(t)
    for j, (cj, sj) in enumerate(zip(f.cos, f.sin), start=1):
        arg = TWO_PI * j * t
        if cj:
            out = out + cj * np.cos(arg)
        if sj:
            out = out + sj * np.sin(arg)
    return out


def fourier_coefficients(f: PeriodicFunction, d: int) -> FourierExpansion:
    """Closed-form a_j, b_j for j <= d (trig polynomials are padded/truncated)."""
    if d < 1:
        raise ConfigError("degree must be >= 1")
    if isinstance(f, TrigPolynomial):
        a = np.zeros(d)
        b = np.zeros(d)
        k = min(d, f.degree)
        a[:k] = f.cos[:k]
        b[:k] = f.sin[:k]
        return FourierExpansion(a, b)
    j = np.arange(1, d + 1, dtype=np.float64)
    pa, pb = TWO_PI * j * f.a, TWO_PI * j * f.b
    a = (np.sin(pb) - np.sin(pa)) / (math.pi * j)
    b = (np.cos(pa) - np.cos(pb)) / (math.pi * j)
    return FourierExpansion(a, b)


def partial_sum(f: PeriodicFunction, d: int) -> TrigPolynomial:
    return fourier_coefficients(f, d).as_polynomial()


def remainder_eval(f: PeriodicFunction, d: int, t):
    """f(t) - p_d(t) where p_d is the degree-d partial sum."""
    return eval_function(f, t) - eval_function(partial_sum(f, d), t)


def l2_norm(f: PeriodicFunction) -> float:
    if isinstance(f, CenteredIndicator):
        L = f.length
        return math.sqrt(L * (1.0 - L))
    return math.sqrt(0.5 * sum(c * c + s * s for c, s in zip(f.cos, f.sin)))


def is_admissible(f: PeriodicFunction, tol: float = 1e-9) -> bool:
    return f.variation <= MAX_VARIATION + tol


def function_from_config(cfg) -> PeriodicFunction:
    """Build from ``{"kind": "indicator", "a": .., "b": ..}`` or
    ``{"kind": "trig", "cos": [..], "sin": [..]}``."""
    if not isinstance(cfg, dict):
        raise ConfigError(f"function spec must be an object, got {cfg!r}")
    kind = cfg.get("kind")
    try:
        if kind == "indicator":
            return CenteredIndicator(float(cfg["a"]), float(cfg["b"]))
        if kind == "trig":
            return TrigPolynomial(tuple(cfg.get("cos", ())), tuple(cfg.get("sin", ())))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad function spec {cfg!r}") from exc
    raise ConfigError(f"unknown function kind {kind!r}")


def function_to_config(f: PeriodicFunction) -> dict:
    if isinstance(f, CenteredIndicator):
        return {"kind": "indicator", "a": f.a, "b": f.b}
    return {"kind": "trig", "cos": list(f.cos), "sin": list(f.sin)}
