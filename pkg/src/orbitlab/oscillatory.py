"""Oscillatory integrals of ``exp(2 pi i phi(x))`` for power phases.

Phases are measured in cycles::

    phi(x) = xi * (j x^n + sign * k x^m)

``single`` phases have k = 0.  The quadrature splits the domain into
panels on which phi changes by at most a quarter cycle (using the
majorant xi (j x^n + k x^m), whose derivative bounds |phi'| for x >= 0)
and applies 10- and 20-point Gauss-Legendre rules per panel; their
difference is the reported error estimate.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .errors import ConfigError, InvariantViolation, PreconditionError, QuadratureBudgetError

NODE_BUDGET = 2**20
LOW_ORDER, HIGH_ORDER = 10, 20
_GL = {p: np.polynomial.legendre.leggauss(p) for p in (LOW_ORDER, HIGH_ORDER)}
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class PhaseSpec:
    j: int
    n: int
    k: int = 0
    m: int = 0
    sign: int = 1
    xi: float = 1.0
    alpha: float = 1.0
    beta: float = 2.0

    def __post_init__(self):
        if self.j < 1 or self.n < 1:
            raise ConfigError("j and n must be positive integers")
        if self.k < 0 or (self.k > 0 and self.m < 1):
            raise ConfigError("pair phases need positive k and m")
        if self.sign not in (1, -1):
            raise ConfigError("sign must be +1 or -1")
        if self.is_pair and self.sign < 0 and not self.m < self.n:
            raise ConfigError("minus-sign pairs need m < n")
        if self.is_pair and self.m == self.n:
            raise ConfigError("pair phases need m != n")
        if not self.xi > 0:
            raise ConfigError("xi must be positive")
        if not (0 <= self.alpha < self.beta):
            raise ConfigError("domain must satisfy 0 <= alpha < beta")

    @classmethod
    def single(cls, j, n, xi=1.0, alpha=1.0, beta=2.0):
        return cls(j=j, n=n, xi=xi, alpha=alpha, beta=beta)

    @classmethod
    def pair(cls, j, k, n, m, sign=1, xi=1.0, alpha=1.0, beta=2.0):
        return cls(j=j, n=n, k=k, m=m, sign=sign, xi=xi, alpha=alpha, beta=beta)

    @property
    def is_pair(self) -> bool:
        return self.k > 0

    @property
    def kind(self) -> str:
        if not self.is_pair:
            return "single"
        return "pair_plus" if self.sign > 0 else "pair_minus"

    def on(self, alpha: float, beta: float) -> "PhaseSpec":
        return PhaseSpec(self.j, self.n, self.k, self.m, self.sign, self.xi, alpha, beta)

    def negated(self) -> "NegatedPhase":
        return NegatedPhase(self)

    def phi(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = self.j * x**self.n
        if self.is_pair:
            out = out + self.sign * self.k * x**self.m
        return self.xi * out

    def dphi(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = self.j * self.n * x ** (self.n - 1)
        if self.is_pair:
            out = out + self.sign * self.k * self.m * x ** (self.m - 1)
        return self.xi * out

    def d2phi(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = self.j * self.n * (self.n - 1) * x ** max(self.n - 2, 0)
        if self.is_pair:
            out = out + self.sign * self.k * self.m * (self.m - 1) * x ** max(self.m - 2, 0)
        return self.xi * out

    def majorant(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = self.j * x**self.n
        if self.is_pair:
            out = out + self.k * x**self.m
        return self.xi * out

    def critical_points(self) -> list[float]:
        """Points x > 0 where phi' or phi'' vanish (minus-sign pairs only)."""
        if not (self.is_pair and self.sign < 0):
            return []
        x1, x2 = stationary_points(self.j, self.k, self.m, self.n)
        return sorted(p for p in (x1, x2) if p > 0)


@dataclass(frozen=True)
class NegatedPhase:
    """-phi, used to check conjugate symmetry."""

    base: PhaseSpec

    @property
    def alpha(self):
        return self.base.alpha

    @property
    def beta(self):
        return self.base.beta

    def phi(self, x):
        return -self.base.phi(x)

    def majorant(self, x):
        return self.base.majorant(x)


@dataclass(frozen=True)
class CertifiedIntegral:
    value: complex
    error_bound: float
    nodes: int


def _invert_majorant(phase, targets: np.ndarray, lo: float, hi: float) -> np.ndarray:
    a = np.full(targets.shape, lo)
    b = np.full(targets.shape, hi)
    for _ in range(64):
        mid = 0.5 * (a + b)
        below = phase.majorant(mid) < targets
        a = np.where(below, mid, a)
        b = np.where(below, b, mid)
    return 0.5 * (a + b)


def _panel_edges(phase, alpha: float, beta: float, refine: int) -> np.ndarray:
    span = float(phase.majorant(beta) - phase.majorant(alpha))
    panels = max(1, math.ceil(4.0 * span)) * refine
    targets = phase.majorant(alpha) + span * np.arange(1, panels) / panels
    inner = _invert_majorant(phase, targets, alpha, beta)
    return np.concatenate([[alpha], inner, [beta]])


def _gauss(phase, edges: np.ndarray, order: int) -> np.ndarray:
    t, w = _GL[order]
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = mid[:, None] + half[:, None] * t[None, :]
    vals = np.exp(2j * math.pi * phase.phi(x))
    return half * (vals @ w)


def osc_integral(phase, tol: float = 1e-8, budget: int = NODE_BUDGET,
                 alpha: float | None = None, beta: float | None = None) -> CertifiedIntegral:
    """Integral of exp(2 pi i phi) over the phase's domain (or [alpha, beta])."""
    if not (0 < tol <= 1e-3):
        raise ConfigError("tol must lie in (0, 1e-3]")
    alpha = phase.alpha if alpha is None else alpha
    beta = phase.beta if beta is None else beta
    refine = 1
    while True:
        edges = _panel_edges(phase, alpha, beta, refine)
        panels = edges.size - 1
        nodes = panels * (LOW_ORDER + HIGH_ORDER)
        if nodes > budget:
            if refine == 1:
                raise QuadratureBudgetError(
                    f"phase needs {nodes} nodes, budget is {budget}", achieved=None)
            raise QuadratureBudgetError(
                f"error {result.error_bound:.3g} above tol {tol:.3g} at node budget",
                achieved=result)
        hi = _gauss(phase, edges, HIGH_ORDER)
        lo = _gauss(phase, edges, LOW_ORDER)
        # rounding of phi at magnitude |phi| perturbs the phase by ~|phi| eps cycles
        phase_mag = float(np.max(np.abs(phase.majorant(np.array([alpha, beta])))))
        rounding = (beta - alpha) * 2 * math.pi * 8 * _EPS * (phase_mag + 1.0)
        err = float(np.sum(np.abs(hi - lo))) + rounding
        result = CertifiedIntegral(complex(np.sum(hi)), err, int(nodes))
        if err <= tol:
            return result
        refine *= 2


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    case_id: str
    kind: str
    bound: float
    integral_abs: float
    error_bound: float
    passed: bool

    def raise_if_failed(self) -> "Verdict":
        if not self.passed:
            raise InvariantViolation(f"{self.kind} bound violated in case {self.case_id}", asdict(self))
        return self

    def row(self) -> list:
        return [self.case_id, self.kind, repr(self.bound), repr(self.integral_abs),
                repr(self.error_bound), "true" if self.passed else "false"]


VERDICT_HEADER = ("case_id", "kind", "bound", "integral_abs", "error_bound", "pass")


def _verdict(case_id, kind, bound, integral: CertifiedIntegral, tol, use_real=True) -> Verdict:
    mag = abs(integral.value.real) if use_real else abs(integral.value)
    passed = mag + integral.error_bound <= bound + tol
    return Verdict(str(case_id), kind, float(bound), float(mag), float(integral.error_bound), bool(passed))


def vdc_pieces(phase: PhaseSpec) -> list[tuple[float, float]]:
    """Split the domain at zeros of phi' and phi'' so phi' is monotone on each piece."""
    cuts = [c for c in phase.critical_points() if phase.alpha < c < phase.beta]
    pts = [phase.alpha, *cuts, phase.beta]
    return list(zip(pts[:-1], pts[1:]))


def vdc_gamma(phase: PhaseSpec, alpha: float, beta: float) -> float:
    """min |phi'| on [alpha, beta], read off the endpoints (phi' monotone there)."""
    return float(min(abs(phase.dphi(alpha)), abs(phase.dphi(beta))))


def vdc_check(phase: PhaseSpec, tol: float = 1e-8, case_id="vdc") -> list[Verdict]:
    """|int exp(2 pi i phi)| <= 1/gamma on every monotone-derivative piece."""
    out = []
    for i, (a, b) in enumerate(vdc_pieces(phase)):
        gamma = vdc_gamma(phase, a, b)
        if gamma <= 0:
            continue
        integral = osc_integral(phase, tol, alpha=a, beta=b)
        out.append(_verdict(f"{case_id}.{i}", "vdc", 1.0 / gamma, integral, tol, use_real=False))
    return out


def lemma3_bound(j: int, xi: float, n: int, alpha: float) -> float:
    return 1.0 / (j * xi * n * alpha ** (n - 1))


def lemma3_check(phase: PhaseSpec, tol: float = 1e-6, case_id="lemma3") -> Verdict:
    """|int cos(2 pi j xi x^n)| <= 1 / (j xi n alpha^(n-1))."""
    if phase.is_pair:
        raise PreconditionError("lemma3_check takes a single phase")
    if not phase.alpha > 1:
        raise PreconditionError("lemma3_check needs alpha > 1")
    bound = lemma3_bound(phase.j, phase.xi, phase.n, phase.alpha)
    integral = osc_integral(phase, min(tol, 1e-8))
    return _verdict(case_id, "lemma3", bound, integral, tol)


def lemma4_bound(xi: float, m: int, n: int, alpha: float) -> float:
    top = max(m, n)
    return 1.0 / (xi * top * alpha ** (top - 1))


def lemma4_check(phase: PhaseSpec, tol: float = 1e-6, case_id="lemma4") -> Verdict:
    """|int cos(2 pi xi (j x^n + k x^m))| <= 1 / (xi M alpha^(M-1)), M = max(m, n).

    Only plus-sign pairs are accepted; minus-sign pairs go through the
    partition of ``lemma5_partition``.
    """
    if not phase.is_pair or phase.sign < 0:
        raise PreconditionError("lemma4_check takes plus-sign pair phases only")
    if not phase.alpha > 1:
        raise PreconditionError("lemma4_check needs alpha > 1")
    bound = lemma4_bound(phase.xi, phase.m, phase.n, phase.alpha)
    integral = osc_integral(phase, min(tol, 1e-8))
    return _verdict(case_id, "lemma4", bound, integral, tol)


# ---------------------------------------------------------------------------
# partition around the stationary point of j x^n - k x^m
# ---------------------------------------------------------------------------

def stationary_points(j: int, k: int, m: int, n: int) -> tuple[float, float]:
    """(x1, x2): zero of phi' and zero of phi'' for phi = j x^n - k x^m, m < n."""
    if not (1 <= m < n):
        raise ConfigError("need 1 <= m < n")
    e = 1.0 / (n - m)
    x1 = (k * m / (j * n)) ** e
    x2 = 0.0 if m == 1 else (k * m * (m - 1) / (j * n * (n - 1))) ** e
    return x1, x2


def _round_up(q: Fraction) -> float:
    f = float(q)
    return math.nextafter(f, math.inf) if Fraction(f) < q else f


def _round_down(q: Fraction) -> float:
    f = float(q)
    return math.nextafter(f, -math.inf) if Fraction(f) > q else f


Interval = tuple[float, float] | None


def _clip(lo: float, hi: float) -> Interval:
    return (lo, hi) if lo < hi else None


@dataclass(frozen=True)
class PartitionResult:
    j: int
    k: int
    m: int
    n: int
    xi: float
    eta: float
    A: float
    B: float
    x1: float
    x2: float
    band: tuple[float, float]
    intervals: tuple[Interval, Interval, Interval]

    @property
    def covered_measure(self) -> Fraction:
        return sum((Fraction(hi) - Fraction(lo) for lo, hi in filter(None, self.intervals)),
                   Fraction(0))

    @property
    def excluded_measure(self) -> Fraction:
        """Exact measure of [A, B] outside I1 u I2 u I3 (endpoints as given)."""
        return Fraction(self.B) - Fraction(self.A) - self.covered_measure

    @property
    def measure_cap(self) -> Fraction:
        return 2 * Fraction(self.B) * Fraction(self.eta)

    def disjoint(self) -> bool:
        parts = [iv for iv in self.intervals if iv is not None]
        return all(p[1] <= q[0] for p, q in zip(parts, parts[1:]))

    def guaranteed_bound(self, alpha: float) -> float:
        return 1.0 / (self.xi * self.eta * self.m * alpha ** (self.m - 1))

    def containing(self, alpha: float, beta: float) -> int | None:
        for idx, iv in enumerate(self.intervals):
            if iv is not None and iv[0] <= alpha and beta <= iv[1]:
                return idx
        return None

    def phase(self, alpha: float, beta: float) -> PhaseSpec:
        return PhaseSpec.pair(self.j, self.k, self.n, self.m, -1, self.xi, alpha, beta)

    def as_dict(self) -> dict:
        return {
            "j": self.j, "k": self.k, "m": self.m, "n": self.n, "xi": self.xi,
            "eta": self.eta, "A": self.A, "B": self.B, "x1": self.x1, "x2": self.x2,
            "band": list(self.band),
            "intervals": [list(iv) if iv else None for iv in self.intervals],
            "excluded_measure": float(self.excluded_measure),
            "measure_cap": float(self.measure_cap),
        }


def lemma5_partition(j: int, k: int, m: int, n: int, xi: float, eta: float,
                     A: float, B: float) -> PartitionResult:
    """Three intervals of [A, B] avoiding the band |x - x1| <= eta x1.

    The band endpoints are rounded inward, so the excluded measure never
    exceeds 2 B eta in exact arithmetic.
    """
    if min(j, k) < 1:
        raise ConfigError("j and k must be positive")
    if not eta > 0:
        raise ConfigError("eta must be positive")
    if not (1 < A < B):
        raise ConfigError("need 1 < A < B")
    x1, x2 = stationary_points(j, k, m, n)
    qx1, qeta = Fraction(x1), Fraction(eta)
    e_lo = _round_up(qx1 * (1 - qeta))
    e_hi = _round_down(qx1 * (1 + qeta))
    i1 = _clip(A, min(x2, e_lo, B))
    i2 = _clip(max(x2, A), min(x1, e_lo, B))
    i3 = _clip(max(x1, e_hi, A), B)
    return PartitionResult(j, k, m, n, float(xi), float(eta), float(A), float(B),
                           x1, x2, (e_lo, e_hi), (i1, i2, i3))


def lemma5_check(partition: PartitionResult, alpha: float, beta: float,
                 tol: float = 1e-6, case_id="lemma5") -> Verdict:
    """|int_alpha^beta cos(2 pi xi (j x^n - k x^m))| <= 1/(xi eta m alpha^(m-1)).

    Raises PreconditionError when [alpha, beta] is not inside one interval.
    """
    if not alpha < beta:
        raise PreconditionError("need alpha < beta")
    if partition.containing(alpha, beta) is None:
        raise PreconditionError(f"[{alpha}, {beta}] is not contained in I1, I2 or I3")
    integral = osc_integral(partition.phase(alpha, beta), min(tol, 1e-8))
    return _verdict(case_id, "lemma5", partition.guaranteed_bound(alpha), integral, tol)
