"""Monte Carlo harness for the iterated-logarithm and central-limit behaviour
of power orbits, plus the reference constants they are compared against.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import ndtr

from .errors import ConfigError
from .periodic import CenteredIndicator, PeriodicFunction, eval_function, is_admissible, l2_norm
from .seqgen import (
    DEFAULT_EPS,
    CertifiedPointList,
    ExponentRule,
    OrbitSpec,
    derive_seed,
    generate_iid,
    generate_linear_orbit,
    generate_power_orbit,
    sample_x,
)

MIN_LIL_N = 16
NON_GENERIC_D = 0.5


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReferenceConstants:
    lil_power_orbit: float = 1 / math.sqrt(2)
    kesten: float = 2 / math.pi**2
    fukuyama_base2: float = 2 * math.sqrt(21) / 9
    chung_smirnov: float = 1 / math.sqrt(2)
    fukuyama_irrational: float = 1 / math.sqrt(2)

    def as_dict(self) -> dict:
        return dict(self.__dict__)


REFERENCE = ReferenceConstants()


# ---------------------------------------------------------------------------
# distribution utilities
# ---------------------------------------------------------------------------

def normal_cdf(t):
    """Standard normal distribution function (scalar or array)."""
    out = ndtr(np.asarray(t, dtype=np.float64))
    return float(out) if out.ndim == 0 else out


def ks_distance(samples) -> float:
    """sup_t |F_M(t) - Phi(t)| for the empirical distribution of ``samples``."""
    xs = np.sort(np.asarray(samples, dtype=np.float64))
    m = xs.size
    if m == 0:
        raise ConfigError("need at least one sample")
    cdf = normal_cdf(xs)
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - cdf), np.max(cdf - (i - 1) / m)))


def nform_values(max_m: int) -> list[int]:
    """N(M) = sum_{i<=M} (i^4 + i) for M = 1..max_m."""
    if max_m < 1:
        raise ConfigError("max_m must be >= 1")
    out, total = [], 0
    for i in range(1, max_m + 1):
        total += i**4 + i
        out.append(total)
    return out


def nform_floor(N: int) -> int:
    """Largest N(M) <= N."""
    if N < 2:
        raise ConfigError("N must be at least N(1) = 2")
    best, total, i = 0, 0, 1
    while total + i**4 + i <= N:
        total += i**4 + i
        best = total
        i += 1
    return best


def loglog(N: int) -> float:
    """log(max(1, log N)), floored at its value for N = 16."""
    def raw(v):
        return math.log(max(1.0, math.log(v)))
    return max(raw(N), raw(MIN_LIL_N))


def make_grid(kind: str, n_max: int, explicit=None) -> list[int]:
    if n_max < MIN_LIL_N:
        raise ConfigError(f"n_max must be >= {MIN_LIL_N}")
    if kind == "dyadic":
        grid = []
        n = MIN_LIL_N
        while n < n_max:
            grid.append(n)
            n *= 2
        return grid + [n_max]
    if kind == "nform":
        vals = [v for v in nform_values(64) if MIN_LIL_N <= v <= n_max]
        if not vals:
            raise ConfigError("no Nform values in range")
        return vals
    if kind == "explicit":
        grid = [int(v) for v in (explicit or ())]
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("explicit grid must be nonempty and strictly increasing")
        if grid[0] < 1 or grid[-1] > n_max:
            raise ConfigError("explicit grid must lie in [1, n_max]")
        return grid
    raise ConfigError(f"unknown grid kind {kind!r}")


# ---------------------------------------------------------------------------
# point sources
# ---------------------------------------------------------------------------

def points_from_source(source, n: int) -> tuple[CertifiedPointList, dict]:
    """Build ``n`` points from a source description.

    ``{"kind": "power", "xi": 1, "x": 1.5}`` uses a fixed x; replacing ``x``
    by ``"interval": [A, B], "seed": s`` samples it.  ``{"kind": "iid",
    "seed": s}`` and ``{"kind": "linear", "x": ...}`` are the baselines.
    Returns the points and the resolved parameters.
    """
    if isinstance(source, CertifiedPointList):
        if source.n_points < n:
            raise ConfigError(f"source has {source.n_points} points, {n} needed")
        return source.prefix(n), {"kind": "given"}
    if not isinstance(source, dict):
        raise ConfigError(f"bad point source {source!r}")
    kind = source.get("kind", "power")
    rule = ExponentRule.from_config(source.get("rule"))
    if kind == "iid":
        seed = int(source.get("seed", 0))
        return generate_iid(seed, n), {"kind": "iid", "seed": seed}
    if kind == "linear":
        x = Fraction(source["x"]) if "x" in source else None
        if x is None:
            raise ConfigError("linear source needs x")
        return generate_linear_orbit(x, rule, n), {"kind": "linear", "x": str(x)}
    if kind == "power":
        xi = source.get("xi", 1)
        if "x" in source:
            x = source["x"]
        elif "interval" in source:
            x = sample_x(source["interval"], int(source.get("seed", 0)),
                         int(source.get("mantissa_bits", 53)))
        else:
            raise ConfigError("power source needs x or interval")
        spec = OrbitSpec(xi, x, rule)
        eps = float(source.get("eps", DEFAULT_EPS))
        pts = generate_power_orbit(spec, n, eps)
        return pts, {"kind": "power", "xi": str(spec.xi), "x": str(spec.x),
                     "x_float": float(spec.x), "rule": rule.to_config()}
    raise ConfigError(f"unknown source kind {kind!r}")


def parallel_map(fn, tasks, threads: int = 1) -> list:
    """Ordered map; results do not depend on the worker count."""
    tasks = list(tasks)
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        chunk = max(1, len(tasks) // (4 * threads))
        return list(pool.map(fn, tasks, chunksize=chunk))


# ---------------------------------------------------------------------------
# LIL trajectories
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LilTrajectory:
    n_grid: np.ndarray
    d_star: np.ndarray
    d_extremal: np.ndarray
    L_star: np.ndarray
    L_extremal: np.ndarray
    running_max: np.ndarray
    variant: str = "star"
    slack: float = 0.0
    source: dict = field(default_factory=dict)

    @property
    def statistic(self) -> np.ndarray:
        return self.L_star if self.variant == "star" else self.L_extremal

    @property
    def final(self) -> float:
        return float(self.statistic[-1])

    @property
    def non_generic(self) -> bool:
        """Flag degenerate orbits (e.g. x = 2, xi = 1 gives all zeros)."""
        return bool(self.d_extremal[-1] >= NON_GENERIC_D)

    def decade_growth(self) -> float:
        """running_max at the end over running_max at the last grid point <= n_max/10."""
        n_max = self.n_grid[-1]
        idx = np.nonzero(self.n_grid <= n_max / 10)[0]
        if idx.size == 0:
            return 1.0
        return float(self.running_max[-1] / self.running_max[idx[-1]])

    def rows(self):
        for i in range(self.n_grid.size):
            yield (int(self.n_grid[i]), float(self.d_star[i]), float(self.d_extremal[i]),
                   float(self.L_star[i]), float(self.L_extremal[i]), float(self.running_max[i]))


LIL_HEADER = ("N", "d_star", "d_extremal", "L_star", "L_extremal", "running_max")


def lil_scan(source, n_max: int, grid: str = "dyadic", variant: str = "star",
             explicit_grid=None) -> LilTrajectory:
    """L(N) = sqrt(N) D_N / sqrt(loglog N) along a grid of N values.

    The sorted prefix is updated by merging each new sorted block into it
    (a two-run stable sort), so every grid point costs O(N).
    """
    if variant not in ("star", "extremal"):
        raise ConfigError("variant must be 'star' or 'extremal'")
    ns = make_grid(grid, n_max, explicit_grid)
    points, info = points_from_source(source, ns[-1])
    vals = points.values
    acc = np.empty(0)
    prev = 0
    d_star, d_ext = [], []
    for N in ns:
        acc = np.sort(np.concatenate([acc, np.sort(vals[prev:N])]), kind="stable")
        prev = N
        i = np.arange(1, N + 1)
        d_plus = float(np.max(i / N - acc))
        d_minus = float(np.max(acc - (i - 1) / N))
        d_star.append(max(d_plus, d_minus))
        d_ext.append(d_plus + d_minus)
    n_arr = np.asarray(ns)
    scale = np.sqrt(n_arr) / np.sqrt([loglog(N) for N in ns])
    L_star = np.asarray(d_star) * scale
    L_ext = np.asarray(d_ext) * scale
    stat = L_star if variant == "star" else L_ext
    return LilTrajectory(n_arr, np.asarray(d_star), np.asarray(d_ext), L_star, L_ext,
                         np.maximum.accumulate(stat), variant, 2 * points.max_radius, info)


def _lil_task(args):
    source, n_max, grid, variant = args
    return lil_scan(source, n_max, grid, variant)


def lil_ensemble(sources, n_max: int, grid: str = "dyadic", variant: str = "star",
                 threads: int = 1) -> list[LilTrajectory]:
    return parallel_map(_lil_task, [(s, n_max, grid, variant) for s in sources], threads)


# ---------------------------------------------------------------------------
# CLT sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CltSample:
    n_terms: int
    n_draws: int
    xs: np.ndarray
    sums: np.ndarray
    norm: float
    ambiguous_points: int = 0

    @property
    def normalized_sums(self) -> np.ndarray:
        """T_x = sum f / (||f|| sqrt(N))."""
        return self.sums / (self.norm * math.sqrt(self.n_terms))

    @property
    def raw_normalized_sums(self) -> np.ndarray:
        """sum f / sqrt(N), without the norm factor."""
        return self.sums / math.sqrt(self.n_terms)

    @property
    def ks_distance(self) -> float:
        return ks_distance(self.normalized_sums)

    @property
    def ks_distance_raw(self) -> float:
        return ks_distance(self.raw_normalized_sums)


def _ambiguous(f: PeriodicFunction, pts: CertifiedPointList) -> int:
    if not isinstance(f, CenteredIndicator):
        return 0
    v, r = pts.values, pts.radii
    near = np.zeros(v.size, dtype=bool)
    for edge in (f.a, f.b, 0.0, 1.0):
        near |= np.abs(v - edge) <= r
    return int(near.sum())


def _clt_task(args):
    f, rule, xi, interval, n_list, seed, index, eps, bits = args
    x = sample_x(interval, derive_seed(seed, index), bits)
    pts = generate_power_orbit(OrbitSpec(xi, x, rule), max(n_list), eps)
    csum = np.cumsum(eval_function(f, pts.values))
    return float(x), [float(csum[n - 1]) for n in n_list], _ambiguous(f, pts)


def clt_samples(f: PeriodicFunction, rule: ExponentRule, xi, interval, n_terms_list,
                n_draws: int, seed: int, threads: int = 1, eps: float = DEFAULT_EPS,
                mantissa_bits: int = 53) -> dict[int, CltSample]:
    """CLT samples for several N from the same x draws (prefix sums of one orbit)."""
    if not is_admissible(f):
        raise ConfigError("f must have total variation <= 2")
    norm = l2_norm(f)
    if norm == 0:
        raise ConfigError("f has zero norm")
    if n_draws < 100:
        raise ConfigError("n_draws must be >= 100")
    n_list = sorted({int(n) for n in n_terms_list})
    if n_list[0] < 1:
        raise ConfigError("n_terms must be >= 1")
    interval = tuple(interval)
    tasks = [(f, rule, xi, interval, n_list, seed, i, eps, mantissa_bits) for i in range(n_draws)]
    results = parallel_map(_clt_task, tasks, threads)
    xs = np.array([r[0] for r in results])
    amb = sum(r[2] for r in results)
    out = {}
    for col, n in enumerate(n_list):
        sums = np.array([r[1][col] for r in results])
        out[n] = CltSample(n, n_draws, xs, sums, norm, amb)
    return out


def clt_sample(f: PeriodicFunction, rule: ExponentRule, xi, interval, n_terms: int,
               n_draws: int, seed: int, threads: int = 1, eps: float = DEFAULT_EPS,
               mantissa_bits: int = 53) -> CltSample:
    return clt_samples(f, rule, xi, interval, [n_terms], n_draws, seed, threads,
                       eps, mantissa_bits)[int(n_terms)]
