"""Star, extremal and dyadic-restricted discrepancies of point sets in [0, 1).

All intervals are left-closed, right-open.  The closed forms work on the
sorted values; ``brute_force_discrepancy`` enumerates candidate endpoints
directly and serves as the independent oracle.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, InvariantViolation
from .seqgen import CertifiedPointList

BRUTE_FORCE_LIMIT = 4096
MAX_DYADIC_LEVEL = 20
SANDWICH_TOL = 1e-12


def _values(points) -> np.ndarray:
    if isinstance(points, CertifiedPointList):
        return points.values
    return np.asarray(points, dtype=np.float64)


def _radii(points) -> np.ndarray:
    if isinstance(points, CertifiedPointList):
        return points.radii
    return np.zeros(len(points))


def _sorted(points) -> np.ndarray:
    v = _values(points)
    if v.size == 0:
        raise ConfigError("need at least one point")
    # stable sort: ties keep original index order
    return v[np.argsort(v, kind="stable")]


class Count(NamedTuple):
    """Point count in [a, b) with the range allowed by the certified radii."""

    value: int
    low: int
    high: int

    @property
    def ambiguous(self) -> bool:
        return self.low != self.high


def empirical_measure(points, a: float, b: float) -> Count:
    """Number of points in [a, b).

    A point whose certified interval touches ``a`` or ``b`` may fall on
    either side, so ``low``/``high`` bracket the exact count.
    """
    if not (0.0 <= a < b <= 1.0):
        raise ConfigError("need 0 <= a < b <= 1")
    v, r = _values(points), _radii(points)
    inside = (v >= a) & (v < b)
    sure_in = (v - r >= a) & (v + r < b)
    maybe_in = (v + r >= a) & (v - r < b)
    return Count(int(inside.sum()), int(sure_in.sum()), int(maybe_in.sum()))


def _one_sided(xs: np.ndarray) -> tuple[float, float]:
    n = xs.size
    i = np.arange(1, n + 1)
    d_plus = float(np.max(i / n - xs))
    d_minus = float(np.max(xs - (i - 1) / n))
    return d_plus, d_minus


def star_discrepancy(points) -> float:
    """sup over 0 < a <= 1 of |#{x < a}/N - a|."""
    return max(_one_sided(_sorted(points)))


def extremal_discrepancy(points) -> float:
    """sup over 0 <= a < b <= 1 of |#{a <= x < b}/N - (b - a)|."""
    d_plus, d_minus = _one_sided(_sorted(points))
    return d_plus + d_minus


def brute_force_discrepancy(points) -> tuple[float, float]:
    """(star, extremal) by enumerating every candidate endpoint pair.

    Candidates are 0, 1, each point value t (counting points < t) and each
    right limit t+ (counting points <= t).  O(N^2), guarded at 4096 points.
    """
    v = _values(points)
    n = v.size
    if n == 0:
        raise ConfigError("need at least one point")
    if n > BRUTE_FORCE_LIMIT:
        raise ConfigError(f"brute force limited to {BRUTE_FORCE_LIMIT} points")
    xs = np.sort(v)
    pos = np.concatenate([[0.0], xs, xs, [1.0]])
    cnt = np.concatenate([
        [0],
        np.searchsorted(xs, xs, side="left"),
        np.searchsorted(xs, xs, side="right"),
        [n],
    ]).astype(np.float64)
    # the limit candidates sit just right of their position
    side = np.concatenate([[0], np.zeros(n), np.ones(n), [0]])
    g = cnt / n - pos

    anchored = pos > 0
    anchored |= side == 1
    star = float(np.max(np.abs(g[anchored])))

    # walk candidates in (pos, side) order; every later candidate is a valid b
    order = np.lexsort((side, pos))
    g_ord = g[order]
    extremal = 0.0
    for i in range(g_ord.size - 1):
        extremal = max(extremal, float(np.max(np.abs(g_ord[i + 1:] - g_ord[i]))))
    return star, extremal


@dataclass(frozen=True)
class DiscrepancyReport:
    n_points: int
    d_star: float
    d_extremal: float
    certified_slack: float


def discrepancy_report(points) -> DiscrepancyReport:
    """Star and extremal discrepancy plus the slack induced by point radii.

    Moving every point by at most r changes D* by at most r and D by at
    most 2r, so the slack is twice the largest radius.
    """
    xs = _sorted(points)
    d_plus, d_minus = _one_sided(xs)
    radii = _radii(points)
    slack = 2.0 * float(radii.max()) if radii.size else 0.0
    return DiscrepancyReport(xs.size, max(d_plus, d_minus), d_plus + d_minus, slack)


def _check_level(R: int, cap: int | None = None) -> None:
    if not isinstance(R, (int, np.integer)) or R < 1:
        raise ConfigError("dyadic level R must be an integer >= 1")
    if cap is not None and R > cap:
        raise ConfigError(f"dyadic level R={R} exceeds the cap {cap}")


def dyadic_small_discrepancy(points, R: int) -> float:
    """sup over cells a*2^-R and 0 <= b <= 2^-R of |(1/N) sum I_[a2^-R, a2^-R+b)|.

    Within a cell the deviation is piecewise linear in b with jumps at the
    local point coordinates, so the supremum is attained at b = 0, at
    b = 2^-R, just before a jump or just after it.
    """
    _check_level(R, 52)
    xs = _sorted(points)
    n = xs.size
    h = 2.0**-R
    cells = np.floor(xs * 2.0**R).astype(np.int64)
    local = xs - cells * h  # exact: scaling by 2^R and subtracting a grid point
    first = np.searchsorted(cells, cells, side="left")
    rank = np.arange(n) - first  # points of the same cell before this one
    after = np.max(np.abs((rank + 1) / n - local))
    before = np.max(np.abs(rank / n - local))
    ncells = 2**R
    occupied = np.bincount(cells, minlength=ncells) if R <= MAX_DYADIC_LEVEL else None
    if occupied is not None:
        full = np.max(np.abs(occupied / n - h))
    else:
        # only occupied cells can beat the empty-cell value h
        _, counts = np.unique(cells, return_counts=True)
        full = max(float(np.max(np.abs(counts / n - h))), h if counts.size < ncells else 0.0)
    return float(max(after, before, full))


def _grid_deviation(xs: np.ndarray, R: int) -> np.ndarray:
    k = np.arange(2**R + 1)
    grid = k * 2.0**-R
    counts = np.searchsorted(xs, grid, side="left")
    return counts / xs.size - grid


def dyadic_large_discrepancy(points, R: int) -> tuple[float, float]:
    """(D^(>=2^-R), D*^(>=2^-R)) over intervals with endpoints on the 2^-R grid.

    With G(k) = #{x < k 2^-R}/N - k 2^-R the value for [a2^-R, b2^-R) is
    G(b) - G(a), so the maximum over all grid pairs is max G - min G.
    """
    _check_level(R, MAX_DYADIC_LEVEL)
    g = _grid_deviation(_sorted(points), R)
    return float(g.max() - g.min()), float(np.max(np.abs(g[1:])))


def dyadic_large_enumerated(points, R: int) -> tuple[float, float]:
    """Pairwise enumeration of the grid intervals; O(4^R), oracle only."""
    _check_level(R, 12)
    g = _grid_deviation(_sorted(points), R)
    diff = np.abs(g[None, :] - g[:, None])
    upper = np.triu(diff, k=1)
    return float(upper.max()), float(np.max(diff[0, 1:]))


@dataclass(frozen=True)
class DyadicReport:
    r_level: int
    d_small: float
    d_large: float
    d_large_star: float


def dyadic_report(points, R: int) -> DyadicReport:
    d_large, d_large_star = dyadic_large_discrepancy(points, R)
    return DyadicReport(R, dyadic_small_discrepancy(points, R), d_large, d_large_star)


@dataclass(frozen=True)
class SandwichWitness:
    r_level: int
    d_large_star: float
    d_star: float
    d_extremal: float
    d_large: float
    d_small: float
    slack: float
    holds: bool

    def as_dict(self) -> dict:
        return asdict(self)


def sandwich_check(points, R: int, raise_on_failure: bool = False) -> SandwichWitness:
    """Evaluate D*^(>=) <= D* <= D <= D^(>=) + 3 D^(<=) on ``points``.

    The comparison allows the certified slack plus 1e-12.
    """
    rep = discrepancy_report(points)
    dy = dyadic_report(points, R)
    tol = rep.certified_slack + SANDWICH_TOL
    holds = (
        dy.d_large_star <= rep.d_star + tol
        and rep.d_star <= rep.d_extremal + tol
        and rep.d_extremal <= dy.d_large + 3 * dy.d_small + tol
    )
    w = SandwichWitness(R, dy.d_large_star, rep.d_star, rep.d_extremal,
                        dy.d_large, dy.d_small, rep.certified_slack, holds)
    if raise_on_failure and not holds:
        raise InvariantViolation(f"sandwich inequality fails at R={R}", w.as_dict())
    return w


def full_report(points, R: int) -> dict:
    """The JSON report {n, d_star, d_extremal, r, d_small, d_large, d_large_star, slack}."""
    rep = discrepancy_report(points)
    dy = dyadic_report(points, R)
    return {
        "n": rep.n_points,
        "d_star": rep.d_star,
        "d_extremal": rep.d_extremal,
        "r": R,
        "d_small": dy.d_small,
        "d_large": dy.d_large,
        "d_large_star": dy.d_large_star,
        "slack": rep.certified_slack,
    }


def check_report_invariants(rep: DiscrepancyReport) -> None:
    tol = rep.certified_slack + SANDWICH_TOL
    if not (0 <= rep.d_star <= rep.d_extremal + tol
            and rep.d_extremal <= min(1.0, 2 * rep.d_star) + tol):
        raise InvariantViolation("discrepancy report out of range", asdict(rep))

