import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orbitlab.discrepancy import (
    brute_force_discrepancy,
    discrepancy_report,
    dyadic_large_discrepancy,
    dyadic_large_enumerated,
    dyadic_small_discrepancy,
    empirical_measure,
    extremal_discrepancy,
    full_report,
    sandwich_check,
    star_discrepancy,
)
from orbitlab.errors import ConfigError, InvariantViolation
from orbitlab.seqgen import CertifiedPointList, OrbitSpec, generate_power_orbit, sample_x


def naive_discrepancies(xs):
    """Direct enumeration of interval endpoints (value, just-right-of-value) with
    counts taken from the raw point list; independent of the sorted formulas."""
    xs = list(map(float, xs))
    n = len(xs)
    ends = [(0.0, 0), (1.0, 0)] + [(x, 0) for x in xs] + [(x, 1) for x in xs]

    def below(e):  # number of points in [0, e)
        p, right = e
        return sum(1 for x in xs if (x <= p if right else x < p))

    star = max(abs(below(e) / n - e[0]) for e in ends if e[0] > 0 or e[1])
    ext = 0.0
    for a in ends:
        for b in ends:
            if b < a:
                continue
            ext = max(ext, abs((below(b) - below(a)) / n - (b[0] - a[0])))
    return star, ext


# --- empirical measure --------------------------------------------------------

def test_measure_half_open():
    pts = CertifiedPointList.exact([0.1, 0.5, 0.9])
    assert empirical_measure(pts, 0.0, 0.5).value == 1
    assert empirical_measure(pts, 0.0, 1.0).value == 3
    assert empirical_measure(CertifiedPointList.exact([0.5]), 0.5, 0.6).value == 1


def test_measure_ambiguous_flag():
    pts = CertifiedPointList(np.array([0.5]), np.array([1e-3]))
    c = empirical_measure(pts, 0.0, 0.5)
    assert c.ambiguous and c.low == 0 and c.high == 1


def test_measure_bad_interval():
    with pytest.raises(ConfigError):
        empirical_measure(CertifiedPointList.exact([0.1]), 0.6, 0.5)


# --- star and extremal --------------------------------------------------------

def test_single_point():
    assert star_discrepancy([0.5]) == 0.5
    assert extremal_discrepancy([0.5]) == 1.0
    assert brute_force_discrepancy([0.5]) == (0.5, 1.0)


def test_equidistant_star():
    assert star_discrepancy([0, 0.25, 0.5, 0.75]) == 0.25
    assert brute_force_discrepancy([0, 0.25, 0.5, 0.75])[0] == 0.25


def test_shifted_grid_extremal():
    pts = [0.125, 0.375, 0.625, 0.875]
    assert extremal_discrepancy(pts) == pytest.approx(0.25, abs=1e-15)
    assert naive_discrepancies(pts)[1] == pytest.approx(0.25, abs=1e-15)


@pytest.mark.parametrize("p", [0.0, 0.1, 0.37, 0.999])
def test_any_single_point_extremal_is_one(p):
    assert extremal_discrepancy([p]) == pytest.approx(1.0, abs=1e-15)


def test_star_against_oracle_100_points():
    pts = np.random.default_rng(0).random(100)
    assert abs(star_discrepancy(pts) - brute_force_discrepancy(pts)[0]) <= 1e-12


@pytest.mark.parametrize("seed", range(12))
def test_closed_forms_against_naive_enumeration(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 40))
    pts = rng.random(n)
    if seed % 3 == 0:  # ties and grid values
        pts = np.round(pts * 8) / 8 % 1.0
    star, ext = naive_discrepancies(pts)
    assert abs(star_discrepancy(pts) - star) <= 1e-12
    assert abs(extremal_discrepancy(pts) - ext) <= 1e-12
    bstar, bext = brute_force_discrepancy(pts)
    assert abs(bstar - star) <= 1e-12 and abs(bext - ext) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0, 1, exclude_max=True), min_size=1, max_size=60), st.randoms())
def test_permutation_and_duplication(values, rnd):
    pts = np.array(values)
    shuffled = pts.copy()
    rnd.shuffle(shuffled)
    assert star_discrepancy(shuffled) == star_discrepancy(pts)
    assert extremal_discrepancy(shuffled) == extremal_discrepancy(pts)
    doubled = np.concatenate([pts, pts])
    assert star_discrepancy(doubled) == pytest.approx(star_discrepancy(pts), abs=1e-12)
    assert extremal_discrepancy(doubled) == pytest.approx(extremal_discrepancy(pts), abs=1e-12)
    assert star_discrepancy(pts) <= extremal_discrepancy(pts) <= 2 * star_discrepancy(pts) + 1e-15


def test_brute_force_guard():
    with pytest.raises(ConfigError):
        brute_force_discrepancy(np.zeros(4097))


def test_report_slack_from_radii():
    pts = CertifiedPointList(np.array([0.2, 0.7]), np.array([1e-12, 3e-12]))
    assert discrepancy_report(pts).certified_slack == 6e-12


# --- dyadic variants ----------------------------------------------------------

def naive_small(xs, R, fine=2001):
    """Scan b over a fine grid plus both sides of every cell-local coordinate."""
    xs = np.asarray(xs, dtype=float)
    n, h = xs.size, 2.0**-R
    best = 0.0
    for a in range(2**R):
        lo = a * h
        local = xs[(xs >= lo) & (xs < lo + h)] - lo
        bs = np.concatenate([np.linspace(0, h, fine), local, np.minimum(local + 1e-13, h)])
        for b in bs:
            best = max(best, abs(np.count_nonzero((xs >= lo) & (xs < lo + b)) / n - b))
    return best


def test_small_single_point():
    assert dyadic_small_discrepancy([0.3], 1) == pytest.approx(0.7, abs=1e-15)


def test_small_empty_cell():
    # the empty cell [1/2, 1) alone contributes |0 - b| up to b = 1/2
    assert naive_small([0.3], 1) >= 0.5
    assert dyadic_small_discrepancy([0.3], 1) >= 0.5


@pytest.mark.parametrize("R", [1, 3, 5])
def test_small_equidistant(R):
    n = 2**R
    assert dyadic_small_discrepancy(np.arange(n) / n, R) == pytest.approx(1 / n, abs=1e-15)


@pytest.mark.parametrize("seed", range(6))
def test_small_against_scan(seed):
    rng = np.random.default_rng(100 + seed)
    pts = rng.random(int(rng.integers(1, 30)))
    R = int(rng.integers(1, 4))
    got = dyadic_small_discrepancy(pts, R)
    scanned = naive_small(pts, R)
    assert scanned <= got + 1e-12
    assert got - scanned <= 1e-9


def test_large_single_point():
    assert dyadic_large_discrepancy([0.5], 1)[1] == 0.5


@pytest.mark.parametrize("R", [1, 4, 8])
def test_large_equidistant_zero(R):
    n = 2**R
    d_large, d_star = dyadic_large_discrepancy(np.arange(n) / n, R)
    assert d_large == 0.0 and d_star == 0.0


@pytest.mark.parametrize("seed", range(50))
def test_large_maxmin_matches_enumeration(seed):
    rng = np.random.default_rng(200 + seed)
    pts = rng.random(int(rng.integers(1, 300)))
    R = int(rng.integers(1, 9))
    fast = dyadic_large_discrepancy(pts, R)
    slow = dyadic_large_enumerated(pts, R)
    assert fast[0] == pytest.approx(slow[0], abs=1e-15)
    assert fast[1] == pytest.approx(slow[1], abs=1e-15)
    assert fast[1] <= fast[0]


def test_level_guards():
    with pytest.raises(ConfigError):
        dyadic_large_discrepancy([0.1], 21)
    with pytest.raises(ConfigError):
        dyadic_small_discrepancy([0.1], 0)


# --- sandwich ---------------------------------------------------------------

@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("R", [1, 2, 3, 4, 5])
def test_sandwich_random(seed, R):
    pts = np.random.default_rng(seed).random(200)
    assert sandwich_check(pts, R).holds


def test_sandwich_single_point():
    w = sandwich_check([0.5], 1)
    assert (w.d_large_star, w.d_star, w.d_extremal) == (0.5, 0.5, 1.0)
    assert w.d_extremal <= w.d_large + 3 * w.d_small
    assert w.holds


def test_sandwich_equidistant():
    w = sandwich_check(np.arange(16) / 16, 4)
    assert w.d_large_star == 0.0 and w.holds


def test_sandwich_power_orbit():
    pts = generate_power_orbit(OrbitSpec(1, sample_x((1.1, 2.1), 4)), 3000)
    for R in range(1, 9):
        assert sandwich_check(pts, R, raise_on_failure=True).holds


def test_sandwich_violation_raises(monkeypatch):
    import orbitlab.discrepancy as d
    monkeypatch.setattr(d, "dyadic_small_discrepancy", lambda pts, R: -1.0)
    with pytest.raises(InvariantViolation) as exc:
        d.sandwich_check([0.3, 0.6], 1, raise_on_failure=True)
    assert exc.value.witness["holds"] is False


def test_full_report_keys():
    rep = full_report(CertifiedPointList.exact([0, 0.25, 0.5, 0.75]), 2)
    assert set(rep) == {"n", "d_star", "d_extremal", "r", "d_small", "d_large",
                        "d_large_star", "slack"}
    assert rep["d_star"] == 0.25
