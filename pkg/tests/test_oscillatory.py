import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from scipy.special import fresnel

from orbitlab.errors import (
    ConfigError,
    InvariantViolation,
    PreconditionError,
    QuadratureBudgetError,
)
from orbitlab.oscillatory import (
    PhaseSpec,
    Verdict,
    lemma3_bound,
    lemma3_check,
    lemma4_bound,
    lemma4_check,
    lemma5_check,
    lemma5_partition,
    osc_integral,
    stationary_points,
    vdc_check,
    vdc_pieces,
)


def fresnel_oracle(a, b):
    """int_a^b exp(2 pi i x^2) dx through the Fresnel integrals at t = 2x."""
    sa, ca = fresnel(2 * a)
    sb, cb = fresnel(2 * b)
    return 0.5 * complex(cb - ca, sb - sa)


def mpmath_oracle(phase, a, b):
    mpmath.mp.dps = 30
    f = lambda x: mpmath.expjpi(2 * phase.xi * (phase.j * x**phase.n
                                                 + phase.sign * phase.k * x**phase.m))
    pts = np.linspace(a, b, 200)
    return complex(mpmath.quad(f, list(map(mpmath.mpf, pts))))


# --- quadrature ---------------------------------------------------------------

def test_full_period_linear_phase():
    r = osc_integral(PhaseSpec.single(1, 1, 1.0, 0.0, 1.0), 1e-10)
    assert abs(r.value) <= 1e-10 and r.error_bound <= 1e-10


@pytest.mark.parametrize("a,b", [(1.1, 2.1), (0.0, 3.0), (2.0, 5.5)])
def test_quadratic_phase_against_fresnel(a, b):
    r = osc_integral(PhaseSpec.single(1, 2, 1.0, a, b), 1e-10)
    assert abs(r.value - fresnel_oracle(a, b)) <= 1e-10
    assert r.error_bound <= 1e-10


def test_quadratic_phase_bound():
    r = osc_integral(PhaseSpec.single(1, 2, 1.0, 1.1, 2.1), 1e-8)
    assert abs(r.value.real) <= 1 / 2.2 + 1e-8


def test_pair_phase_against_mpmath():
    ph = PhaseSpec.pair(2, 3, 4, 2, -1, 0.75, 1.1, 2.1)
    r = osc_integral(ph, 1e-10)
    assert abs(r.value - mpmath_oracle(ph, 1.1, 2.1)) <= 1e-9


def test_conjugate_symmetry():
    ph = PhaseSpec.pair(1, 2, 3, 1, 1, 1.3, 1.1, 2.1)
    tol = 1e-9
    a = osc_integral(ph, tol)
    b = osc_integral(ph.negated(), tol)
    assert abs(b.value - a.value.conjugate()) <= 2 * tol


def test_budget_error():
    with pytest.raises(QuadratureBudgetError):
        osc_integral(PhaseSpec.single(50, 8, 2.0, 1.1, 2.1), 1e-8, budget=2000)


def test_tol_range():
    with pytest.raises(ConfigError):
        osc_integral(PhaseSpec.single(1, 2), 0.1)


# --- single and plus-sign bounds -------------------------------------------------

def test_lemma3_bound_values():
    assert lemma3_bound(1, 1, 2, 1.1) == pytest.approx(1 / 2.2)
    assert lemma3_bound(3, 2, 5, 1.5) == pytest.approx(1 / 151.875)


def test_lemma4_bound_values():
    assert lemma4_bound(1, 2, 3, 1.1) == pytest.approx(1 / (3 * 1.1**2))
    assert lemma4_bound(1, 3, 10, 1.5) == pytest.approx(1 / (10 * 1.5**9))
    assert lemma4_bound(1, 2, 3, 1.1) == pytest.approx(0.27548, abs=1e-5)


def test_lemma4_example():
    v = lemma4_check(PhaseSpec.pair(1, 1, 3, 2, 1, 1.0, 1.1, 2.1))
    assert v.passed and v.integral_abs < v.bound


@pytest.mark.parametrize("seed", range(20))
def test_lemma3_random(seed):
    rng = np.random.default_rng(seed)
    a, b = np.sort(rng.uniform(1.1, 2.1, 2))
    ph = PhaseSpec.single(int(rng.integers(1, 5)), int(rng.integers(1, 9)),
                          float(rng.uniform(0.25, 2)), float(a), float(b))
    assert lemma3_check(ph, 1e-6).passed


@pytest.mark.parametrize("seed", range(20))
def test_lemma4_random(seed):
    rng = np.random.default_rng(1000 + seed)
    a, b = np.sort(rng.uniform(1.1, 2.1, 2))
    n = int(rng.integers(1, 8))
    m = int(rng.choice([v for v in range(1, 8) if v != n]))
    ph = PhaseSpec.pair(int(rng.integers(1, 5)), int(rng.integers(1, 5)), n, m, 1,
                        float(rng.uniform(0.25, 2)), float(a), float(b))
    assert lemma4_check(ph, 1e-6).passed


def test_preconditions():
    with pytest.raises(PreconditionError):
        lemma4_check(PhaseSpec.pair(1, 1, 3, 2, -1))
    with pytest.raises(PreconditionError):
        lemma3_check(PhaseSpec.single(1, 2, 1.0, 0.5, 2.0))
    with pytest.raises(ConfigError):
        PhaseSpec.pair(1, 1, 2, 3, -1)


def test_failed_verdict_raises():
    with pytest.raises(InvariantViolation):
        Verdict("x", "lemma3", 0.0, 1.0, 0.0, False).raise_if_failed()


# --- monotone-derivative pieces ------------------------------------------------

def test_vdc_pieces_split_at_critical_points():
    ph = PhaseSpec.pair(1, 3, 2, 1, -1, 1.0, 1.1, 2.1)  # phi' vanishes at 1.5
    pieces = vdc_pieces(ph)
    assert pieces == [(1.1, 1.5), (1.5, 2.1)]


@pytest.mark.parametrize("seed", range(10))
def test_vdc_bound_random(seed):
    rng = np.random.default_rng(2000 + seed)
    m = int(rng.integers(1, 4))
    n = int(rng.integers(m + 1, 6))
    ph = PhaseSpec.pair(int(rng.integers(1, 4)), int(rng.integers(1, 6)), n, m, -1,
                        float(rng.uniform(0.5, 2)), 1.1, 2.1)
    assert all(v.passed for v in vdc_check(ph))


# --- partition ------------------------------------------------------------------

def test_stationary_points_examples():
    assert stationary_points(1, 3, 1, 2) == (1.5, 0.0)
    x1, x2 = stationary_points(1, 1, 2, 3)
    assert x1 == pytest.approx(2 / 3) and x2 == pytest.approx(1 / 3)
    x1, _ = stationary_points(3, 7, 2, 5)
    assert x1 == pytest.approx((14 / 15) ** (1 / 3))


def test_partition_below_interval():
    part = lemma5_partition(1, 1, 2, 3, 1.0, 0.1, 1.1, 2.1)
    assert part.intervals[0] is None and part.intervals[1] is None
    assert part.intervals[2] == (1.1, 2.1)
    assert part.excluded_measure == 0


def test_partition_measure_example():
    part = lemma5_partition(3, 7, 2, 5, 1.0, 0.01, 1.1, 2.1)
    assert part.covered_measure >= 1 - 2 * Fraction(2.1) * Fraction(0.01)
    assert part.excluded_measure <= part.measure_cap


def test_partition_examples_bound():
    part = lemma5_partition(1, 3, 1, 2, 1.0, 0.05, 1.1, 2.1)
    assert part.x1 == 1.5 and part.x2 == 0.0
    v = lemma5_check(part, 1.6, 2.0)
    assert v.bound == pytest.approx(20.0) and v.passed


def test_straddling_subinterval():
    part = lemma5_partition(1, 3, 1, 2, 1.0, 0.05, 1.1, 2.1)
    with pytest.raises(PreconditionError):
        lemma5_check(part, 1.4, 1.6)


def test_tight_case():
    part = lemma5_partition(1, 1, 4, 5, 1.0, 0.1, 1.1, 2.1)
    rng = np.random.default_rng(7)
    for _ in range(10):
        a, b = np.sort(rng.uniform(1.5, 2.1, 2))
        v = lemma5_check(part, float(a), float(b))
        assert v.passed
    assert part.guaranteed_bound(1.5) == pytest.approx(1 / (0.1 * 4 * 1.5**3))
    assert part.guaranteed_bound(1.5) == pytest.approx(0.7407, abs=1e-4)


@pytest.mark.parametrize("seed", range(25))
def test_partition_invariants(seed):
    rng = np.random.default_rng(3000 + seed)
    m = int(rng.integers(1, 5))
    n = int(rng.integers(m + 1, 8))
    j, k = int(rng.integers(1, 7)), int(rng.integers(1, 7))
    eta = float(rng.uniform(0.01, 0.2))
    A, B = 1.1, 2.1
    part = lemma5_partition(j, k, m, n, 1.0, eta, A, B)
    ivs = [iv for iv in part.intervals if iv is not None]
    for (lo1, hi1), (lo2, hi2) in zip(ivs, ivs[1:]):
        assert Fraction(hi1) <= Fraction(lo2)
    excluded = Fraction(B) - Fraction(A) - sum(Fraction(h) - Fraction(l) for l, h in ivs)
    assert excluded == part.excluded_measure
    assert excluded <= 2 * Fraction(B) * Fraction(eta)
    # derivative signs are constant inside each interval
    ph = PhaseSpec.pair(j, k, n, m, -1, 1.0, A, B)
    for lo, hi in ivs:
        if hi - lo < 1e-9:
            continue
        x = np.linspace(lo, hi, 1002)[1:-1]
        d1, d2 = ph.dphi(x), ph.d2phi(x)
        assert np.all(d1 > 0) or np.all(d1 < 0)
        if m > 1:
            assert np.all(d2 >= 0) or np.all(d2 <= 0)
