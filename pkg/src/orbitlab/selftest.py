"""Acceptance criteria as runnable checks.

Each ``criterion_*`` function returns a :class:`CriterionResult` whose
``detail`` holds only deterministic numbers, so the JSON written by
``orbitlab selftest`` is byte-identical across runs and worker counts.
Wall-clock times are reported separately.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .discrepancy import (
    brute_force_discrepancy,
    extremal_discrepancy,
    sandwich_check,
    star_discrepancy,
)
from .lilclt import REFERENCE, clt_samples, lil_ensemble, parallel_map
from .oscillatory import (
    PhaseSpec,
    lemma3_check,
    lemma4_check,
    lemma5_check,
    lemma5_partition,
)
from .periodic import CenteredIndicator, fourier_coefficients, l2_norm
from .seqgen import ExponentRule, OrbitSpec, derive_seed, generate_power_orbit, sample_x

DEFAULT_SEED = 20240601
INTERVAL = (1.1, 2.1)

# frozen envelopes (see README, "Acceptance criteria")
ORACLE_TOL = 1e-12
SANDWICH_LEVELS = range(1, 9)
LEMMA_TOL = 1e-6
STATIONARY_TOL = 1e-10
FOURIER_TOL = 1e-12
PARSEVAL_FRACTION = 0.99
CLT_N_SMALL, CLT_N_LARGE, CLT_DRAWS = 2**8, 2**12, 2000
CLT_KS_MAX, CLT_TREND_SLACK = 0.10, 0.02
LIL_ORBITS, LIL_N = 16, 10**5
LIL_BAND = (0.45, 1.05)
LIL_DECADE_GROWTH = 1.25
CERT_N, CERT_ORBITS, CERT_EPS = 10**4, 4, 2.0**-40


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] criterion {self.number}: {self.name} ({self.seconds:.1f} s)"

    def as_dict(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": self.passed,
                "detail": self.detail}


def _rng(seed, tag):
    return np.random.default_rng(np.random.SeedSequence([seed, tag]))


# ---------------------------------------------------------------------------

def criterion_oracle(seed=DEFAULT_SEED, instances=50) -> CriterionResult:
    rng = _rng(seed, 1)
    sizes = [1, 256] + list(rng.integers(1, 257, size=instances - 2))
    worst = 0.0
    for n in sizes:
        pts = rng.random(int(n))
        star, ext = brute_force_discrepancy(pts)
        worst = max(worst, abs(star - star_discrepancy(pts)), abs(ext - extremal_discrepancy(pts)))
    return CriterionResult(1, "discrepancy closed forms match brute force",
                           worst <= ORACLE_TOL,
                           {"instances": len(sizes), "max_abs_diff": worst})


def criterion_sandwich(seed=DEFAULT_SEED, instances=50) -> CriterionResult:
    rng = _rng(seed, 2)
    failures = []
    checked = 0
    for inst in range(instances):
        pts = rng.random(int(rng.integers(1, 2049)))
        for R in SANDWICH_LEVELS:
            w = sandwich_check(pts, R)
            checked += 1
            if not w.holds:
                failures.append({"instance": inst, **w.as_dict()})
    return CriterionResult(2, "sandwich inequality for R = 1..8", not failures,
                           {"checks": checked, "failures": failures[:5]})


def random_lemma3_phases(rng, count, interval=INTERVAL):
    A, B = interval
    out = []
    for _ in range(count):
        a, b = np.sort(rng.uniform(A, B, size=2))
        out.append(PhaseSpec.single(int(rng.integers(1, 5)), int(rng.integers(1, 9)),
                                    float(rng.uniform(0.25, 2.0)), float(a), float(b)))
    return out


def random_lemma4_phases(rng, count, interval=INTERVAL):
    A, B = interval
    out = []
    for _ in range(count):
        a, b = np.sort(rng.uniform(A, B, size=2))
        n = int(rng.integers(1, 8))
        m = int(rng.choice([v for v in range(1, 8) if v != n]))
        out.append(PhaseSpec.pair(int(rng.integers(1, 5)), int(rng.integers(1, 5)), n, m, 1,
                                  float(rng.uniform(0.25, 2.0)), float(a), float(b)))
    return out


def criterion_lemma34(seed=DEFAULT_SEED, cases=40) -> CriterionResult:
    rng = _rng(seed, 3)
    verdicts = [lemma3_check(p, LEMMA_TOL, f"l3-{i}")
                for i, p in enumerate(random_lemma3_phases(rng, cases))]
    verdicts += [lemma4_check(p, LEMMA_TOL, f"l4-{i}")
                 for i, p in enumerate(random_lemma4_phases(rng, cases))]
    failed = [v.case_id for v in verdicts if not v.passed]
    ratio = max(v.integral_abs / v.bound for v in verdicts)
    return CriterionResult(3, "oscillatory integral bounds (single and plus pairs)", not failed,
                           {"cases": len(verdicts), "failed": failed,
                            "max_integral_over_bound": ratio})


def random_partition_params(rng):
    m = int(rng.integers(1, 5))
    n = int(rng.integers(m + 1, 8))
    return dict(j=int(rng.integers(1, 7)), k=int(rng.integers(1, 7)), m=m, n=n,
                xi=float(rng.uniform(0.5, 2.0)), eta=float(rng.uniform(0.01, 0.2)))


def random_subinterval(rng, partition):
    parts = [iv for iv in partition.intervals if iv is not None]
    lengths = np.array([hi - lo for lo, hi in parts])
    lo, hi = parts[int(rng.choice(len(parts), p=lengths / lengths.sum()))]
    a, b = np.sort(rng.uniform(lo, hi, size=2))
    return float(a), float(b)


def stationary_residual(partition) -> float:
    """|phi'(x1)| relative to the size of either term of phi'."""
    p = partition.phase(1.0, 2.0)
    scale = p.xi * p.k * p.m * partition.x1 ** (p.m - 1)
    return float(abs(p.dphi(partition.x1)) / scale)


def criterion_lemma5(seed=DEFAULT_SEED, cases=40, subintervals=10) -> CriterionResult:
    rng = _rng(seed, 4)
    A, B = INTERVAL
    problems = []
    worst_residual = 0.0
    worst_ratio = 0.0
    for c in range(cases):
        prm = random_partition_params(rng)
        part = lemma5_partition(A=A, B=B, **prm)
        if not part.disjoint():
            problems.append(f"case {c}: intervals overlap")
        if part.excluded_measure > part.measure_cap:
            problems.append(f"case {c}: excluded measure above 2 B eta")
        res = stationary_residual(part)
        worst_residual = max(worst_residual, res)
        if res > STATIONARY_TOL:
            problems.append(f"case {c}: phi'(x1) residual {res:.3g}")
        for s in range(subintervals):
            a, b = random_subinterval(rng, part)
            v = lemma5_check(part, a, b, LEMMA_TOL, f"{c}.{s}")
            worst_ratio = max(worst_ratio, v.integral_abs / v.bound)
            if not v.passed:
                problems.append(f"case {c}.{s}: bound violated")
    return CriterionResult(4, "stationary-point partition", not problems,
                           {"cases": cases, "subintervals": subintervals,
                            "problems": problems[:10],
                            "max_stationary_residual": worst_residual,
                            "max_integral_over_bound": worst_ratio})


def criterion_fourier(seed=DEFAULT_SEED, functions=100, degree=1000) -> CriterionResult:
    rng = _rng(seed, 5)
    j = np.arange(1, degree + 1)
    worst_excess = -math.inf
    parseval_ok = True
    min_fraction = math.inf
    for _ in range(functions):
        a, b = np.sort(rng.uniform(0, 1, size=2))
        f = CenteredIndicator(float(a), float(b))
        ex = fourier_coefficients(f, degree)
        worst_excess = max(worst_excess, float(np.max(np.abs(ex.a) - 1 / j)),
                           float(np.max(np.abs(ex.b) - 1 / j)))
        norms = np.sqrt(0.5 * np.cumsum(ex.a[:64] ** 2 + ex.b[:64] ** 2))
        if np.any(np.diff(norms) < 0) or norms[-1] > l2_norm(f) + FOURIER_TOL:
            parseval_ok = False
        if 0.2 <= f.length <= 0.8:
            frac = norms[-1] / l2_norm(f)
            min_fraction = min(min_fraction, frac)
    # make sure the Parseval clause is exercised even if the draws miss the range
    for length in (0.2, 0.5, 0.8):
        ex = fourier_coefficients(CenteredIndicator(0.0, length), 64)
        frac = math.sqrt(0.5 * np.sum(ex.a**2 + ex.b**2)) / math.sqrt(length * (1 - length))
        min_fraction = min(min_fraction, frac)
    passed = worst_excess <= FOURIER_TOL and parseval_ok and min_fraction >= PARSEVAL_FRACTION
    return CriterionResult(5, "Fourier coefficient bound and Parseval", passed,
                           {"max_excess_over_1_over_j": worst_excess,
                            "parseval_monotone": parseval_ok,
                            "min_norm_fraction_d64": min_fraction})


def criterion_clt(seed=DEFAULT_SEED, threads=1, draws=CLT_DRAWS) -> CriterionResult:
    f = CenteredIndicator(0.0, 0.5)
    samples = clt_samples(f, ExponentRule.identity(), 1, INTERVAL,
                          [CLT_N_SMALL, CLT_N_LARGE], draws, seed, threads)
    ks_small = samples[CLT_N_SMALL].ks_distance
    ks_large = samples[CLT_N_LARGE].ks_distance
    passed = ks_large <= CLT_KS_MAX and ks_large <= ks_small + CLT_TREND_SLACK
    return CriterionResult(6, "CLT: KS distance to the standard normal", passed,
                           {"draws": draws, "ks_N256": ks_small, "ks_N4096": ks_large,
                            "ks_raw_N256": samples[CLT_N_SMALL].ks_distance_raw,
                            "ks_raw_N4096": samples[CLT_N_LARGE].ks_distance_raw})


def criterion_lil(seed=DEFAULT_SEED, threads=1, orbits=LIL_ORBITS, n_max=LIL_N) -> CriterionResult:
    power = [{"kind": "power", "interval": list(INTERVAL), "seed": derive_seed(seed, i)}
             for i in range(orbits)]
    iid = [{"kind": "iid", "seed": derive_seed(seed, 10_000 + i)} for i in range(orbits)]
    tr_power = lil_ensemble(power, n_max, "dyadic", "star", threads)
    tr_iid = lil_ensemble(iid, n_max, "dyadic", "star", threads)
    med_power = float(np.median([t.final for t in tr_power]))
    med_iid = float(np.median([t.final for t in tr_iid]))
    growth = float(np.median([t.decade_growth() for t in tr_power]))
    lo, hi = LIL_BAND
    passed = lo <= med_power <= hi and lo <= med_iid <= hi and growth <= LIL_DECADE_GROWTH
    return CriterionResult(7, "LIL band for power orbits and i.i.d. baseline", passed,
                           {"orbits": orbits, "n_max": n_max,
                            "median_L_star_power": med_power, "median_L_star_iid": med_iid,
                            "median_decade_growth": growth,
                            "reference": REFERENCE.lil_power_orbit,
                            "final_L_star_power": [t.final for t in tr_power]})


def _cert_task(args):
    seed, index, n = args
    x = sample_x(INTERVAL, derive_seed(seed, index), 53)
    spec = OrbitSpec(1, x)
    base = generate_power_orbit(spec, n, CERT_EPS)
    fine = generate_power_orbit(spec, n, CERT_EPS, precision=2 * base.precision_bits)
    moved = np.abs(base.values - fine.values)
    excess = float(np.max(moved - (base.radii + fine.radii)))
    return float(x), base.max_radius, excess, base.precision_bits


def criterion_certified(seed=DEFAULT_SEED, threads=1, orbits=CERT_ORBITS, n=CERT_N) -> CriterionResult:
    results = parallel_map(_cert_task, [(seed, 20_000 + i, n) for i in range(orbits)], threads)
    max_radius = max(r[1] for r in results)
    worst = max(r[2] for r in results)
    passed = max_radius < CERT_EPS and worst <= 0.0
    return CriterionResult(8, "certified generation and precision doubling", passed,
                           {"orbits": orbits, "n": n, "x": [r[0] for r in results],
                            "max_radius": max_radius, "max_move_minus_radii": worst,
                            "precision_bits": [r[3] for r in results]})


FAST = (criterion_oracle, criterion_sandwich, criterion_lemma34, criterion_lemma5,
        criterion_fourier, criterion_certified)
SLOW = (criterion_clt, criterion_lil)


def run(seed=DEFAULT_SEED, threads=1, full=False, echo=None) -> list[CriterionResult]:
    results = []
    for fn in FAST + (SLOW if full else ()):
        kwargs = {"seed": seed}
        if "threads" in fn.__code__.co_varnames:
            kwargs["threads"] = threads
        t0 = time.perf_counter()
        res = fn(**kwargs)
        res.seconds = time.perf_counter() - t0
        results.append(res)
        if echo:
            echo(res.line())
    return sorted(results, key=lambda r: r.number)
