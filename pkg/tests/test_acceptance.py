"""Acceptance criteria 1-9, each at its stated tolerance.

Run with pytest (the summary lists one PASS/FAIL line per criterion) or
directly with ``python tests/test_acceptance.py``.
"""

import hashlib
import json
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from orbitlab import selftest as st
from orbitlab.discrepancy import brute_force_discrepancy, extremal_discrepancy, star_discrepancy

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = []


def record(number, name, passed, detail, seconds):
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {name} - {detail} ({seconds:.1f} s)"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    res = fn(*args, **kwargs)
    return res, time.perf_counter() - t0


def test_criterion_1_oracle_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(np.random.SeedSequence([st.DEFAULT_SEED, 101]))
    sizes = [1, 256] + [int(n) for n in rng.integers(1, 257, size=48)]
    worst = 0.0
    for n in sizes:
        pts = rng.random(n)
        star, ext = brute_force_discrepancy(pts)
        worst = max(worst, abs(star - star_discrepancy(pts)), abs(ext - extremal_discrepancy(pts)))
    # the packaged selftest runs the same check on its own draws
    res = st.criterion_oracle()
    secs = time.perf_counter() - t0
    ok = worst <= 1e-12 and res.detail["max_abs_diff"] <= 1e-12 and secs < 10
    assert record(1, "closed forms vs brute force, 50 instances, N in 1..256, tol 1e-12", ok,
                  f"max diff {max(worst, res.detail['max_abs_diff']):.2e}", secs)


def test_criterion_2_sandwich():
    res, secs = timed(st.criterion_sandwich)
    ok = res.passed and res.detail["checks"] == 50 * 8 and secs < 30
    assert record(2, "sandwich inequality, 50 instances, R = 1..8, slack 1e-12", ok,
                  f"{res.detail['checks']} checks, {len(res.detail['failures'])} failures", secs)


def test_criterion_3_single_and_plus_pair_bounds():
    res, secs = timed(st.criterion_lemma34)
    ok = res.passed and res.detail["cases"] == 80 and secs < 60
    assert record(3, "oscillatory bounds, 40 single + 40 plus-pair cases, tol 1e-6", ok,
                  f"max |int|/bound {res.detail['max_integral_over_bound']:.3f}", secs)


def test_criterion_4_partition():
    res, secs = timed(st.criterion_lemma5)
    ok = (res.passed and res.detail["max_stationary_residual"] <= 1e-10
          and res.detail["cases"] == 40 and res.detail["subintervals"] == 10 and secs < 60)
    assert record(4, "partition: disjoint, excluded <= 2B eta, phi'(x1) = 0 within 1e-10, "
                     "10 subintervals x 40 cases", ok,
                  f"residual {res.detail['max_stationary_residual']:.1e}, "
                  f"max |int|/bound {res.detail['max_integral_over_bound']:.3f}", secs)


def test_criterion_5_fourier():
    res, secs = timed(st.criterion_fourier)
    ok = (res.passed and res.detail["max_excess_over_1_over_j"] <= 1e-12
          and res.detail["min_norm_fraction_d64"] >= 0.99 and secs < 10)
    assert record(5, "|a_j|, |b_j| <= 1/j + 1e-12 for j <= 1000; ||p_64|| >= 0.99 ||f||", ok,
                  f"excess {res.detail['max_excess_over_1_over_j']:.2e}, "
                  f"fraction {res.detail['min_norm_fraction_d64']:.4f}", secs)


def test_criterion_6_clt():
    res, secs = timed(st.criterion_clt)
    d = res.detail
    ok = (d["ks_N4096"] <= 0.10 and d["ks_N4096"] <= d["ks_N256"] + 0.02
          and d["draws"] == 2000 and secs < 15 * 60)
    assert record(6, "CLT KS(2^12) <= 0.10 and KS(2^12) <= KS(2^8) + 0.02, M = 2000", ok,
                  f"KS(2^8) {d['ks_N256']:.4f}, KS(2^12) {d['ks_N4096']:.4f}", secs)


def test_criterion_7_lil():
    res, secs = timed(st.criterion_lil)
    d = res.detail
    ok = (0.45 <= d["median_L_star_power"] <= 1.05 and 0.45 <= d["median_L_star_iid"] <= 1.05
          and d["median_decade_growth"] <= 1.25 and d["orbits"] == 16 and d["n_max"] == 10**5
          and secs < 20 * 60)
    assert record(7, "LIL medians in [0.45, 1.05] (power and i.i.d.), last-decade growth <= 25%", ok,
                  f"power {d['median_L_star_power']:.4f}, iid {d['median_L_star_iid']:.4f}, "
                  f"growth {d['median_decade_growth']:.3f}", secs)


def test_criterion_8_certified_generation():
    res, secs = timed(st.criterion_certified)
    d = res.detail
    ok = d["max_radius"] < 2.0**-40 and d["max_move_minus_radii"] <= 0.0 and secs < 120
    assert record(8, "N = 1e4 radii < 2^-40, doubled precision moves <= summed radii", ok,
                  f"max radius {d['max_radius']:.2e}", secs)


def _selftest_run(out: Path, threads: int) -> bytes:
    proc = subprocess.run([sys.executable, "-m", "orbitlab", "selftest", "--full",
                           "--threads", str(threads), "--out", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode in (0, 1), proc.stderr
    return (out / "selftest.json").read_bytes()


def test_criterion_9_determinism(tmp_path):
    t0 = time.perf_counter()
    first = _selftest_run(tmp_path / "a", 1)
    second = _selftest_run(tmp_path / "b", 2)
    secs = time.perf_counter() - t0
    ok = first == second
    crit = {c["number"] for c in json.loads(first)["criteria"]}
    ok = ok and crit == {1, 2, 3, 4, 5, 6, 7, 8}
    assert record(9, "full selftest twice (--threads 1 and 2) gives byte-identical artifacts", ok,
                  f"sha256 {hashlib.sha256(first).hexdigest()[:12]} vs "
                  f"{hashlib.sha256(second).hexdigest()[:12]}", secs)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
