"""Unit-interval point sequences with certified error radii.

Power orbits ``frac(xi * x**s_n)`` are evaluated with gmpy2 interval
arithmetic (a round-down and a round-up context carried side by side), so
every emitted value comes with a rigorous distance bound to the exact
fractional part.  ``x`` and ``xi`` are exact dyadic rationals, which makes
the orbit well defined at any finite precision.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import gmpy2
import numpy as np

from .errors import ConfigError, PrecisionCapError, StraddleError

DEFAULT_EPS = 2.0**-40
PRECISION_CAP = 2**24
MAX_RETRIES = 8
GUARD_BITS = 64
LINEAR_EPS = 2.0**-40


# ---------------------------------------------------------------------------
# exact inputs
# ---------------------------------------------------------------------------

def _is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def as_dyadic(value, name: str = "value") -> Fraction:
    """Convert ``value`` to an exact dyadic Fraction or raise ConfigError.

    Floats are always dyadic.  Strings are parsed as decimal literals and
    must denote a dyadic rational (``"1.5"`` is fine, ``"0.1"`` is not).
    """
    if isinstance(value, bool):
        raise ConfigError(f"{name}: expected a number, got {value!r}")
    try:
        q = Fraction(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: cannot interpret {value!r} as a number") from exc
    if not _is_power_of_two(q.denominator):
        raise ConfigError(f"{name}: {value!r} is not a dyadic rational")
    return q


def _log2(q: Fraction) -> float:
    return math.log2(q.numerator) - math.log2(q.denominator)


def _to_mpfr(q: Fraction) -> gmpy2.mpfr:
    # exact: the numerator fits in the chosen precision and the scaling is a power of two
    prec = max(q.numerator.bit_length(), 2)
    num = gmpy2.mpfr(q.numerator, prec)
    return gmpy2.div_2exp(num, q.denominator.bit_length() - 1)


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExponentRule:
    """Strictly increasing positive integer exponents ``s_1 < s_2 < ...``.

    ``kind`` is one of ``identity`` (s_n = n), ``affine``
    (s_n = start + (n-1)*step) or ``explicit`` (a finite list).
    """

    kind: str = "identity"
    start: int = 1
    step: int = 1
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in ("identity", "affine", "explicit"):
            raise ConfigError(f"unknown exponent rule {self.kind!r}")
        if self.kind == "affine":
            if not (isinstance(self.start, int) and isinstance(self.step, int)):
                raise ConfigError("affine rule needs integer start and step")
            if self.start < 1 or self.step < 1:
                raise ConfigError("affine rule needs start >= 1 and step >= 1")
        if self.kind == "explicit":
            vals = tuple(self.values)
            if not vals:
                raise ConfigError("explicit rule needs a nonempty list")
            if any(not isinstance(v, int) or isinstance(v, bool) for v in vals):
                raise ConfigError("explicit exponents must be integers")
            if vals[0] < 1 or any(b <= a for a, b in zip(vals, vals[1:])):
                raise ConfigError("explicit exponents must be strictly increasing positive integers")
            object.__setattr__(self, "values", vals)

    @classmethod
    def identity(cls) -> "ExponentRule":
        return cls("identity")

    @classmethod
    def affine(cls, start: int, step: int) -> "ExponentRule":
        return cls("affine", start=start, step=step)

    @classmethod
    def explicit(cls, values: Iterable[int]) -> "ExponentRule":
        return cls("explicit", values=tuple(values))

    def exponents(self, n: int) -> list[int]:
        if n < 1:
            raise ConfigError("need at least one exponent")
        if self.kind == "identity":
            return list(range(1, n + 1))
        if self.kind == "affine":
            return [self.start + i * self.step for i in range(n)]
        if n > len(self.values):
            raise ConfigError(
                f"explicit rule has {len(self.values)} exponents, {n} requested"
            )
        return list(self.values[:n])

    def last(self, n: int) -> int:
        if self.kind == "identity":
            return n
        if self.kind == "affine":
            return self.start + (n - 1) * self.step
        return self.exponents(n)[-1]

    @classmethod
    def from_config(cls, cfg) -> "ExponentRule":
        if cfg is None:
            return cls.identity()
        if isinstance(cfg, str):
            return cls(cfg)
        if not isinstance(cfg, dict):
            raise ConfigError(f"exponent rule must be an object, got {cfg!r}")
        kind = cfg.get("kind", "identity")
        if kind == "affine":
            return cls.affine(cfg.get("start", 1), cfg.get("step", 1))
        if kind == "explicit":
            return cls.explicit(cfg.get("values", ()))
        return cls(kind)

    def to_config(self) -> dict:
        if self.kind == "affine":
            return {"kind": "affine", "start": self.start, "step": self.step}
        if self.kind == "explicit":
            return {"kind": "explicit", "values": list(self.values)}
        return {"kind": "identity"}


@dataclass(frozen=True)
class OrbitSpec:
    """Parameters of the orbit ``frac(xi * x**s_n)``."""

    xi: Fraction
    x: Fraction
    rule: ExponentRule = field(default_factory=ExponentRule.identity)
    interval: tuple | None = None

    def __post_init__(self):
        xi = as_dyadic(self.xi, "xi")
        x = as_dyadic(self.x, "x")
        if xi <= 0:
            raise ConfigError("xi must be positive")
        if x <= 1:
            raise ConfigError("x must exceed 1")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "x", x)
        if self.interval is not None:
            a, b = (Fraction(v) for v in self.interval)
            if not (1 < a < b):
                raise ConfigError("interval must satisfy 1 < A < B")
            object.__setattr__(self, "interval", (a, b))


@dataclass(frozen=True)
class CertifiedPointList:
    """Points in [0, 1) with absolute error radii.

    The arrays are made read-only on construction.
    """

    values: np.ndarray
    radii: np.ndarray
    precision_bits: int = 53
    exponents: np.ndarray | None = None

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        radii = np.array(self.radii, dtype=np.float64)
        if values.ndim != 1 or values.shape != radii.shape:
            raise ConfigError("values and radii must be 1-d arrays of equal length")
        if values.size and (values.min() < 0.0 or values.max() >= 1.0):
            raise ConfigError("point values must lie in [0, 1)")
        if radii.size and radii.min() < 0.0:
            raise ConfigError("radii must be nonnegative")
        values.flags.writeable = False
        radii.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "radii", radii)
        if self.exponents is not None:
            exps = np.array(self.exponents, dtype=np.int64)
            exps.flags.writeable = False
            object.__setattr__(self, "exponents", exps)

    @property
    def n_points(self) -> int:
        return int(self.values.size)

    def __len__(self) -> int:
        return self.n_points

    @property
    def max_radius(self) -> float:
        return float(self.radii.max()) if self.n_points else 0.0

    @classmethod
    def exact(cls, values: Sequence[float]) -> "CertifiedPointList":
        """Wrap plain floats as points with zero radius."""
        vals = np.asarray(values, dtype=np.float64)
        return cls(vals, np.zeros_like(vals))

    def prefix(self, n: int) -> "CertifiedPointList":
        exps = None if self.exponents is None else self.exponents[:n]
        return CertifiedPointList(self.values[:n], self.radii[:n], self.precision_bits, exps)

    def concat(self, other: "CertifiedPointList") -> "CertifiedPointList":
        return CertifiedPointList(
            np.concatenate([self.values, other.values]),
            np.concatenate([self.radii, other.radii]),
            max(self.precision_bits, other.precision_bits),
        )


# ---------------------------------------------------------------------------
# precision bookkeeping
# ---------------------------------------------------------------------------

def _check_eps(eps: float) -> None:
    if not (0.0 < eps <= 2.0**-10):
        raise ConfigError(f"eps must lie in (0, 2^-10], got {eps!r}")


def precision_for(x: Fraction, xi: Fraction, s_max: int, eps: float,
                  max_bits: int = PRECISION_CAP) -> int:
    bits = (
        math.ceil(s_max * _log2(x))
        + math.ceil(_log2(xi + 2))
        + math.ceil(-math.log2(eps))
        + GUARD_BITS
    )
    if bits > max_bits:
        raise PrecisionCapError(
            f"orbit needs {bits} bits of working precision, cap is {max_bits}"
        )
    return bits


def required_precision(spec: OrbitSpec, n_points: int, eps: float = DEFAULT_EPS,
                       max_bits: int = PRECISION_CAP) -> int:
    """Working precision (bits) that keeps every point error below ``eps``."""
    _check_eps(eps)
    if n_points < 1:
        raise ConfigError("n_points must be >= 1")
    return precision_for(spec.x, spec.xi, spec.rule.last(n_points), eps, max_bits)


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def _contexts(bits: int):
    kw = dict(precision=bits, emax=gmpy2.get_emax_max(), emin=gmpy2.get_emin_min())
    return (gmpy2.context(round=gmpy2.RoundDown, **kw),
            gmpy2.context(round=gmpy2.RoundUp, **kw))


_UP53 = gmpy2.context(precision=53, round=gmpy2.RoundUp)
_UP64 = gmpy2.context(precision=64, round=gmpy2.RoundUp)
_ONE_BELOW = math.nextafter(1.0, 0.0)


def _certify(lo, hi, down):
    """Return (value, radius) for the fractional part of [lo, hi], or None
    when the enclosure contains an integer boundary."""
    fl = down.floor(lo)
    flo = down.sub(lo, fl)
    fhi = down.sub(hi, fl)  # exact; hi and fl share the grid of lo's precision
    if fhi >= 1:
        return None
    v = float(gmpy2.div_2exp(_UP64.add(flo, fhi), 1)) + 0.0  # no -0.0
    if v >= 1.0:
        v = _ONE_BELOW
    mv = gmpy2.mpfr(v, 53)
    r = max(_UP64.sub(mv, flo), _UP64.sub(fhi, mv))
    return v, float(_UP53.plus(r))


def _direct_point(x, xi, xi_is_one, s, bits):
    down, up = _contexts(bits)
    lo, hi = down.pow(x, s), up.pow(x, s)
    if not xi_is_one:
        lo, hi = down.mul(lo, xi), up.mul(hi, xi)
    return _certify(lo, hi, down)


def generate_power_orbit(spec: OrbitSpec, n_points: int, eps: float = DEFAULT_EPS,
                         precision: int | None = None,
                         max_bits: int = PRECISION_CAP) -> CertifiedPointList:
    """Certified points ``frac(xi * x**s_n)`` for n = 1..n_points.

    Powers are built incrementally, ``x**s_{n+1} = x**s_n * x**(s_{n+1}-s_n)``,
    in a lower and an upper rounding context.  If an enclosure straddles an
    integer the point is recomputed from scratch at doubled precision, up to
    ``MAX_RETRIES`` times.  ``precision`` overrides the computed working
    precision (it is still checked against ``eps``).
    """
    bits = precision if precision is not None else required_precision(spec, n_points, eps, max_bits)
    _check_eps(eps)
    exps = spec.rule.exponents(n_points)
    down, up = _contexts(bits)
    x = _to_mpfr(spec.x)
    xi = _to_mpfr(spec.xi)
    xi_is_one = spec.xi == 1

    values = np.empty(n_points)
    radii = np.empty(n_points)
    gaps: dict[int, tuple] = {}
    lo = hi = gmpy2.mpfr(1)
    prev = 0
    for i, s in enumerate(exps):
        g = s - prev
        prev = s
        if g not in gaps:
            gaps[g] = (down.pow(x, g), up.pow(x, g))
        glo, ghi = gaps[g]
        lo = down.mul(lo, glo)
        hi = up.mul(hi, ghi)
        if xi_is_one:
            res = _certify(lo, hi, down)
        else:
            res = _certify(down.mul(lo, xi), up.mul(hi, xi), down)
        attempt = 0
        while res is None or res[1] >= eps:
            attempt += 1
            if attempt > MAX_RETRIES:
                raise StraddleError(i, MAX_RETRIES)
            res = _direct_point(x, xi, xi_is_one, s, bits << attempt)
        values[i], radii[i] = res
    return CertifiedPointList(values, radii, bits, np.asarray(exps))


def generate_linear_orbit(x, rule: ExponentRule, n_points: int) -> CertifiedPointList:
    """Points ``frac(s_n * x)`` from exact rational arithmetic.

    ``x`` may be any positive rational (int, float, Fraction or decimal
    string).  Radii bound the final float rounding and stay below 2^-40.
    """
    q = Fraction(x)
    if q <= 0:
        raise ConfigError("x must be positive")
    exps = rule.exponents(n_points)
    values = np.empty(n_points)
    radii = np.empty(n_points)
    p, d = q.numerator, q.denominator
    for i, s in enumerate(exps):
        exact = Fraction((s * p) % d, d)
        v = float(exact)
        if v >= 1.0:
            v = _ONE_BELOW
        err = abs(Fraction(v) - exact)
        r = float(err)
        if Fraction(r) < err:
            r = math.nextafter(r, math.inf)
        values[i], radii[i] = v, r
    assert radii.max(initial=0.0) < LINEAR_EPS
    return CertifiedPointList(values, radii, 53, np.asarray(exps))


def generate_iid(seed: int, n_points: int) -> CertifiedPointList:
    """Seeded pseudo-uniform points (PCG64), radius 0."""
    rng = np.random.Generator(np.random.PCG64(seed))
    vals = rng.random(n_points)
    return CertifiedPointList(vals, np.zeros(n_points), 53)


def derive_seed(master: int, index: int) -> int:
    """Per-task seed from (master seed, task index); independent of scheduling."""
    ss = np.random.SeedSequence([master % 2**64, index])
    return int(ss.generate_state(1, np.uint64)[0])


def dyadic_point(a: Fraction, b: Fraction, k: int, mantissa_bits: int) -> Fraction:
    return a + (b - a) * Fraction(k, 2**mantissa_bits)


def sample_x(interval, seed: int, mantissa_bits: int = 53) -> Fraction:
    """Draw an exact dyadic ``x = A + (B-A) k / 2**mantissa_bits`` with x > 1.

    ``k`` is uniform on [0, 2**mantissa_bits); draws giving x <= 1 (only
    possible when A == 1) are rejected and redrawn.
    """
    a, b = (_coerce_endpoint(v) for v in interval)
    if not (1 <= a < b):
        raise ConfigError("interval must satisfy 1 <= A < B")
    if not (1 <= mantissa_bits <= 128):
        raise ConfigError("mantissa_bits must lie in [1, 128]")
    rng = np.random.Generator(np.random.PCG64(seed))
    nbytes = (mantissa_bits + 7) // 8
    mask = (1 << mantissa_bits) - 1
    while True:
        k = int.from_bytes(rng.bytes(nbytes), "little") & mask
        x = dyadic_point(a, b, k, mantissa_bits)
        if x > 1:
            return x


def _coerce_endpoint(v) -> Fraction:
    q = Fraction(v)
    if not _is_power_of_two(q.denominator):
        q = Fraction(float(q))
    return q


# ---------------------------------------------------------------------------
# orbit dump format
# ---------------------------------------------------------------------------

ORBIT_HEADER = ("n", "s_n", "value", "radius")


def write_orbit_csv(points: CertifiedPointList, stream, comments: Sequence[str] = ()) -> None:
    for line in comments:
        stream.write(f"# {line}\n")
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(ORBIT_HEADER)
    exps = points.exponents
    for i, (v, r) in enumerate(zip(points.values, points.radii)):
        s = int(exps[i]) if exps is not None else i + 1
        w.writerow([i + 1, s, format(v, ".17g"), format(r, ".17g")])


def orbit_csv_text(points: CertifiedPointList, comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    write_orbit_csv(points, buf, comments)
    return buf.getvalue()


def read_points(text: str) -> CertifiedPointList:
    """Parse an orbit dump, or a bare list of values (one per line)."""
    rows = [ln.strip() for ln in text.splitlines()]
    rows = [ln for ln in rows if ln and not ln.startswith("#")]
    if not rows:
        raise ConfigError("no points found")
    if rows[0].split(",")[0].strip() == "n":
        header = [h.strip() for h in rows[0].split(",")]
        iv, ir = header.index("value"), header.index("radius")
        vals, rads = [], []
        for ln in rows[1:]:
            parts = ln.split(",")
            try:
                vals.append(float(parts[iv]))
                rads.append(float(parts[ir]))
            except (IndexError, ValueError) as exc:
                raise ConfigError(f"malformed orbit row {ln!r}") from exc
        return CertifiedPointList(np.array(vals), np.array(rads))
    try:
        vals = [float(ln.split(",")[0]) for ln in rows]
    except ValueError as exc:
        raise ConfigError("malformed point list") from exc
    return CertifiedPointList.exact(vals)
