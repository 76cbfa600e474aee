"""Command line experiment runner.

Every subcommand reads an optional JSON config (``--config``), merges it
over its defaults, validates it before computing anything, and writes its
artifacts into ``--out`` only once the computation has finished.  Exit
codes: 0 success, 1 invariant or bound violation (a ``witness.json`` is
written), 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import selftest as st
from .discrepancy import (
    InvariantViolation,
    check_report_invariants,
    discrepancy_report,
    full_report,
    sandwich_check,
)
from .errors import ConfigError, OrbitLabError, PrecisionCapError, StraddleError
from .lilclt import (
    LIL_HEADER,
    REFERENCE,
    clt_samples,
    lil_ensemble,
    points_from_source,
)
from .oscillatory import (
    VERDICT_HEADER,
    PhaseSpec,
    lemma3_check,
    lemma4_check,
    lemma5_check,
    lemma5_partition,
    vdc_check,
)
from .periodic import function_from_config, function_to_config
from .seqgen import (
    DEFAULT_EPS,
    ExponentRule,
    derive_seed,
    orbit_csv_text,
    read_points,
)

COMMANDS = ("generate", "discrepancy", "dyadic", "vdc", "lemma5", "lil", "clt",
            "constants", "selftest")

DEFAULT_SEED = st.DEFAULT_SEED

DEFAULTS = {
    "generate": {"source": {"kind": "power", "interval": [1.1, 2.1]}, "n_points": 1000},
    "discrepancy": {"points": None, "points_file": None, "source": None, "n_points": 1000, "r": 4},
    "dyadic": {"points": None, "points_file": None, "source": None, "n_points": 1000,
               "r_levels": [1, 2, 3, 4, 5, 6, 7, 8]},
    "vdc": {"cases": 40, "interval": [1.1, 2.1], "kinds": ["lemma3", "lemma4", "vdc"],
            "phases": None},
    "lemma5": {"cases": 40, "subintervals": 10, "interval": [1.1, 2.1], "partitions": None},
    "lil": {"source": {"kind": "power", "interval": [1.1, 2.1]}, "n_orbits": 1,
            "n_max": 100000, "grid": "dyadic", "variant": "star", "figures": False},
    "clt": {"function": {"kind": "indicator", "a": 0.0, "b": 0.5},
            "rule": {"kind": "identity"}, "xi": 1.0, "interval": [1.1, 2.1],
            "n_terms": [256, 4096], "n_draws": 2000, "mantissa_bits": 53, "figures": False},
    "constants": {},
    "selftest": {"full": False},
}


class Artifacts:
    """Collected output files, written only after the command completes."""

    def __init__(self):
        self.files: dict[str, bytes] = {}

    def text(self, name: str, content: str) -> None:
        self.files[name] = content.encode()

    def json(self, name: str, obj) -> None:
        self.text(name, json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")

    def raw(self, name: str, content: bytes) -> None:
        self.files[name] = content

    def write(self, out: Path) -> None:
        out.mkdir(parents=True, exist_ok=True)
        for name, data in self.files.items():
            (out / name).write_bytes(data)


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    return str(v)


def _header(command: str, config: dict) -> list[str]:
    return [f"orbitlab {__version__} {command}",
            "config: " + json.dumps(config, sort_keys=True, default=_jsonable)]


def _csv(command: str, config: dict, header, rows) -> str:
    buf = io.StringIO()
    for line in _header(command, config):
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _g(v: float) -> str:
    return format(float(v), ".17g")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def resolve_config(command: str, raw: dict, seed=None, tolerance=None) -> dict:
    """Defaults <- config file <- command-line flags; unknown keys are errors."""
    params = dict(DEFAULTS[command])
    for key in ("seed", "tolerance"):
        params[key] = None
    unknown = set(raw) - set(params)
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {sorted(unknown)}")
    params.update(raw)
    if seed is not None:
        params["seed"] = seed
    if tolerance is not None:
        params["tolerance"] = tolerance
    if params["seed"] is None:
        params["seed"] = DEFAULT_SEED
    if not isinstance(params["seed"], int) or isinstance(params["seed"], bool) \
            or not 0 <= params["seed"] < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    if params["tolerance"] is not None:
        tol = params["tolerance"]
        if not isinstance(tol, (int, float)) or isinstance(tol, bool) or not tol > 0:
            raise ConfigError("tolerance must be a positive number")
    VALIDATORS.get(command, lambda p: None)(params)
    return params


def _require_int(p, key, lo=1, hi=None):
    v = p[key]
    if not isinstance(v, int) or isinstance(v, bool) or v < lo or (hi is not None and v > hi):
        raise ConfigError(f"{key} must be an integer in [{lo}, {hi if hi else 'inf'}]")


def _require_interval(p, key="interval"):
    v = p[key]
    if (not isinstance(v, (list, tuple)) or len(v) != 2
            or not all(isinstance(e, (int, float)) for e in v) or not 1 < v[0] < v[1]):
        raise ConfigError(f"{key} must be [A, B] with 1 < A < B")


def _validate_source(src, seed):
    if not isinstance(src, dict):
        raise ConfigError("source must be an object")
    allowed = {"kind", "xi", "x", "interval", "seed", "mantissa_bits", "rule", "eps"}
    if set(src) - allowed:
        raise ConfigError(f"unknown source keys {sorted(set(src) - allowed)}")
    if src.get("kind", "power") not in ("power", "iid", "linear"):
        raise ConfigError(f"unknown source kind {src.get('kind')!r}")
    ExponentRule.from_config(src.get("rule"))
    if "interval" in src:
        _require_interval(src)
    eps = src.get("eps", DEFAULT_EPS)
    if not isinstance(eps, (int, float)) or not 0 < eps <= 2.0**-10:
        raise ConfigError("eps must lie in (0, 2^-10]")


def _validate_points_input(p):
    given = [k for k in ("points", "points_file", "source") if p[k] is not None]
    if len(given) > 1:
        raise ConfigError(f"give only one of points, points_file, source (got {given})")
    if p["points"] is not None:
        if not isinstance(p["points"], list) or not p["points"]:
            raise ConfigError("points must be a nonempty list")
        if not all(isinstance(v, (int, float)) and 0 <= v < 1 for v in p["points"]):
            raise ConfigError("points must be numbers in [0, 1)")
    if p["source"] is not None:
        _validate_source(p["source"], p["seed"])
    if not given:
        p["source"] = {"kind": "power", "interval": [1.1, 2.1]}
    _require_int(p, "n_points")


def _v_generate(p):
    _validate_source(p["source"], p["seed"])
    _require_int(p, "n_points")


def _v_discrepancy(p):
    _validate_points_input(p)
    _require_int(p, "r", 1, 20)


def _v_dyadic(p):
    _validate_points_input(p)
    lv = p["r_levels"]
    if not isinstance(lv, list) or not lv or not all(
            isinstance(r, int) and 1 <= r <= 20 for r in lv):
        raise ConfigError("r_levels must be a nonempty list of integers in [1, 20]")


def _v_vdc(p):
    _require_int(p, "cases", 0)
    _require_interval(p)
    kinds = p["kinds"]
    if not isinstance(kinds, list) or set(kinds) - {"lemma3", "lemma4", "vdc"}:
        raise ConfigError("kinds must be a subset of ['lemma3', 'lemma4', 'vdc']")
    if p["phases"] is not None:
        p["_phases"] = [_phase_from_config(c) for c in p["phases"]]


def _phase_from_config(c) -> PhaseSpec:
    if not isinstance(c, dict):
        raise ConfigError("phase entries must be objects")
    allowed = {"j", "n", "k", "m", "sign", "xi", "alpha", "beta"}
    if set(c) - allowed:
        raise ConfigError(f"unknown phase keys {sorted(set(c) - allowed)}")
    try:
        return PhaseSpec(**c)
    except TypeError as exc:
        raise ConfigError(f"bad phase {c!r}") from exc


def _v_lemma5(p):
    _require_int(p, "cases", 0)
    _require_int(p, "subintervals", 0)
    _require_interval(p)
    if p["partitions"] is not None:
        if not isinstance(p["partitions"], list):
            raise ConfigError("partitions must be a list")
        for c in p["partitions"]:
            if not isinstance(c, dict) or set(c) - {"j", "k", "m", "n", "xi", "eta"}:
                raise ConfigError(f"bad partition entry {c!r}")
            lemma5_partition(A=p["interval"][0], B=p["interval"][1],
                             **{"xi": 1.0, **c})


def _v_lil(p):
    _validate_source(p["source"], p["seed"])
    _require_int(p, "n_orbits")
    _require_int(p, "n_max", 16)
    if p["grid"] not in ("dyadic", "nform"):
        raise ConfigError("grid must be 'dyadic' or 'nform'")
    if p["variant"] not in ("star", "extremal"):
        raise ConfigError("variant must be 'star' or 'extremal'")


def _v_clt(p):
    p["_function"] = function_from_config(p["function"])
    ExponentRule.from_config(p["rule"])
    _require_interval(p)
    if isinstance(p["n_terms"], int):
        p["n_terms"] = [p["n_terms"]]
    if not isinstance(p["n_terms"], list) or not p["n_terms"] or not all(
            isinstance(n, int) and n >= 1 for n in p["n_terms"]):
        raise ConfigError("n_terms must be a positive integer or list of them")
    _require_int(p, "n_draws", 100)
    _require_int(p, "mantissa_bits", 16, 128)
    if not isinstance(p["xi"], (int, float)) or not p["xi"] > 0:
        raise ConfigError("xi must be positive")


def _v_selftest(p):
    if not isinstance(p["full"], bool):
        raise ConfigError("full must be true or false")


VALIDATORS = {
    "generate": _v_generate, "discrepancy": _v_discrepancy, "dyadic": _v_dyadic,
    "vdc": _v_vdc, "lemma5": _v_lemma5, "lil": _v_lil, "clt": _v_clt,
    "selftest": _v_selftest,
}


def _public(p: dict) -> dict:
    """Config as embedded in artifacts (internal keys dropped)."""
    return {k: v for k, v in p.items() if not k.startswith("_")}


def _seeded_source(src: dict, seed: int, index: int = 0) -> dict:
    src = dict(src)
    if src.get("kind", "power") in ("power", "iid") and "seed" not in src:
        src["seed"] = derive_seed(seed, index)
    return src


def _eps(p) -> float:
    return float(p["tolerance"]) if p["tolerance"] is not None else DEFAULT_EPS


def _points(p):
    if p["points"] is not None:
        from .seqgen import CertifiedPointList
        return CertifiedPointList.exact(p["points"])
    if p["points_file"] is not None:
        try:
            return read_points(Path(p["points_file"]).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read points file: {exc}") from exc
    src = _seeded_source(p["source"], p["seed"])
    if p["tolerance"] is not None:
        src.setdefault("eps", _eps(p))
    return points_from_source(src, p["n_points"])[0]


# ---------------------------------------------------------------------------
# commands; each returns (ok, summary line)
# ---------------------------------------------------------------------------

def cmd_generate(p, art: Artifacts, threads: int):
    src = _seeded_source(p["source"], p["seed"])
    src.setdefault("eps", _eps(p))
    pts, info = points_from_source(src, p["n_points"])
    art.text("orbit.csv", orbit_csv_text(pts, _header("generate", _public(p))
                                         + ["source: " + json.dumps(info, sort_keys=True)]))
    return True, (f"generated {pts.n_points} points, max radius {pts.max_radius:.3g}, "
                  f"{pts.precision_bits} bits")


def cmd_discrepancy(p, art, threads):
    pts = _points(p)
    rep = full_report(pts, p["r"])
    art.json("discrepancy.json", {**rep, "config": _public(p)})
    check_report_invariants(discrepancy_report(pts))
    return True, f"n={rep['n']} d_star={rep['d_star']:.6g} d_extremal={rep['d_extremal']:.6g}"


def cmd_dyadic(p, art, threads):
    pts = _points(p)
    witnesses = [sandwich_check(pts, R) for R in p["r_levels"]]
    art.json("dyadic.json", {"levels": [w.as_dict() for w in witnesses], "config": _public(p)})
    bad = [w.as_dict() for w in witnesses if not w.holds]
    if bad:
        raise InvariantViolation("sandwich inequality violated", {"violations": bad})
    return True, f"sandwich inequality holds for R in {p['r_levels']}"


def _vdc_verdicts(p):
    tol = float(p["tolerance"]) if p["tolerance"] is not None else st.LEMMA_TOL
    rng = np.random.default_rng(np.random.SeedSequence([p["seed"], 3]))
    verdicts = []
    if p.get("_phases"):
        for i, ph in enumerate(p["_phases"]):
            if ph.is_pair and ph.sign > 0:
                verdicts.append(lemma4_check(ph, tol, f"phase-{i}"))
            elif not ph.is_pair:
                verdicts.append(lemma3_check(ph, tol, f"phase-{i}"))
            verdicts += vdc_check(ph, min(tol, 1e-8), f"phase-{i}-vdc")
        return verdicts
    n = p["cases"]
    if "lemma3" in p["kinds"]:
        verdicts += [lemma3_check(ph, tol, f"l3-{i}")
                     for i, ph in enumerate(st.random_lemma3_phases(rng, n, p["interval"]))]
    if "lemma4" in p["kinds"]:
        verdicts += [lemma4_check(ph, tol, f"l4-{i}")
                     for i, ph in enumerate(st.random_lemma4_phases(rng, n, p["interval"]))]
    if "vdc" in p["kinds"]:
        A, B = p["interval"]
        for i in range(n):
            prm = st.random_partition_params(rng)
            ph = PhaseSpec.pair(prm["j"], prm["k"], prm["n"], prm["m"], -1, prm["xi"], A, B)
            verdicts += vdc_check(ph, min(tol, 1e-8), f"vdc-{i}")
    return verdicts


def cmd_vdc(p, art, threads):
    verdicts = _vdc_verdicts(p)
    art.text("vdc.csv", _csv("vdc", _public(p), VERDICT_HEADER, [v.row() for v in verdicts]))
    failed = [v for v in verdicts if not v.passed]
    if failed:
        raise InvariantViolation("oscillatory bound violated",
                                 {"failed": [v.__dict__ for v in failed]})
    return True, f"{len(verdicts)} oscillatory bound checks passed"


def cmd_lemma5(p, art, threads):
    tol = float(p["tolerance"]) if p["tolerance"] is not None else st.LEMMA_TOL
    A, B = p["interval"]
    rng = np.random.default_rng(np.random.SeedSequence([p["seed"], 4]))
    params = p["partitions"] or [st.random_partition_params(rng) for _ in range(p["cases"])]
    rows, parts, problems = [], [], []
    for c, prm in enumerate(params):
        part = lemma5_partition(A=A, B=B, **{"xi": 1.0, **prm})
        info = part.as_dict()
        info["disjoint"] = part.disjoint()
        info["measure_ok"] = part.excluded_measure <= part.measure_cap
        info["stationary_residual"] = st.stationary_residual(part)
        parts.append(info)
        if not (info["disjoint"] and info["measure_ok"]
                and info["stationary_residual"] <= st.STATIONARY_TOL):
            problems.append(info)
        if not any(part.intervals):
            continue
        for s in range(p["subintervals"]):
            a, b = st.random_subinterval(rng, part)
            v = lemma5_check(part, a, b, tol, f"{c}.{s}")
            rows.append(v.row())
            if not v.passed:
                problems.append(v.__dict__)
    art.text("lemma5.csv", _csv("lemma5", _public(p), VERDICT_HEADER, rows))
    art.json("lemma5.json", {"partitions": parts, "config": _public(p)})
    if problems:
        raise InvariantViolation("partition check failed", {"problems": problems})
    return True, f"{len(parts)} partitions, {len(rows)} subinterval checks passed"


def cmd_lil(p, art, threads, figures_dir=None):
    sources = [_seeded_source(p["source"], p["seed"], i) for i in range(p["n_orbits"])]
    if p["tolerance"] is not None:
        for s in sources:
            s.setdefault("eps", _eps(p))
    trs = lil_ensemble(sources, p["n_max"], p["grid"], p["variant"], threads)
    for i, tr in enumerate(trs):
        rows = [[n, _g(a), _g(b), _g(c), _g(d), _g(e)] for n, a, b, c, d, e in tr.rows()]
        cfg = {**_public(p), "orbit": i, "resolved_source": tr.source}
        art.text(f"lil_{i:03d}.csv", _csv("lil", cfg, LIL_HEADER, rows))
    finals = [tr.final for tr in trs]
    summary = {
        "final_L": finals,
        "median_final_L": float(np.median(finals)),
        "median_decade_growth": float(np.median([tr.decade_growth() for tr in trs])),
        "non_generic": [tr.non_generic for tr in trs],
        "reference": REFERENCE.as_dict(),
        "config": _public(p),
    }
    art.json("lil_summary.json", summary)
    if p["figures"]:
        from .plotting import plot_lil
        buf = io.BytesIO()
        plot_lil(trs, buf, title=f"{p['source'].get('kind', 'power')} orbits, {p['variant']}")
        art.raw("lil.png", buf.getvalue())
    flag = " (non-generic orbit flagged)" if any(summary["non_generic"]) else ""
    return True, f"{len(trs)} trajectories, median final L = {summary['median_final_L']:.4f}{flag}"


def cmd_clt(p, art, threads):
    f = p["_function"]
    rule = ExponentRule.from_config(p["rule"])
    samples = clt_samples(f, rule, p["xi"], p["interval"], p["n_terms"], p["n_draws"],
                          p["seed"], threads, _eps(p), p["mantissa_bits"])
    summary = {"reference": REFERENCE.as_dict(), "config": _public(p),
               "function": function_to_config(f), "results": {}}
    for n, s in samples.items():
        rows = [[i, _g(x), _g(t)] for i, (x, t) in enumerate(zip(s.xs, s.normalized_sums))]
        art.text(f"clt_N{n}.csv", _csv("clt", {**_public(p), "N": n}, ("draw", "x", "T"), rows))
        summary["results"][str(n)] = {
            "ks_distance": s.ks_distance,
            "ks_distance_unnormalized": s.ks_distance_raw,
            "norm": s.norm,
            "mean_T": float(np.mean(s.normalized_sums)),
            "std_T": float(np.std(s.normalized_sums)),
            "ambiguous_points": s.ambiguous_points,
        }
        if p["figures"]:
            from .plotting import plot_clt
            buf = io.BytesIO()
            plot_clt(s, buf, title=f"N = {n}, M = {s.n_draws}")
            art.raw(f"clt_N{n}.png", buf.getvalue())
    art.json("clt_summary.json", summary)
    parts = ", ".join(f"N={n}: KS={r['ks_distance']:.4f} (unnormalized {r['ks_distance_unnormalized']:.4f})"
                      for n, r in summary["results"].items())
    return True, parts


def cmd_constants(p, art, threads):
    consts = REFERENCE.as_dict()
    art.json("constants.json", consts)
    for name, value in consts.items():
        print(f"{name} = {value:.12f}")
    return True, "reference constants written"


def cmd_selftest(p, art, threads):
    results = st.run(p["seed"], threads, p["full"], echo=print)
    art.json("selftest.json", {"criteria": [r.as_dict() for r in results],
                               "config": _public(p)})
    failed = [r.number for r in results if not r.passed]
    if failed:
        raise InvariantViolation(f"selftest criteria failed: {failed}",
                                 {"failed": [r.as_dict() for r in results if not r.passed]})
    return True, f"{len(results)} criteria passed"


HANDLERS = {
    "generate": cmd_generate, "discrepancy": cmd_discrepancy, "dyadic": cmd_dyadic,
    "vdc": cmd_vdc, "lemma5": cmd_lemma5, "lil": cmd_lil, "clt": cmd_clt,
    "constants": cmd_constants, "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orbitlab",
        description="Certified power orbits, discrepancies and LIL/CLT experiments.")
    parser.add_argument("--version", action="version", version=f"orbitlab {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--threads", type=int, default=1, help="worker processes")
    common.add_argument("--tolerance", type=float,
                        help="point tolerance (generate/lil/clt) or bound tolerance (vdc/lemma5)")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common], help=(HANDLERS[name].__doc__ or name))
        if name in ("lil", "clt"):
            sp.add_argument("--figures", action="store_true", help="also render PNG figures")
        if name == "selftest":
            sp.add_argument("--full", action="store_true", help="include the Monte Carlo criteria")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    out = Path(args.out)
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        raw = _load_config(args.config)
        if getattr(args, "figures", False):
            raw["figures"] = True
        if getattr(args, "full", False):
            raw["full"] = True
        params = resolve_config(args.command, raw, args.seed, args.tolerance)
    except ConfigError as exc:
        print(f"orbitlab: configuration error: {exc}", file=sys.stderr)
        return 2

    art = Artifacts()
    try:
        ok, summary = HANDLERS[args.command](params, art, args.threads)
    except ConfigError as exc:
        print(f"orbitlab: configuration error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        art.json("witness.json", {"error": str(exc), "witness": exc.witness,
                                  "config": _public(params)})
        art.write(out)
        print(f"orbitlab: invariant violation: {exc} (witness in {out / 'witness.json'})",
              file=sys.stderr)
        return 1
    except (PrecisionCapError, StraddleError, OrbitLabError) as exc:
        art.json("witness.json", {"error": str(exc), "config": _public(params)})
        art.write(out)
        print(f"orbitlab: {exc}", file=sys.stderr)
        return 1
    art.write(out)
    print(f"{args.command}: {summary}")
    return 0 if ok else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
