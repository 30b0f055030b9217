"""Command-line front end.

Exit codes: 0 success, 1 configuration/validation error, 2 numerical
acceptance failure.  All numeric stdout uses 17 significant digits.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from .errors import RegularityError
from .mittag_leffler import mittag_leffler_neg
from .noise import CovarianceSpec, LevyLaw, hs_condition, sample_jump_path, stream, asymmetric_condition
from .propagators import cq_weights, heat_kind, volterra_kind, wave_kind
from .spectral import dirichlet_spectrum
from .studies import (
    StudyConfig,
    emit_csv,
    preset_studies,
    representation_sweep,
    run_study,
)

SCHEMA_VERSION = 1

_CONFIG_KEYS = {
    "schema_version",
    "name",
    "equation",
    "rho",
    "scheme",
    "axis",
    "beta",
    "horizon",
    "modes",
    "ladder",
    "fixed_cells",
    "covariance",
    "law",
    "x0",
    "g",
    "g_mode",
    "mc",
    "threads",
    "output",
}
_COV_KEYS = {"amplitude", "decay"}
_LAW_KEYS = {"kind", "nu", "intensity", "jumps"}
_MC_KEYS = {"paths", "seed"}


class ConfigError(ValueError):
    pass


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _make_kind(equation: str, rho, scheme):
    if equation == "heat":
        return heat_kind()
    if equation == "volterra":
        if rho is None:
            raise ConfigError("volterra needs rho in (1,2)")
        return volterra_kind(float(rho))
    if equation == "wave":
        return wave_kind(scheme or "crank_nicolson")
    raise ConfigError(f"unknown equation {equation!r}")


def _make_law(obj) -> LevyLaw:
    if obj is None:
        return LevyLaw("compound_poisson", intensity=1.0)
    unknown = set(obj) - _LAW_KEYS
    if unknown:
        raise ConfigError(f"unknown law keys {sorted(unknown)}")
    kw = {}
    if "nu" in obj:
        kw["nu"] = float(obj["nu"])
    if "intensity" in obj:
        kw["intensity"] = float(obj["intensity"])
    if "jumps" in obj:
        kw["jumps"] = obj["jumps"]
    return LevyLaw(obj.get("kind", "compound_poisson"), **kw)


def load_config(path: str) -> StudyConfig:
    """Parse the strict JSON study schema; unknown keys are rejected."""
    with open(path) as f:
        raw = json.load(f)
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    if raw.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}")
    for key in ("equation", "axis", "beta", "ladder"):
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")
    kind = _make_kind(raw["equation"], raw.get("rho"), raw.get("scheme"))
    cov = raw.get("covariance") or {}
    unknown = set(cov) - _COV_KEYS
    if unknown:
        raise ConfigError(f"unknown covariance keys {sorted(unknown)}")
    mc = raw.get("mc")
    if mc is not None:
        unknown = set(mc) - _MC_KEYS
        if unknown:
            raise ConfigError(f"unknown mc keys {sorted(unknown)}")
    x0 = raw.get("x0")
    try:
        return StudyConfig(
            name=raw.get("name", os.path.splitext(os.path.basename(path))[0]),
            kind=kind,
            axis=raw["axis"],
            beta=float(raw["beta"]),
            T=float(raw.get("horizon", 1.0)),
            modes=int(raw.get("modes", 1024)),
            ladder=tuple(float(v) for v in raw["ladder"]),
            fixed_cells=raw.get("fixed_cells"),
            cov_amplitude=float(cov.get("amplitude", 1.0)),
            cov_decay=None if cov.get("decay") is None else float(cov["decay"]),
            law=_make_law(raw.get("law")),
            x0=None if x0 is None else tuple(x0),
            g=raw.get("g", "quadratic"),
            g_mode=int(raw.get("g_mode", 1)),
            mc_paths=None if mc is None else int(mc.get("paths", 1000)),
            mc_seed=0 if mc is None else int(mc.get("seed", 0)),
            threads=int(raw.get("threads", 1)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def cmd_study(args) -> int:
    presets = preset_studies()
    if args.preset:
        if args.preset not in presets:
            print(f"unknown preset {args.preset!r}; available: {', '.join(sorted(presets))}", file=sys.stderr)
            return 1
        config = presets[args.preset]
    else:
        config = load_config(args.config)
    if args.threads is not None:
        config = dataclasses.replace(config, threads=args.threads)
    try:
        result = run_study(config)
    except (RegularityError, ValueError) as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 1
    out = args.output or os.environ.get("LEVYSPDE_OUTPUT_DIR", ".")
    path = out if out.endswith(".csv") else os.path.join(out, f"{config.name}.csv")
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    emit_csv(result, path)
    s = result.summary()
    print(f"study {config.name}: wrote {path}")
    print(
        f"  weak slope   {_fmt(s['weak_slope'])} (guaranteed >= {_fmt(s['weak_expected'])} - 0.15): "
        f"{'pass' if s['weak_ok'] else 'FAIL'}"
    )
    print(
        f"  strong slope {_fmt(s['strong_slope'])} (expected {_fmt(s['strong_expected'])} +- 0.15): "
        f"{'pass' if s['strong_ok'] else 'FAIL'}"
    )
    if not s["beta_in_range"]:
        print("  warning: regularity target outside the covered range for this family")
    return 0 if result.passed() else 2


def cmd_check_condition(args) -> int:
    try:
        kind = _make_kind(args.equation, args.rho, None)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    rho = kind.rho if kind.name == "volterra" else 1.0
    spec = dirichlet_spectrum(args.modes)
    cov = CovarianceSpec(amplitude=args.amplitude, decay=args.decay)
    rep = hs_condition(spec, cov, args.beta, rho)
    expo = 2.0 * (args.decay + 1.0 / rho - args.beta)
    print(f"hs_partial_sum {_fmt(rep.partial_sum)}")
    print(f"hs_norm {_fmt(rep.norm)}")
    print(f"hs_tail_bound {_fmt(rep.tail_bound)}")
    print(f"summability_exponent {_fmt(expo)}")
    print(f"converges {rep.converges}")
    w = asymmetric_condition(spec, cov, 1.0, args.beta, args.modes)
    print(f"asymmetric {_fmt(w)}")
    hs1 = hs_condition(spec, cov, args.beta, 1.0)
    print(f"asymmetric_equals_hs_squared {w == hs1.partial_sum}")
    return 0


def cmd_verify_representation(args) -> int:
    rows = representation_sweep()
    worst = 0.0
    for r in rows:
        print(
            f"{r['equation']:9s} n_cells={r['n_cells']:3d} decay={r['decay']:.2f} "
            f"weak={_fmt(r['weak'])} rep={_fmt(r['representation'])} rel={_fmt(r['rel_discrepancy'])}"
        )
        worst = max(worst, r["rel_discrepancy"])
    print(f"max_relative_discrepancy {_fmt(worst)}")
    if worst <= args.tolerance:
        print("representation identity: pass")
        return 0
    print("representation identity: FAIL")
    return 2


def cmd_ml_eval(args) -> int:
    for x in args.x:
        print(f"{_fmt(x)} {_fmt(mittag_leffler_neg(args.rho, x))}")
    return 0


def cmd_cq_weights(args) -> int:
    w = cq_weights(args.rho, args.dt, args.count)
    for k, wk in enumerate(w.weights):
        print(f"{k} {_fmt(wk)}")
    return 0


def cmd_sample_path(args) -> int:
    law = LevyLaw("compound_poisson", intensity=args.intensity, jumps=args.jumps)
    path = sample_jump_path(law, args.horizon, args.modes, stream(args.seed, 0))
    for k in range(path.mode_count):
        for t, s in zip(path.times[k], path.sizes[k]):
            print(f"{k + 1} {_fmt(t)} {_fmt(s)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="levyspde", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    st = sub.add_parser("study", help="run a convergence study and write its CSV")
    group = st.add_mutually_exclusive_group(required=True)
    group.add_argument("--preset", help="name of a shipped preset")
    group.add_argument("--config", help="path to a JSON study config")
    st.add_argument("--output", help="output directory or .csv path (default $LEVYSPDE_OUTPUT_DIR or .)")
    st.add_argument("--threads", type=int, default=None, help="cap on Monte Carlo worker threads")
    st.set_defaults(func=cmd_study)

    cc = sub.add_parser("check-condition", help="print the regularity functionals")
    cc.add_argument("--equation", required=True, choices=["heat", "volterra", "wave"])
    cc.add_argument("--beta", type=float, required=True)
    cc.add_argument("--rho", type=float, default=None)
    cc.add_argument("--decay", type=float, required=True, help="covariance decay exponent")
    cc.add_argument("--amplitude", type=float, default=1.0)
    cc.add_argument("--modes", type=int, default=4096)
    cc.set_defaults(func=cmd_check_condition)

    vr = sub.add_parser("verify-representation", help="check the error-representation identity")
    vr.add_argument("--tolerance", type=float, default=1e-8)
    vr.set_defaults(func=cmd_verify_representation)

    ml = sub.add_parser("ml-eval", help="evaluate the fractional resolvent kernel")
    ml.add_argument("rho", type=float)
    ml.add_argument("x", type=float, nargs="+")
    ml.set_defaults(func=cmd_ml_eval)

    cq = sub.add_parser("cq-weights", help="print convolution quadrature weights")
    cq.add_argument("rho", type=float)
    cq.add_argument("dt", type=float)
    cq.add_argument("count", type=int)
    cq.set_defaults(func=cmd_cq_weights)

    sp = sub.add_parser("sample-path", help="print a jump path (mode, time, size)")
    sp.add_argument("--horizon", type=float, default=1.0)
    sp.add_argument("--modes", type=int, default=4)
    sp.add_argument("--intensity", type=float, default=1.0)
    sp.add_argument("--jumps", choices=["two_point", "normal"], default="two_point")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_sample_path)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError, RegularityError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
