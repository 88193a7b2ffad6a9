"""Experiment driver.

    contact-hj-lab convergence --config quad [--out DIR] [--seed N]
    contact-hj-lab properties  --config quad [--out DIR] [--seed N]
    contact-hj-lab critical    --config mechanical [--out DIR] [--seed N]

--config takes a TOML path or the name of a shipped preset (quad,
mechanical, counterexample, frozen). Exit codes: 0 success, 1 property
failure, 2 configuration defect, 3 solver gave no solution (non-convergence,
invalid bisection bracket, blow-up). Every artifact lands inside the
configured output directory and is a deterministic function of
(config, seed).
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import numpy as np

from .config import ExperimentConfig, load_config
from .diagnostics import (
    CompactSlab,
    fit_rate,
    hamiltonian_residual_series,
    hausdorff_series,
    lambda_estimate,
    series_to_csv,
    sup_error_series,
)
from .errors import (
    BracketInvalid,
    CflViolation,
    ConfigError,
    EmptySlab,
    InsufficientData,
    NonFinite,
    NonPositiveValues,
    NotConverged,
    NotDiscountedForm,
    VelocityOutOfRange,
)
from .evolve import evolve
from .fields import GridFn, fmt
from .properties import properties_to_csv, run_property_suite
from .stationary import (
    DEFAULT_LADDER,
    admissible_shift,
    critical_value,
    solve_discounted,
    solve_longtime,
    stationary_residual,
)
from .svg import line_chart

EXIT_OK = 0
EXIT_PROPERTY_FAIL = 1
EXIT_CONFIG = 2
EXIT_NO_SOLUTION = 3

_PRESET_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "presets")


def resolve_config_path(value: str) -> str:
    """Accept a filesystem path or a bare preset name."""
    if os.path.isfile(value):
        return value
    name = value if value.endswith(".toml") else value + ".toml"
    if os.sep not in value and "/" not in value:
        cand = os.path.join(_PRESET_DIR, name)
        if os.path.isfile(cand):
            return cand
        raise ConfigError(
            "no file %r and no preset %r (have: %s)"
            % (value, name, ", ".join(sorted(
                f[:-5] for f in os.listdir(_PRESET_DIR) if f.endswith(".toml")))))
    raise ConfigError("config file not found: %s" % value)


def _solve_stationary(cfg: ExperimentConfig, model, grid, phi):
    spec = cfg.stationary
    method = spec["method"]
    if method == "given":
        u = GridFn.constant(grid, spec["constant"])
        return u, method, stationary_residual(model, u)
    if method == "discounted":
        res = solve_discounted(model, tol=spec["tol"], grid=grid,
                               v_box=cfg.v_box, v_samples=cfg.v_samples)
        return res.u_minus, method, stationary_residual(model, res.u_minus)
    res = solve_longtime(model, phi, cfg.evolve_config(snapshot_times=()),
                         tol=spec["tol"], t_max=spec["t_max"])
    return res.u_minus, method, stationary_residual(model, res.u_minus)


def _reference_slab(cfg: ExperimentConfig, u_minus, run):
    if "slab_u" in cfg.rates:
        u_lo, u_hi = cfg.rates["slab_u"]
    else:
        vals = [u_minus.values] + [u.values for _, u in run.snapshots]
        u_lo = float(min(np.min(v) for v in vals)) - 0.25
        u_hi = float(max(np.max(v) for v in vals)) + 0.25
    bound = cfg.rates.get("slab_bound", 1.0)
    return CompactSlab(u_lo, u_hi, bound)


def run_convergence(cfg: ExperimentConfig) -> int:
    if not cfg.snapshot_times:
        raise ConfigError("convergence needs a nonempty [snapshots] times array")
    if not cfg.rates:
        raise ConfigError("convergence needs at least one window in [rates]")
    model = cfg.build_model()
    grid = cfg.build_grid()
    phi = cfg.build_initial(grid)
    out = cfg.resolved_out_dir()
    os.makedirs(out, exist_ok=True)

    u_minus, method, resid = _solve_stationary(cfg, model, grid, phi)
    run = evolve(model, phi, cfg.evolve_config())

    all_series = {
        "sup": sup_error_series(run, u_minus),
        "hausdorff": hausdorff_series(run, u_minus),
        "residual": hamiltonian_residual_series(model, run),
    }
    series_to_csv(all_series["sup"], os.path.join(out, "sup_error.csv"))
    series_to_csv(all_series["hausdorff"], os.path.join(out, "hausdorff.csv"))
    series_to_csv(all_series["residual"], os.path.join(out, "residual.csv"))
    u_minus.to_csv(os.path.join(out, "u_minus.csv"))
    run.to_csv_dir(os.path.join(out, "snapshots"))

    fits = {}
    for name in ("sup", "hausdorff", "residual"):
        if name in cfg.rates:
            fits[name] = fit_rate(all_series[name], cfg.rates[name]["window"],
                                  kind=cfg.rates[name]["kind"])
    with open(os.path.join(out, "rates.csv"), "w") as fh:
        fh.write("series,kind,exponent,prefactor,r2,t_min,t_max,n\n")
        for name, f in fits.items():
            fh.write("%s,%s,%s,%s,%s,%s,%s,%d\n" % (
                name, f.kind, fmt(f.exponent), fmt(f.prefactor), fmt(f.r2),
                fmt(f.window[0]), fmt(f.window[1]), f.n_points))

    slab = _reference_slab(cfg, u_minus, run)
    try:
        lam_ref = lambda_estimate(model, slab)
    except EmptySlab:
        lam_ref = float("nan")

    line_chart(
        os.path.join(out, "convergence.svg"),
        [("sup error", all_series["sup"]),
         ("jet hausdorff", all_series["hausdorff"]),
         ("hamiltonian residual", all_series["residual"])],
        title="distance to the stationary solution (model %s, n=%d)"
              % (cfg.model_name, cfg.n),
        y_label="distance", log_y=True)

    with open(os.path.join(out, "report.txt"), "w") as fh:
        fh.write("convergence experiment\n")
        fh.write("model=%s scheme=%s n=%d dt=%s seed=%d\n"
                 % (cfg.model_name, cfg.scheme, cfg.n, fmt(cfg.dt), cfg.seed))
        fh.write("stationary method=%s residual=%s\n" % (method, fmt(resid)))
        fh.write("slab rate estimate: lambda=%s (u in [%s, %s], |H| <= %s)\n"
                 % (fmt(lam_ref), fmt(slab.u_lo), fmt(slab.u_hi), fmt(slab.B)))
        fh.write("reference exponents: sup ~ -lambda = %s, hausdorff ~ -lambda/3 = %s\n"
                 % (fmt(-lam_ref), fmt(-lam_ref / 3.0)))
        for name, f in fits.items():
            fh.write("fit %s: kind=%s exponent=%s prefactor=%s r2=%s window=[%s, %s] n=%d\n"
                     % (name, f.kind, fmt(f.exponent), fmt(f.prefactor), fmt(f.r2),
                        fmt(f.window[0]), fmt(f.window[1]), f.n_points))
    print("convergence artifacts in %s" % out)
    return EXIT_OK


def run_properties(cfg: ExperimentConfig) -> int:
    model = cfg.build_model()
    out = cfg.resolved_out_dir()
    os.makedirs(out, exist_ok=True)
    p = cfg.properties
    rows = run_property_suite(
        model,
        n=p.get("n", 64),
        seed=cfg.seed,
        t=p.get("t", 1.0),
        dt=p.get("dt", 1e-3),
        pairs=p.get("pairs", 200),
        sandwich_samples=p.get("sandwich_samples", 100),
    )
    properties_to_csv(rows, os.path.join(out, "properties.csv"))
    failed = [r for r in rows if r.failed]
    with open(os.path.join(out, "report.txt"), "w") as fh:
        fh.write("property suite: model=%s seed=%d\n" % (cfg.model_name, cfg.seed))
        for r in rows:
            line = "%-34s %-5s margin=%s" % (r.name, r.verdict, fmt(r.margin))
            if r.detail:
                line += "  (%s)" % r.detail
            fh.write(line + "\n")
        fh.write("failed=%d of %d\n" % (len(failed), len(rows)))
    for r in rows:
        print("%-34s %s" % (r.name, r.verdict))
    if failed:
        print("property failures: %s" % ", ".join(r.name for r in failed))
        return EXIT_PROPERTY_FAIL
    print("all properties passed; artifacts in %s" % out)
    return EXIT_OK


def run_critical(cfg: ExperimentConfig) -> int:
    crit = cfg.critical
    if "bracket" not in crit:
        raise ConfigError("critical needs [critical] bracket = [a_lo, a_hi]")
    model = cfg.build_model()
    out = cfg.resolved_out_dir()
    os.makedirs(out, exist_ok=True)

    ladder = crit.get("ladder", DEFAULT_LADDER)
    n = crit.get("n", 256)
    dt = crit.get("dt", 0.25)
    v_box = crit.get("v_box", cfg.v_box)
    v_samples = crit.get("v_samples", cfg.v_samples)

    result = critical_value(model, 0.0, ladder, n=n, dt=dt,
                            v_box=v_box, v_samples=v_samples)
    ests = np.array([e for _, e in result.ladder])
    diffs = np.diff(ests)
    ladder_monotone = bool(np.all(diffs >= -1e-12) or np.all(diffs <= 1e-12))

    a_star = admissible_shift(model, crit["bracket"], tol=crit.get("tol", 0.02),
                              ladder=ladder, n=min(n, 128), dt=dt,
                              v_box=v_box, v_samples=v_samples)

    result.to_csv(os.path.join(out, "critical_ladder.csv"))
    lam_max = max(l for l, _ in result.ladder)
    line_chart(
        os.path.join(out, "critical.svg"),
        [("ladder estimate", np.array([(l, e) for l, e in result.ladder])),
         ("extrapolated", np.array([(0.0, result.extrapolated),
                                    (lam_max, result.extrapolated)]))],
        title="vanishing-discount ladder (model %s)" % cfg.model_name,
        x_label="discount rate", y_label="critical value estimate", log_y=False)
    with open(os.path.join(out, "report.txt"), "w") as fh:
        fh.write("critical value experiment: model=%s\n" % cfg.model_name)
        for lam, est in result.ladder:
            fh.write("ladder lambda=%s estimate=%s\n" % (fmt(lam), fmt(est)))
        fh.write("critical_value=%s\n" % fmt(result.extrapolated))
        fh.write("ladder_monotone=%s\n" % ("true" if ladder_monotone else "false"))
        fh.write("admissible_shift=%s (tol %s)\n"
                 % (fmt(a_star), fmt(crit.get("tol", 0.02))))
    print("critical value %s, admissible shift %s; artifacts in %s"
          % (fmt(result.extrapolated), fmt(a_star), out))
    return EXIT_OK


_COMMANDS = {
    "convergence": run_convergence,
    "properties": run_properties,
    "critical": run_critical,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="contact-hj-lab",
        description="experiment driver for the contact Hamilton-Jacobi lab")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("convergence", "evolve toward the stationary solution and fit rates"),
        ("properties", "run the seeded property suites"),
        ("critical", "vanishing-discount critical value and admissible shift"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True,
                       help="TOML file or preset name (quad, mechanical, ...)")
        p.add_argument("--out", default=None, help="override the output directory")
        p.add_argument("--seed", type=int, default=None, help="override the seed")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(resolve_config_path(args.config))
        if args.out is not None:
            cfg = dataclasses.replace(cfg, out_dir=os.path.abspath(args.out))
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("seed must be nonnegative")
            cfg = dataclasses.replace(cfg, seed=args.seed)
        return _COMMANDS[args.command](cfg)
    except (ConfigError, NotDiscountedForm, CflViolation, VelocityOutOfRange,
            InsufficientData, NonPositiveValues) as exc:
        print("configuration error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    except (NotConverged, BracketInvalid, NonFinite) as exc:
        print("no solution: %s" % exc, file=sys.stderr)
        return EXIT_NO_SOLUTION


if __name__ == "__main__":
    sys.exit(main())
