"""End-to-end acceptance checks, one per shipped guarantee.

Each test prints a single pass/fail line with the measured numbers so the
suite log doubles as the acceptance report. Tolerances are the shipped
contract, not tuned-to-pass values; runtime caps are asserted where the
contract states them.
"""

import os
import time

import numpy as np

from contact_hj_lab.config import load_config
from contact_hj_lab.cli import main, resolve_config_path
from contact_hj_lab.diagnostics import (
    SamplePlan,
    fit_rate,
    hamiltonian_residual_series,
    hausdorff_series,
    key_lemma_check,
    sup_error_series,
)
from contact_hj_lab.evolve import LF, SL, EvolveConfig, evolve
from contact_hj_lab.fields import GridFn, TorusGrid, sup_dist
from contact_hj_lab.flow import integrate
from contact_hj_lab.models import (
    counterexample_model,
    frozen_model,
    mechanical_model,
    quad_model,
)
from contact_hj_lab.properties import flow_rows, semigroup_rows
from contact_hj_lab.stationary import (
    admissible_shift,
    critical_value,
    solve_discounted,
    solve_longtime,
    stationary_residual,
)

from conftest import session_elapsed


def report(num: int, label: str, ok: bool, detail: str) -> None:
    print("criterion %2d [%s]: %s  (%s)" % (num, label, "PASS" if ok else "FAIL", detail))
    assert ok, "criterion %d failed: %s" % (num, detail)


def sine(grid, amp=1.0, freq=1):
    return GridFn.from_callable(grid, lambda x: amp * np.sin(2.0 * np.pi * freq * x))


def test_criterion_01_counterexample_closed_form():
    t0 = time.monotonic()
    model = counterexample_model()
    grid = TorusGrid(64)
    phi = GridFn.constant(grid, -1.0)
    times = (1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 14.0, 20.0, 28.0, 40.0, 55.0, 70.0, 85.0, 100.0)
    cfg = EvolveConfig(scheme=LF, dt=2e-3, snapshot_times=times)
    run = evolve(model, phi, cfg)
    dev = max(
        float(np.max(np.abs(u.values + (1.0 + t) ** -0.5)))
        for t, u in run.snapshots
    )
    series = sup_error_series(run, GridFn.constant(grid, 0.0))
    fit = fit_rate(series, (5.0, 100.0), kind="power")
    elapsed = time.monotonic() - t0
    ok = dev <= 5e-3 and -0.55 <= fit.exponent <= -0.45 and elapsed < 30.0
    report(1, "algebraic-rate closed form", ok,
           "max dev %.2e <= 5e-3; power exponent %.3f in [-0.55,-0.45]; %.1fs < 30s"
           % (dev, fit.exponent, elapsed))


def test_criterion_02_quad_exponential_rate():
    t0 = time.monotonic()
    model = quad_model(lam=1.0)
    grid = TorusGrid(128)
    phi = GridFn.constant(grid, 1.0)
    times = tuple(np.arange(0.5, 8.25, 0.5))
    cfg = EvolveConfig(scheme=LF, dt=1e-3, snapshot_times=times)
    run = evolve(model, phi, cfg)
    u_minus = GridFn.constant(grid, 0.0)
    sup = sup_error_series(run, u_minus)
    dev = float(np.max(np.abs(sup[:, 1] - np.exp(-sup[:, 0]))))
    f_sup = fit_rate(sup, (0.5, 8.0), kind="exponential")
    f_hd = fit_rate(hausdorff_series(run, u_minus), (0.5, 8.0), kind="exponential")
    elapsed = time.monotonic() - t0
    ok = (dev <= 1e-3 and -1.05 <= f_sup.exponent <= -0.95 and f_sup.r2 >= 0.999
          and -1.05 <= f_hd.exponent <= -0.95 and elapsed < 30.0)
    report(2, "exponential rate, solvable case", ok,
           "|sup - e^-t| %.2e <= 1e-3; sup fit %.4f r2 %.5f; hausdorff fit %.4f; %.1fs < 30s"
           % (dev, f_sup.exponent, f_sup.r2, f_hd.exponent, elapsed))


def test_criterion_03_mechanical_two_rates():
    t0 = time.monotonic()
    model = mechanical_model(lam=1.0, amplitude=0.3)
    grid = TorusGrid(256)
    phi = sine(grid)
    times = tuple(np.arange(2.0, 12.5, 0.5))
    cfg = EvolveConfig(scheme=LF, dt=2e-4, cfl_safety=0.8, snapshot_times=times)
    ref = solve_longtime(model, phi,
                         EvolveConfig(scheme=LF, dt=2e-4, cfl_safety=0.8, snapshot_times=()),
                         tol=1e-9, t_max=40.0)
    run = evolve(model, phi, cfg)
    f_sup = fit_rate(sup_error_series(run, ref.u_minus), (2.0, 12.0), kind="exponential")
    f_hd = fit_rate(hausdorff_series(run, ref.u_minus), (2.0, 12.0), kind="exponential")
    elapsed = time.monotonic() - t0
    ok = (f_sup.exponent <= -0.9 and f_hd.exponent <= -0.3
          and f_sup.r2 >= 0.98 and f_hd.r2 >= 0.98 and elapsed < 120.0)
    report(3, "two-rate theorem, mechanical", ok,
           "sup fit %.4f <= -0.9 (r2 %.5f); hausdorff fit %.4f <= -0.3 (r2 %.5f); %.1fs < 2min"
           % (f_sup.exponent, f_sup.r2, f_hd.exponent, f_hd.r2, elapsed))


def test_criterion_04_energy_laws():
    t0 = time.monotonic()
    model = quad_model(lam=1.0)
    traj = integrate(model, (0.0, 0.0, 1.0), (0.0, 10.0), 1e-3)
    hs = model.H(traj.xs, traj.us, traj.ps)
    h_dev = float(np.max(np.abs(hs - 0.5 * np.exp(-traj.ts))))
    shipped = (
        ("quad", quad_model(lam=1.0)),
        ("mechanical", mechanical_model(lam=1.0, amplitude=1.0)),
        ("counterexample", counterexample_model()),
        ("frozen", frozen_model(mechanical_model(lam=1.0, amplitude=1.0), a=0.0)),
    )
    worst = np.inf
    sandwich_ok = True
    for _, m in shipped:
        row = flow_rows(m, seed=0, samples=100, t=1.0)[0]
        sandwich_ok &= row.verdict == "pass" and row.margin >= -1e-6
        worst = min(worst, row.margin)
    elapsed = time.monotonic() - t0
    ok = h_dev <= 1e-8 and sandwich_ok and elapsed < 10.0
    report(4, "energy decay and sandwich", ok,
           "|H - e^-t/2| %.1e <= 1e-8; sandwich 4x100 orbits, worst slack %.1e >= -1e-6; %.1fs < 10s"
           % (h_dev, worst, elapsed))


def test_criterion_05_residual_decay():
    t0 = time.monotonic()
    model = mechanical_model(lam=1.0, amplitude=0.3)
    grid = TorusGrid(128)
    stat = solve_discounted(model, tol=1e-7, grid=grid)
    resid = stationary_residual(model, stat.u_minus)
    # H is affine in u, so a constant offset rides the semigroup exactly as
    # C e^{-lambda t}; the window then sits fully above the scheme floor
    phi = GridFn(grid, stat.u_minus.values + 1000.0)
    times = tuple(np.arange(2.0, 10.5, 0.5))
    cfg = EvolveConfig(scheme=SL, dt=1.0 / 128, snapshot_times=times)
    run = evolve(model, phi, cfg)
    fit = fit_rate(hamiltonian_residual_series(model, run), (2.0, 10.0),
                   kind="exponential")
    elapsed = time.monotonic() - t0
    ok = fit.exponent <= -0.9 and resid <= 10.0 * grid.h
    report(5, "residual decay", ok,
           "residual fit %.4f <= -0.9 (r2 %.5f); stationary residual %.4f <= 10h=%.4f; %.1fs"
           % (fit.exponent, fit.r2, resid, 10.0 * grid.h, elapsed))


def _cross_solver_gap(model, n, lf_dt, phi_from):
    grid = TorusGrid(n)
    phi = phi_from(grid)
    lf = evolve(model, phi, EvolveConfig(scheme=LF, dt=lf_dt, cfl_safety=0.8,
                                         snapshot_times=(1.0,)))
    sl = evolve(model, phi, EvolveConfig(scheme=SL, dt=1.0 / n,
                                         snapshot_times=(1.0,)))
    return sup_dist(lf.final(), sl.final())


def test_criterion_06_cross_solver():
    t0 = time.monotonic()
    models = (("quad", quad_model(lam=1.0)),
              ("mechanical", mechanical_model(lam=1.0, amplitude=0.3)))
    details = []
    ok = True
    for name, model in models:
        g256 = _cross_solver_gap(model, 256, 2e-4, sine)
        g512 = _cross_solver_gap(model, 512, 1e-4, sine)
        shrink = g256 / g512
        ok &= g256 <= 0.05 and shrink >= 1.5
        details.append("%s: gap %.4f <= 0.05, shrink x%.2f >= 1.5" % (name, g256, shrink))
    elapsed = time.monotonic() - t0
    report(6, "cross-solver oracle", ok, "; ".join(details) + "; %.1fs" % elapsed)


def test_criterion_07_semigroup_properties():
    t0 = time.monotonic()
    details = []
    ok = True
    for name, model in (("quad", quad_model(lam=1.0)),
                        ("mechanical", mechanical_model(lam=1.0, amplitude=0.3))):
        rows = {r.name: r for r in semigroup_rows(model, n=64, seed=0, t=1.0,
                                                  dt=1e-3, pairs=200)}
        mono = rows["semigroup_monotone"]
        nonx = rows["semigroup_nonexpansive"]
        strict = rows["semigroup_strict_contraction"]
        ok &= mono.verdict == "pass" and mono.margin >= -1e-12
        ok &= nonx.verdict == "pass" and nonx.margin >= -1e-12
        ok &= strict.verdict == "pass" and strict.margin > 0
        details.append("%s: mono %.1e, nonexp %.1e, strict %.3f" %
                       (name, mono.margin, nonx.margin, strict.margin))
    disc = {r.name: r for r in semigroup_rows(quad_model(lam=1.0), n=64, seed=0,
                                              t=1.0, dt=1e-3, pairs=200)}
    drow = disc["semigroup_discounted_factor"]
    ok &= drow.verdict == "pass" and drow.margin >= 0.0
    details.append("quad discounted factor slack %.4f under e^-t + 5h" % drow.margin)
    gate = {r.name: r for r in semigroup_rows(counterexample_model(), n=32,
                                              seed=0, t=0.1, dt=1e-3, pairs=5)}
    ok &= gate["semigroup_strict_contraction"].verdict == "skip"
    ok &= gate["semigroup_strict_contraction"].detail == "lambda_lower = 0"
    elapsed = time.monotonic() - t0
    report(7, "semigroup property suite", ok,
           "; ".join(details) + "; degenerate model skips strict contraction; %.1fs" % elapsed)


def test_criterion_08_critical_values():
    t0 = time.monotonic()
    quad = quad_model(lam=1.0)
    mech = mechanical_model(lam=1.0, amplitude=1.0)
    a_quad = admissible_shift(quad, (-1.5, 1.5), tol=0.02, n=128)
    c_mech = critical_value(mech, 0.0, n=128).extrapolated
    a_mech = admissible_shift(mech, (-2.0, 0.0), tol=0.02, n=128)
    shift = critical_value(mech, 0.7, n=128).extrapolated - c_mech
    elapsed = time.monotonic() - t0
    ok = (abs(a_quad) <= 0.02 and abs(c_mech - 1.0) <= 0.05
          and abs(a_mech + 1.0) <= 0.05 and abs(shift - 0.7) <= 0.02)
    report(8, "critical value and admissible shift", ok,
           "quad a* %.4f in 0+-0.02; mechanical c %.4f in 1+-0.05, a* %.4f in -1+-0.05; "
           "shift identity %.4f in 0.7+-0.02; %.1fs"
           % (a_quad, c_mech, a_mech, shift, elapsed))


def test_criterion_09_key_lemma():
    t0 = time.monotonic()
    quad = quad_model(lam=1.0)
    grid = TorusGrid(128)
    rq = key_lemma_check(quad, GridFn.constant(grid, 0.0), 0.25,
                         SamplePlan(n_samples=10000, v_box=2.0, seed=0))
    mech = mechanical_model(lam=1.0, amplitude=0.3)
    stat = solve_discounted(mech, tol=1e-7, grid=grid)
    rm = key_lemma_check(mech, stat.u_minus, 0.5,
                         SamplePlan(n_samples=10000, v_box=2.0, seed=0))
    elapsed = time.monotonic() - t0
    ok = (rq.alpha == 0.5 and rq.violations == 0
          and rm.violations == 0 and rm.alpha > 0)
    report(9, "velocity-graph key lemma", ok,
           "quad alpha %.1f exact, %d violations; mechanical alpha %.4f > 0, "
           "%d violations at beta 0.5 over 10^4 samples; %.1fs"
           % (rq.alpha, rq.violations, rm.alpha, rm.violations, elapsed))


def test_criterion_10_runtime_and_reproducibility(tmp_path):
    cfgp = resolve_config_path("quad")
    outs = []
    for tag in ("a", "b"):
        out = str(tmp_path / tag)
        assert main(["convergence", "--config", cfgp, "--out", out]) == 0
        assert main(["properties", "--config", cfgp, "--out", out + "p",
                     "--seed", "3"]) == 0
        tree = {}
        for root in (out, out + "p"):
            for dirpath, _, files in os.walk(root):
                for f in files:
                    full = os.path.join(dirpath, f)
                    tree[os.path.relpath(full, root)] = open(full, "rb").read()
        outs.append(tree)
    identical = outs[0] == outs[1] and len(outs[0]) > 10
    elapsed = session_elapsed()
    ok = identical and elapsed < 600.0
    report(10, "runtime and reproducibility", ok,
           "two full reruns byte-identical over %d artifacts; suite elapsed %.0fs < 600s"
           % (len(outs[0]), elapsed))
