"""Seeded property suites over the models, the discrete semigroup, and the flow.

Each suite emits PropertyResult rows (name, verdict, margin) suitable for a
machine-readable CSV. Margins are signed slacks: the distance to the pass
boundary, negative on failure. Suites that do not apply to a model are
reported as "skip" with the gating reason in detail, never silently dropped.

All randomness flows through one seeded generator, so a (model, seed) pair
pins every row bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evolve import LF, EvolveConfig, run_batch
from .fields import TorusGrid, fmt
from .flow import energy_profile, integrate
from .models import ContactModel, validate_assumptions

PASS = "pass"
FAIL = "fail"
SKIP = "skip"

# shared float tolerances: semigroup comparisons hold up to accumulated
# roundoff, the flow sandwich up to RK4 truncation at dt = 1e-2
SEMIGROUP_TOL = 1e-12
SANDWICH_TOL = 1e-6


@dataclass(frozen=True)
class PropertyResult:
    name: str
    verdict: str  # "pass" | "fail" | "skip"
    margin: float  # signed slack; nan for skips
    detail: str = ""

    @property
    def failed(self) -> bool:
        return self.verdict == FAIL


def properties_to_csv(results, path) -> None:
    with open(path, "w") as fh:
        fh.write("name,verdict,margin\n")
        for r in results:
            fh.write("%s,%s,%s\n" % (r.name, r.verdict, fmt(r.margin)))


def _verdict(ok: bool) -> str:
    return PASS if ok else FAIL


def _random_fields(rng, nodes, count, scale):
    """Low-harmonic random fields: slope bounded by 4*pi*scale."""
    x = nodes[None, :]
    c = rng.uniform(-scale, scale, size=(count, 1))
    a1 = rng.uniform(0.0, scale, size=(count, 1))
    a2 = rng.uniform(0.0, 0.5 * scale, size=(count, 1))
    s1 = rng.uniform(0.0, 1.0, size=(count, 1))
    s2 = rng.uniform(0.0, 1.0, size=(count, 1))
    return (c + a1 * np.sin(2 * np.pi * (x - s1))
            + a2 * np.sin(4 * np.pi * (x - s2)))


def assumption_rows(model: ContactModel) -> list:
    """Convexity, superlinearity proxy, and du-window checks as result rows."""
    report = validate_assumptions(model)
    by_label = {c.label: c for c in report.checks}
    h1 = by_label["convexity-in-p"]
    h2 = by_label["superlinearity-proxy"]
    h3 = by_label["strict-positivity" if report.h3_strict_required
                  else "relaxed-nonnegativity"]
    return [
        PropertyResult("assumption_h1_convexity", _verdict(h1.passed), h1.lo,
                       "min second difference of H in p"),
        PropertyResult("assumption_h2_superlinearity", _verdict(h2.passed),
                       h2.lo - 1.0, "edge slope minus required slope"),
        PropertyResult("assumption_h3_rate_window", _verdict(h3.passed), h3.lo,
                       h3.label),
    ]


def semigroup_rows(model: ContactModel, *, n: int = 64, seed: int = 0,
                   t: float = 1.0, dt: float = 1e-3, pairs: int = 200) -> list:
    """Monotonicity, non-expansiveness, composition, contraction rows.

    All pairs advance through one shared discrete operator per comparison
    (joint batch), which is what the order/distance statements are about.
    """
    rng = np.random.default_rng(seed)
    grid = TorusGrid(n)
    nodes, h = grid.nodes, grid.h
    cfg = EvolveConfig(scheme=LF, dt=dt, cfl_safety=0.9)
    steps = int(round(t / dt))
    rows = []

    # ordered pairs: psi = phi + nonnegative gap
    phis = _random_fields(rng, nodes, pairs, scale=0.2)
    gap0 = rng.uniform(0.05, 0.5, size=(pairs, 1))
    gap1 = rng.uniform(0.0, 0.3, size=(pairs, 1))
    shift = rng.uniform(0.0, 1.0, size=(pairs, 1))
    psis = phis + gap0 + gap1 * 0.5 * (1.0 + np.sin(2 * np.pi * (nodes[None, :] - shift)))

    out = run_batch(model, np.concatenate([phis, psis]), nodes, h, cfg, steps)
    t_phi, t_psi = out[:pairs], out[pairs:]
    mono_margin = float(np.min(t_psi - t_phi))
    rows.append(PropertyResult(
        "semigroup_monotone", _verdict(mono_margin >= -SEMIGROUP_TOL),
        mono_margin, "min nodewise gap after t=%g on %d ordered pairs" % (t, pairs)))

    before_o = np.max(np.abs(phis - psis), axis=1)
    after_o = np.max(np.abs(t_phi - t_psi), axis=1)

    # arbitrary pairs for the distance statements
    lhs = _random_fields(rng, nodes, pairs, scale=0.2)
    rhs = _random_fields(rng, nodes, pairs, scale=0.2)
    out = run_batch(model, np.concatenate([lhs, rhs]), nodes, h, cfg, steps)
    t_lhs, t_rhs = out[:pairs], out[pairs:]
    before = np.max(np.abs(lhs - rhs), axis=1)
    after = np.max(np.abs(t_lhs - t_rhs), axis=1)
    nonexp_margin = float(np.min(before - after))
    rows.append(PropertyResult(
        "semigroup_nonexpansive", _verdict(nonexp_margin >= -SEMIGROUP_TOL),
        nonexp_margin, "min sup-distance shrinkage on %d pairs" % pairs))

    # composition: one long run against two chained half runs
    half = int(round(0.5 * t / dt))
    one_shot = run_batch(model, phis[:1], nodes, h, cfg, 2 * half)
    stage = run_batch(model, phis[:1], nodes, h, cfg, half)
    chained = run_batch(model, stage, nodes, h, cfg, half)
    comp = float(np.max(np.abs(one_shot - chained)))
    rows.append(PropertyResult(
        "semigroup_composition", _verdict(comp <= SEMIGROUP_TOL),
        SEMIGROUP_TOL - comp, "sup defect of T_{2k} vs T_k T_k"))

    if model.lambda_lower is not None and model.lambda_lower > 0:
        contracted = before_o > 0
        strict_margin = float(np.min((before_o - after_o)[contracted]))
        rows.append(PropertyResult(
            "semigroup_strict_contraction", _verdict(strict_margin > 0.0),
            strict_margin, "min distance loss at t=%g" % t))
    else:
        rows.append(PropertyResult(
            "semigroup_strict_contraction", SKIP, float("nan"),
            "lambda_lower = 0"))

    if model.discount is not None:
        bound = float(np.exp(-model.discount * t)) + 5.0 * h
        factor = float(np.max(after_o / before_o))
        rows.append(PropertyResult(
            "semigroup_discounted_factor", _verdict(factor <= bound),
            bound - factor, "max contraction factor vs exp(-lambda t) + 5h"))
    else:
        rows.append(PropertyResult(
            "semigroup_discounted_factor", SKIP, float("nan"),
            "discount form not declared"))
    return rows


def flow_rows(model: ContactModel, *, seed: int = 0, samples: int = 100,
              t: float = 1.0, dt: float = 1e-2) -> list:
    """Energy sandwich exp(-Lambda t)|H(z0)| <= |H(z(t))| <= |H(z0)|."""
    rng = np.random.default_rng(seed + 1)
    worst = np.inf
    for _ in range(samples):
        z0 = (float(rng.uniform(0.0, 1.0)), float(rng.uniform(-1.0, 1.0)),
              float(rng.uniform(-2.0, 2.0)))
        traj = integrate(model, z0, (0.0, t), dt)
        prof = energy_profile(model, traj, tol=SANDWICH_TOL)
        h0 = abs(float(prof.hs[0]))
        ah = np.abs(prof.hs)
        lower = np.exp(-model.Lambda * (prof.ts - prof.ts[0])) * h0
        worst = min(worst, float(np.min(ah - lower)), float(np.min(h0 - ah)))
    return [PropertyResult(
        "flow_energy_sandwich", _verdict(worst >= -SANDWICH_TOL), worst,
        "min sandwich slack over %d random orbits to t=%g" % (samples, t))]


def run_property_suite(model: ContactModel, *, n: int = 64, seed: int = 0,
                       t: float = 1.0, dt: float = 1e-3, pairs: int = 200,
                       sandwich_samples: int = 100) -> list:
    """All rows for one model; order is stable for CSV diffing."""
    rows = assumption_rows(model)
    rows += semigroup_rows(model, n=n, seed=seed, t=t, dt=dt, pairs=pairs)
    rows += flow_rows(model, seed=seed, samples=sandwich_samples, t=t)
    return rows
