"""Rate measurement and structural checks.

Covers: sup-norm and jet-Hausdorff distance series against the stationary
solution, log-linear / log-log rate regression, the Hamiltonian residual
along a run (sup of |H| over the extracted 1-jet per snapshot), the
calibrated-cost gap l_u(x,v) = L(x,u(x),v) - du(x,v) with its two-branch
lower bound (quadratic near the velocity graph, flat beta away from it),
and the contact rate lambda(H) = inf dH/du over a compact slab
{(x,u,p) : u in I, |H(x,u,p)| <= B}.

Rate fits exclude burn-in and floor-level points by window choice; both
are the caller's responsibility and the errors point at the usual causes
(too few points, nonpositive values after hitting the scheme floor).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptySlab, GridMismatch, InsufficientData, NonPositiveValues
from .evolve import EvolutionRun
from .fields import GridFn, fmt, sup_dist, torus_dist
from .jets import directional_derivative, extract_jets, hausdorff, reachable_differentials
from .models import ContactModel, legendre_L
from .stationary import stationary_residual


# ------------------------------------------------------------------- series


def sup_error_series(run: EvolutionRun, u_minus: GridFn) -> np.ndarray:
    """(t, sup_dist(snapshot, u_minus)) per snapshot; shape (k, 2)."""
    out = np.empty((len(run.snapshots), 2))
    for k, (t, u) in enumerate(run.snapshots):
        if u.grid != u_minus.grid:
            raise GridMismatch("snapshot grid differs from the reference grid")
        out[k] = (t, sup_dist(u, u_minus))
    return out


def hausdorff_series(run: EvolutionRun, u_minus: GridFn,
                     corner_tol: float | None = None) -> np.ndarray:
    """(t, d_H between the snapshot's 1-jet and the reference 1-jet)."""
    ref = extract_jets(u_minus, corner_tol=corner_tol)
    out = np.empty((len(run.snapshots), 2))
    for k, (t, u) in enumerate(run.snapshots):
        if u.grid != u_minus.grid:
            raise GridMismatch("snapshot grid differs from the reference grid")
        out[k] = (t, hausdorff(extract_jets(u, corner_tol=corner_tol), ref))
    return out


def hamiltonian_residual_series(model: ContactModel, run: EvolutionRun,
                                corner_tol: float | None = None) -> np.ndarray:
    """(t, sup |H| over the snapshot's extracted 1-jet)."""
    out = np.empty((len(run.snapshots), 2))
    for k, (t, u) in enumerate(run.snapshots):
        out[k] = (t, stationary_residual(model, u, corner_tol=corner_tol))
    return out


def series_to_csv(series: np.ndarray, path, header: str = "t,value") -> None:
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for t, v in series:
            fh.write("%s,%s\n" % (fmt(t), fmt(v)))


# ----------------------------------------------------------------- rate fits


@dataclass(frozen=True)
class RateFit:
    kind: str  # "exponential" | "power"
    exponent: float
    prefactor: float
    r2: float
    window: tuple
    n_points: int


def _lsq_loglinear(ts, log_es):
    slope, intercept = np.polyfit(ts, log_es, 1)
    pred = slope * ts + intercept
    ss_res = float(np.sum((log_es - pred) ** 2))
    ss_tot = float(np.sum((log_es - np.mean(log_es)) ** 2))
    if ss_tot < 1e-30:
        r2 = 1.0 if ss_res < 1e-20 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return float(slope), float(np.exp(intercept)), r2


def fit_rate(series, window, kind: str | None = None) -> RateFit:
    """Least-squares rate on log-transformed data within the window.

    kind "exponential" fits log e against t; "power" fits log e against
    log t (points with t <= 0 are dropped for that fit). With no hint both
    fits run and the higher r2 wins.
    """
    arr = np.asarray(series, dtype=float)
    t0, t1 = (float(w) for w in window)
    mask = (arr[:, 0] >= t0) & (arr[:, 0] <= t1)
    ts, es = arr[mask, 0], arr[mask, 1]
    if len(ts) < 5:
        raise InsufficientData("need >= 5 points in window, have %d" % len(ts))
    if np.any(es <= 0):
        raise NonPositiveValues(
            "window contains values <= 0; clip the window above the noise floor")
    log_es = np.log(es)

    def exp_fit():
        slope, pref, r2 = _lsq_loglinear(ts, log_es)
        return RateFit("exponential", slope, pref, r2, (t0, t1), len(ts))

    def pow_fit():
        pos = ts > 0
        if int(np.sum(pos)) < 5:
            raise InsufficientData("power fit needs >= 5 points with t > 0")
        slope, pref, r2 = _lsq_loglinear(np.log(ts[pos]), log_es[pos])
        return RateFit("power", slope, pref, r2, (t0, t1), int(np.sum(pos)))

    if kind == "exponential":
        return exp_fit()
    if kind == "power":
        return pow_fit()
    if kind is not None:
        raise ValueError("kind must be 'exponential', 'power', or None")
    best = exp_fit()
    try:
        alt = pow_fit()
    except InsufficientData:
        return best
    return alt if alt.r2 > best.r2 else best


def fits_to_csv(fits, path) -> None:
    with open(path, "w") as fh:
        fh.write("kind,exponent,prefactor,r2,t_min,t_max,n\n")
        for f in fits:
            fh.write("%s,%s,%s,%s,%s,%s,%d\n" % (
                f.kind, fmt(f.exponent), fmt(f.prefactor), fmt(f.r2),
                fmt(f.window[0]), fmt(f.window[1]), f.n_points))


# ------------------------------------------------------- key-lemma machinery


def l_u_eval(model: ContactModel, u: GridFn, x: float, v: float,
             corner_tol: float | None = None) -> float:
    """L(x, u(x), v) minus the directional derivative of u at the node x."""
    n = u.grid.n
    i = int(round(float(x) * n)) % n
    xi = float(u.grid.nodes[i])
    ui = float(u.values[i])
    lval = float(legendre_L(model, xi, ui, float(v)))
    return lval - directional_derivative(u, i, float(v), corner_tol=corner_tol)


def velocity_graph(model: ContactModel, u: GridFn,
                   corner_tol: float | None = None):
    """Pushforward of the 1-jet through dH/dp: points (x, dH/dp(x,u,p)).

    Returns (xs, vs, node_min_h): the graph point arrays plus, per grid
    node, min over the node's reachable differentials of H(x, u(x), p).
    """
    xs, vs = [], []
    n = u.grid.n
    node_min_h = np.empty(n)
    for i in range(n):
        xi = float(u.grid.nodes[i])
        ui = float(u.values[i])
        ps = reachable_differentials(u, i, corner_tol)
        node_min_h[i] = min(float(model.H(xi, ui, p)) for p in ps)
        for p in ps:
            xs.append(xi)
            vs.append(float(model.dH_dp(xi, ui, p)))
    return np.asarray(xs), np.asarray(vs), node_min_h


@dataclass(frozen=True)
class SamplePlan:
    n_samples: int = 10000
    v_box: float = 2.0
    seed: int = 0
    d_floor: float | None = None  # default sqrt(10 h): below it g/d^2 is noise


@dataclass(frozen=True)
class KeyLemmaReport:
    alpha: float
    delta: float
    beta: float
    violations: int
    samples: int


def key_lemma_check(model: ContactModel, u: GridFn, beta: float,
                    plan: SamplePlan = SamplePlan(),
                    corner_tol: float | None = None) -> KeyLemmaReport:
    """Two-branch lower bound for g(x,v) = l_u(x,v) + min_{p in D*u(x)} H.

    Samples (x, v) with x on nodes and v uniform; d is the sum-metric
    distance (torus distance plus velocity gap) to the velocity graph.
    delta is fitted as the largest distance among samples failing the flat
    branch (g < beta), capped at 0.75 of the largest sampled distance so an
    oversized beta surfaces as far-branch violations instead of silently
    swallowing every sample into the near region. alpha is the smallest
    g/d^2 over near samples beyond the noise horizon d_floor (g carries an
    O(h) absolute error, so closer ratios are meaningless; those samples
    are instead checked for g >= -10 h). Violations are counted at the
    fitted constants and never dropped.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    rng = np.random.default_rng(plan.seed)
    n = u.grid.n
    h = u.grid.h
    idx = rng.integers(0, n, size=plan.n_samples)
    vs = rng.uniform(-plan.v_box, plan.v_box, size=plan.n_samples)
    x_s = u.grid.nodes[idx]
    u_s = u.values[idx]

    gx, gv, node_min_h = velocity_graph(model, u, corner_tol)

    # l_u = L - directional derivative (min p*v over reachable differentials)
    lvals = legendre_L(model, x_s, u_s, vs)
    left = u.left_slopes()[idx]
    right = u.right_slopes()[idx]
    tol = 10.0 * h if corner_tol is None else corner_tol
    corner = np.abs(left - right) > tol
    dd = np.where(corner, np.minimum(left * vs, right * vs),
                  0.5 * (left + right) * vs)
    g = lvals - dd + node_min_h[idx]

    d = np.empty(plan.n_samples)
    chunk = 2048
    for s in range(0, plan.n_samples, chunk):
        dist = (torus_dist(x_s[s:s + chunk, None], gx[None, :])
                + np.abs(vs[s:s + chunk, None] - gv[None, :]))
        d[s:s + chunk] = dist.min(axis=1)

    d_max = float(np.max(d))
    flat_fail = g < beta
    delta = float(np.max(d[flat_fail])) if np.any(flat_fail) else 0.0
    delta = min(delta, 0.75 * d_max)

    d_floor = plan.d_floor if plan.d_floor is not None else float(np.sqrt(10.0 * h))
    near = (d > d_floor) & (d <= delta)
    alpha = float(np.min(g[near] / d[near] ** 2)) if np.any(near) else 0.0

    tiny_viol = (d <= d_floor) & (g < -10.0 * h)
    far_viol = (d > delta) & (g < beta)
    violations = int(np.sum(tiny_viol) + np.sum(far_viol))
    return KeyLemmaReport(alpha=alpha, delta=delta, beta=float(beta),
                          violations=violations, samples=plan.n_samples)


# ------------------------------------------------------------ slab estimate


@dataclass(frozen=True)
class CompactSlab:
    u_lo: float
    u_hi: float
    B: float
    nx: int = 48
    nu: int = 48
    n_p: int = 48

    def __post_init__(self):
        if not self.u_lo < self.u_hi:
            raise ValueError("need u_lo < u_hi")
        if self.B <= 0:
            raise ValueError("need B > 0")
        if min(self.nx, self.nu, self.n_p) < 2:
            raise ValueError("need at least 2 samples per axis")


def lambda_estimate(model: ContactModel, slab: CompactSlab) -> float:
    """min of dH/du over a dense sample of {u in I, |H| <= B}."""
    xs = np.linspace(0.0, 1.0, slab.nx, endpoint=False)[:, None, None]
    us = np.linspace(slab.u_lo, slab.u_hi, slab.nu)[None, :, None]
    ps = np.linspace(-model.p_box, model.p_box, slab.n_p)[None, None, :]
    H = model.H(xs, us, ps)
    member = np.abs(H) <= slab.B
    if not np.any(member):
        raise EmptySlab("no sampled point satisfies |H| <= %g" % slab.B)
    dHu = np.broadcast_to(model.dH_du(xs, us, ps), H.shape)
    return float(np.min(dHu[member]))
