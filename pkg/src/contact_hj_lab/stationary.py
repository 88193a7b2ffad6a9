"""Stationary solutions, critical values, and the admissible shift.

Two routes to the stationary solution u_- of H(x, u, du) = 0:

* long-time limit: run either evolution scheme and stop once consecutive
  unit-time snapshots agree in sup norm;
* discounted fixed point: for Hamiltonians of the declared discounted form
  lam*u + h(x,p), value-iterate the one-step Bellman operator

      u(x) <- min_v [ e^{-lam*dt} * interp(u)(x - v*dt) + dt * l0(x,v) ],

  with l0(x,v) = L(x, 0, v) the u-independent running cost. The operator
  contracts with factor e^{-lam*dt}, so the sweep stops when the defect
  falls below tol*(1 - e^{-lam*dt}), which bounds the distance to the
  discrete fixed point by tol. The velocity candidate set is a fixed
  uniform grid (no per-sweep refinement) to keep the operator exactly
  contraction-Lipschitz; the induced value bias is O(dv^2/dt), negligible
  at the shipped resolutions.

The critical value of a frozen Hamiltonian h^a(x,p) = H(x, a, p) is
estimated by the vanishing-discount ladder: solve lam*u + h^a = 0 for a
decreasing ladder of lam, record -lam * mean(u), extrapolate linearly to
lam = 0. The admissible shift a* solving c(h^a) = 0 is found by bisection,
using that a -> c(h^a) is monotone increasing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BracketInvalid, NotConverged, NotDiscountedForm
from .evolve import EvolveConfig, _interp_shared, run_batch
from .fields import GridFn, TorusGrid, fmt, sup_dist, wrap
from .models import ContactModel, frozen_model, legendre_L

DEFAULT_LADDER = (0.4, 0.2, 0.1, 0.05)


@dataclass(frozen=True)
class StationaryResult:
    u_minus: GridFn
    method: str  # "longtime" | "discounted"
    residual: float
    iterations: int

    def to_csv(self, path) -> None:
        self.u_minus.to_csv(path)


@dataclass(frozen=True)
class CriticalValueResult:
    h_name: str
    ladder: tuple  # ((lam, estimate), ...) with lam strictly decreasing
    extrapolated: float

    def __post_init__(self):
        lams = [lam for lam, _ in self.ladder]
        if any(b >= a for a, b in zip(lams, lams[1:])):
            raise ValueError("ladder discounts must be strictly decreasing")
        if not all(np.isfinite(e) for _, e in self.ladder):
            raise ValueError("ladder estimates must be finite")

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("lambda,estimate\n")
            for lam, est in self.ladder:
                fh.write("%s,%s\n" % (fmt(lam), fmt(est)))


def solve_longtime(model: ContactModel, phi: GridFn, cfg: EvolveConfig,
                   tol: float = 1e-4, t_max: float = 60.0) -> StationaryResult:
    """Evolve until unit-time windows agree within tol.

    Comparisons use Delta t = 1 windows rather than per-step increments, so
    slow transients cannot fake convergence. The returned iterate satisfies
    sup_dist(T_1 u_-, u_-) <= 2 tol by non-expansiveness.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    steps = int(round(1.0 / cfg.dt))
    nodes, h = phi.grid.nodes, phi.grid.h
    U = phi.values
    windows = int(round(t_max))
    for w in range(1, windows + 1):
        U_next = run_batch(model, U, nodes, h, cfg, steps)
        res = float(np.max(np.abs(U_next - U)))
        U = U_next
        if res < tol:
            return StationaryResult(u_minus=GridFn(phi.grid, U), method="longtime",
                                    residual=res, iterations=w)
    raise NotConverged("no unit-window residual below %g within t_max = %g" % (tol, t_max))


def discounted_value_iteration(h_model: ContactModel, lam: float, grid: TorusGrid,
                               dt: float, tol: float, v_box: float, v_samples: int,
                               max_sweeps: int = 200000):
    """Fixed point of the discounted Bellman operator; returns (GridFn, defects).

    h_model supplies the running cost through its Lagrangian at u = 0; any
    u-dependence of h_model is ignored by construction (pass a frozen model
    or a declared discounted form).
    """
    nodes, n = grid.nodes, grid.n
    vs = np.linspace(-v_box, v_box, v_samples)
    pos = wrap(nodes[:, None] - vs[None, :] * dt) * n
    l0 = legendre_L(h_model, nodes[:, None], np.zeros((n, 1)), vs[None, :])
    q = float(np.exp(-lam * dt))
    U = np.zeros(n)
    defects = []
    for _ in range(max_sweeps):
        U_next = np.min(q * _interp_shared(U, pos) + dt * l0, axis=-1)
        d = float(np.max(np.abs(U_next - U)))
        defects.append(d)
        U = U_next
        if d <= tol * (1.0 - q):
            return GridFn(grid, U), defects
    raise NotConverged("discounted sweep defect stuck above %g after %d sweeps"
                       % (tol * (1.0 - q), max_sweeps))


def solve_discounted(model: ContactModel, tol: float = 1e-6, *, n: int = 256,
                     dt: float = 0.02, v_box: float = 4.0, v_samples: int = 129,
                     grid: TorusGrid | None = None) -> StationaryResult:
    """Stationary solution via the discounted representation fixed point."""
    if model.discount is None:
        raise NotDiscountedForm(
            "%s does not declare the form lam*u + h(x,p)" % model.name)
    g = grid if grid is not None else TorusGrid(n)
    u, defects = discounted_value_iteration(model, model.discount, g, dt, tol,
                                            v_box, v_samples)
    return StationaryResult(u_minus=u, method="discounted",
                            residual=defects[-1], iterations=len(defects))


def critical_value(model: ContactModel, a_freeze: float,
                   ladder=DEFAULT_LADDER, *, n: int = 256, dt: float = 0.25,
                   tol: float = 1e-5, v_box: float = 4.0,
                   v_samples: int = 129) -> CriticalValueResult:
    """Vanishing-discount estimate of the critical value of h^a = H(x, a, p)."""
    lams = tuple(float(l) for l in ladder)
    if not lams or any(l <= 0 for l in lams) or any(
            b >= a for a, b in zip(lams, lams[1:])):
        raise ValueError("ladder must be nonempty, positive, strictly decreasing")
    frozen = frozen_model(model, a_freeze)
    grid = TorusGrid(n)
    entries = []
    for lam in lams:
        u, _ = discounted_value_iteration(frozen, lam, grid, dt, tol, v_box, v_samples)
        entries.append((lam, -lam * float(np.mean(u.values))))
    if len(entries) == 1:
        c = entries[0][1]
    else:
        slope_intercept = np.polyfit([l for l, _ in entries], [e for _, e in entries], 1)
        c = float(slope_intercept[1])
    return CriticalValueResult(h_name=frozen.name, ladder=tuple(entries), extrapolated=c)


def admissible_shift(model: ContactModel, bracket, tol: float = 0.02, *,
                     ladder=DEFAULT_LADDER, n: int = 128, dt: float = 0.25,
                     v_box: float = 4.0, v_samples: int = 129,
                     max_iter: int = 60) -> float:
    """Bisect a -> c(h^a) for the shift a* with c(h^{a*}) = 0.

    The map is monotone increasing, so a sign change over the bracket pins
    a*; BracketInvalid signals that 0 may not be attainable on the bracket.
    """

    def c_of(a):
        return critical_value(model, a, ladder, n=n, dt=dt, v_box=v_box,
                              v_samples=v_samples).extrapolated

    a_lo, a_hi = (float(v) for v in bracket)
    if not a_lo < a_hi:
        raise BracketInvalid("bracket must satisfy a_lo < a_hi")
    c_lo, c_hi = c_of(a_lo), c_of(a_hi)
    if not (c_lo < 0.0 < c_hi):
        raise BracketInvalid(
            "need c(a_lo) < 0 < c(a_hi); got c(%g) = %g, c(%g) = %g"
            % (a_lo, c_lo, a_hi, c_hi))
    for _ in range(max_iter):
        mid = 0.5 * (a_lo + a_hi)
        c_mid = c_of(mid)
        if abs(c_mid) < tol:
            return mid
        if c_mid < 0:
            a_lo = mid
        else:
            a_hi = mid
    raise NotConverged("bisection did not reach |c| < %g in %d steps" % (tol, max_iter))


def stationary_residual(model: ContactModel, u: GridFn, corner_tol: float | None = None) -> float:
    """sup of |H| over the extracted 1-jet of u.

    At corner nodes the jet carries both one-sided slopes, which are the
    differentials the stationary equation constrains; a central difference
    straddling a kink would report an O(1) defect for the exact solution.
    """
    from .jets import extract_jets

    cloud = extract_jets(u, corner_tol=corner_tol)
    return float(np.max(np.abs(model.H(cloud.xs, cloud.us, cloud.ps))))


def discounted_gap(model: ContactModel, phi: GridFn, u_minus: GridFn,
                   times, cfg: EvolveConfig) -> np.ndarray:
    """sup_dist(T_t phi, u_-) at the requested times; shape (len(times), 2)."""
    if model.discount is None:
        raise NotDiscountedForm(
            "%s does not declare the form lam*u + h(x,p)" % model.name)
    run_cfg = EvolveConfig(scheme=cfg.scheme, dt=cfg.dt, cfl_safety=cfg.cfl_safety,
                           theta=cfg.theta, v_box=cfg.v_box, v_samples=cfg.v_samples,
                           inner_fixpoint_iters=cfg.inner_fixpoint_iters,
                           snapshot_times=tuple(sorted(float(t) for t in times)))
    from .evolve import evolve

    run = evolve(model, phi, run_cfg)
    out = np.empty((len(run.snapshots), 2))
    for k, (t, u) in enumerate(run.snapshots):
        out[k, 0] = t
        out[k, 1] = sup_dist(u, u_minus)
    return out
