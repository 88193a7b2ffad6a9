"""Contact Hamilton ODE flow on T^1 x R x R.

The characteristic system is

    dx/dt = dH/dp,
    du/dt = dH/dp * p - H,
    dp/dt = -dH/dx - dH/du * p,

integrated with classical fourth-order Runge-Kutta. Along any orbit the
energy obeys d/dt H = -(dH/du) H, which for 0 <= dH/du <= Lambda pins |H|
between exp(-Lambda t) |H(z0)| and |H(z0)|; energy_profile evaluates that
sandwich. backward_minimizer shoots calibrated curves backward from the
graph of a stationary solution, starting the momentum at a reachable
differential and resolving corner ambiguity by the smaller calibration
residual.

x is wrapped to [0, 1) at every evaluation and in stored samples; u and p
are unwrapped reals. Samples are stored in ascending time order even for
backward runs (the integration simply runs from the larger time down and is
reversed on return).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonFinite
from .fields import GridFn, fmt, wrap
from .jets import reachable_differentials
from .models import ContactModel, legendre_L


@dataclass(frozen=True)
class Trajectory:
    """Sampled orbit of the contact flow; arrays share one ascending time grid."""

    ts: np.ndarray = field(repr=False)
    xs: np.ndarray = field(repr=False)
    us: np.ndarray = field(repr=False)
    ps: np.ndarray = field(repr=False)
    dt: float = 0.0

    def __post_init__(self):
        for name in ("ts", "xs", "us", "ps"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if not np.all(np.isfinite(self.ts)):
            raise ValueError("trajectory times must be finite")
        if len(self.ts) < 2 or not np.all(np.diff(self.ts) > 0):
            raise ValueError("trajectory needs strictly increasing times")
        for name in ("xs", "us", "ps"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError("trajectory states must be finite")

    def __len__(self) -> int:
        return len(self.ts)

    def state(self, k: int):
        return (self.xs[k], self.us[k], self.ps[k])


def _deriv(model: ContactModel, x, u, p):
    xw = wrap(x)
    hp = model.dH_dp(xw, u, p)
    dx = hp
    du = hp * p - model.H(xw, u, p)
    dp = -model.dH_dx(xw, u, p) - model.dH_du(xw, u, p) * p
    return dx, du, dp


def _rk4_step(model: ContactModel, x, u, p, dt):
    k1 = _deriv(model, x, u, p)
    k2 = _deriv(model, x + 0.5 * dt * k1[0], u + 0.5 * dt * k1[1], p + 0.5 * dt * k1[2])
    k3 = _deriv(model, x + 0.5 * dt * k2[0], u + 0.5 * dt * k2[1], p + 0.5 * dt * k2[2])
    k4 = _deriv(model, x + dt * k3[0], u + dt * k3[1], p + dt * k3[2])
    x1 = x + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    u1 = u + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    p1 = p + dt / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
    return wrap(x1), u1, p1


def integrate_states(model: ContactModel, x0, u0, p0, t0: float, t1: float, dt: float):
    """RK4 path for (possibly vector-valued) initial states.

    Returns (ts, xs, us, ps) in integration order, ts[0] = t0, ts[-1] = t1
    exactly, with a final partial step when (t1 - t0) is not a multiple of
    dt. Raises NonFinite as soon as a state stops being finite.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t1 == t0:
        raise ValueError("t_span must have t1 != t0")
    span = t1 - t0
    sign = 1.0 if span > 0 else -1.0
    n_full = int(np.floor(abs(span) / dt + 1e-12))
    x = np.asarray(x0, dtype=float) + 0.0
    u = np.asarray(u0, dtype=float) + 0.0
    p = np.asarray(p0, dtype=float) + 0.0
    ts = [t0]
    xs, us, ps = [wrap(x)], [u], [p]
    # overflow in a blown-up state is reported via NonFinite, not a warning
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n_full):
            x, u, p = _rk4_step(model, x, u, p, sign * dt)
            if not (np.all(np.isfinite(x)) and np.all(np.isfinite(u)) and np.all(np.isfinite(p))):
                raise NonFinite("state left the finite range near t=%g" % (t0 + sign * (k + 1) * dt))
            ts.append(t0 + sign * (k + 1) * dt)
            xs.append(x)
            us.append(u)
            ps.append(p)
        t_last = ts[-1]
        if abs(t1 - t_last) > 1e-12 * max(1.0, abs(t1)):
            x, u, p = _rk4_step(model, x, u, p, t1 - t_last)
            if not (np.all(np.isfinite(x)) and np.all(np.isfinite(u)) and np.all(np.isfinite(p))):
                raise NonFinite("state left the finite range near t=%g" % t1)
            ts.append(t1)
            xs.append(x)
            us.append(u)
            ps.append(p)
    return np.asarray(ts), np.asarray(xs), np.asarray(us), np.asarray(ps)


def integrate(model: ContactModel, z0, t_span, dt: float) -> Trajectory:
    """Integrate one orbit of the contact flow; backward runs allowed (t1 < t0)."""
    x0, u0, p0 = (float(v) for v in z0)
    t0, t1 = (float(v) for v in t_span)
    ts, xs, us, ps = integrate_states(model, x0, u0, p0, t0, t1, dt)
    if t1 < t0:
        ts, xs, us, ps = ts[::-1], xs[::-1], us[::-1], ps[::-1]
    return Trajectory(ts=ts, xs=xs, us=us, ps=ps, dt=dt)


@dataclass(frozen=True)
class EnergyProfile:
    ts: np.ndarray = field(repr=False)
    hs: np.ndarray = field(repr=False)
    lower_ok: np.ndarray = field(repr=False)  # e^{-Lambda (t-t0)} |H0| <= |H(t)| + tol
    upper_ok: np.ndarray = field(repr=False)  # |H(t)| <= |H0| + tol
    tol: float = 1e-6

    @property
    def sandwich_ok(self) -> bool:
        return bool(np.all(self.lower_ok) and np.all(self.upper_ok))


def energy_profile(model: ContactModel, traj: Trajectory, tol: float = 1e-6) -> EnergyProfile:
    """H along the orbit plus the exponential sandwich flags."""
    hs = model.H(traj.xs, traj.us, traj.ps)
    h0 = abs(float(hs[0]))
    rel = traj.ts - traj.ts[0]
    lower = np.exp(-model.Lambda * rel) * h0
    ah = np.abs(hs)
    return EnergyProfile(
        ts=traj.ts,
        hs=np.asarray(hs, dtype=float),
        lower_ok=ah >= lower - tol,
        upper_ok=ah <= h0 + tol,
        tol=tol,
    )


def calibration_residual(model: ContactModel, traj: Trajectory, u: GridFn) -> float:
    """Defect of the calibration identity along a sampled curve.

    |u(x(t1)) - u(x(t0)) - integral of L(x, u(x), dx/dt) dt| with the
    velocity read from dH/dp along the samples and the integral by
    trapezoid rule.
    """
    v = model.dH_dp(traj.xs, traj.us, traj.ps)
    uvals = u(traj.xs)
    lvals = legendre_L(model, traj.xs, uvals, v)
    integral = float(np.trapezoid(lvals, traj.ts))
    increment = float(uvals[-1] - uvals[0])
    return abs(increment - integral)


def backward_minimizer(
    model: ContactModel,
    u_minus: GridFn,
    x: float,
    T: float,
    dt: float,
    corner_tol: float = None,
) -> Trajectory:
    """Backward calibrated curve from the graph of a stationary solution.

    Starts at (x, u_minus(x), p0) with p0 a reachable differential of
    u_minus at the node nearest x and integrates over [0, -T]. At a corner
    both one-sided slopes are tried and the orbit with the smaller
    calibration residual wins.
    """
    if T <= 0:
        raise ValueError("backward horizon T must be positive")
    n = u_minus.grid.n
    i = int(round(wrap(x) * n)) % n
    x0 = float(u_minus.grid.nodes[i])
    u0 = float(u_minus.values[i])
    candidates = reachable_differentials(u_minus, i, corner_tol)
    best = None
    best_res = np.inf
    for p0 in candidates:
        traj = integrate(model, (x0, u0, float(p0)), (0.0, -T), dt)
        res = calibration_residual(model, traj, u_minus)
        if res < best_res:
            best, best_res = traj, res
    return best


def trajectory_to_csv(model: ContactModel, traj: Trajectory, path) -> None:
    hs = model.H(traj.xs, traj.us, traj.ps)
    with open(path, "w") as fh:
        fh.write("t,x,u,p,H\n")
        for t, x, u, p, hval in zip(traj.ts, traj.xs, traj.us, traj.ps, hs):
            fh.write("%s,%s,%s,%s,%s\n" % (fmt(t), fmt(x), fmt(u), fmt(p), fmt(hval)))
