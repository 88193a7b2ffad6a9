"""Catalog of contact Hamiltonians H(x, u, p) on the 1-torus.

Each model packages the Hamiltonian, its exact first partials, an optional
closed-form Lagrangian, and the structural constants the solvers and
diagnostics need: an upper bound Lambda for dH/du, an optional uniform lower
bound lambda_lower, and the momentum window p_box used by the numeric
Legendre transform and by assumption validation.

Built-in families:

  quad            H = lam*u + p^2/2                  (discounted form)
  mechanical      H = lam*u + p^2/2 + A*cos(2*pi*x)  (discounted form)
  counterexample  H = (p^2 + rho(u^3))/2 with rho a smooth nondecreasing
                  plateau function; dH/du >= 0 but vanishes at u = 0, so the
                  strict positivity assumption fails and only algebraic decay
                  toward the stationary solution is available
  frozen          u-independent classical Hamiltonian h(x, p) = H(x, a, p)
                  obtained by freezing the contact variable of a base model
  concave         H = u - p^2, a deliberately broken model (concave in p)
                  kept as the negative control for assumption validation

All evaluators accept scalars or numpy arrays and broadcast.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, VelocityOutOfRange
from .fields import GridFn

__all__ = [
    "ContactModel",
    "ModelReport",
    "AssumptionCheck",
    "eval_H",
    "legendre_L",
    "solve_p_for_velocity",
    "rho_smooth",
    "rho_smooth_deriv",
    "validate_assumptions",
    "build_surrogate",
    "quad_model",
    "mechanical_model",
    "counterexample_model",
    "frozen_model",
    "concave_model",
    "make_model",
    "MODEL_NAMES",
]


@dataclass(frozen=True)
class ContactModel:
    """A contact Hamiltonian with exact partials and structural metadata.

    discount is set when H has the exact form discount*u + h(x, p); the
    discounted stationary solver and a few exact identities require it.
    """

    name: str
    H: Callable = field(repr=False)
    dH_dx: Callable = field(repr=False)
    dH_du: Callable = field(repr=False)
    dH_dp: Callable = field(repr=False)
    Lambda: float = 1.0
    lambda_lower: Optional[float] = None
    p_box: float = 8.0
    L_closed: Optional[Callable] = field(default=None, repr=False)
    discount: Optional[float] = None

    def __post_init__(self):
        if not self.Lambda > 0:
            raise ValueError("Lambda must be positive")
        if self.lambda_lower is not None and self.lambda_lower < 0:
            raise ValueError("lambda_lower must be >= 0 when declared")
        if not self.p_box > 0:
            raise ValueError("p_box must be positive")


def eval_H(model: ContactModel, x, u, p):
    """Evaluate the Hamiltonian; pure and total on reals."""
    return model.H(x, u, p)


# ---------------------------------------------------------------------------
# smooth plateau function rho
# ---------------------------------------------------------------------------

# fixed Gauss-Legendre rule; the integrand is C^inf on the closed interval
# (all derivatives vanish at the endpoints) so 48 nodes reach roundoff
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(48)

RHO_LOWER_PLATEAU = -1.5
RHO_UPPER_PLATEAU = 0.5


def _bump(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    with np.errstate(divide="ignore", over="ignore"):
        out[pos] = np.exp(-1.0 / t[pos])
    return out


def smoothstep(t):
    """C^inf step: 0 for t <= 0, 1 for t >= 1, b(t)/(b(t)+b(1-t)) between."""
    t = np.asarray(t, dtype=float)
    b0 = _bump(t)
    b1 = _bump(1.0 - t)
    out = np.empty_like(t)
    mid = (t > 0) & (t < 1)
    out[t <= 0] = 0.0
    out[t >= 1] = 1.0
    out[mid] = b0[mid] / (b0[mid] + b1[mid])
    return out


def smoothstep_deriv(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    mid = (t > 0) & (t < 1)
    tm = t[mid]
    b0 = np.exp(-1.0 / tm)
    b1 = np.exp(-1.0 / (1.0 - tm))
    db0 = b0 / tm**2
    db1 = -b1 / (1.0 - tm) ** 2
    denom = b0 + b1
    out[mid] = (db0 * denom - b0 * (db0 + db1)) / denom**2
    return out


def _smoothstep_integral(y):
    """G(y) = integral of smoothstep over [0, y] for y in [0, 1], vectorized."""
    y = np.asarray(y, dtype=float)
    # map the fixed rule onto [0, y] per entry
    t = 0.5 * y[..., None] * (_GL_NODES + 1.0)
    return 0.5 * y * np.sum(_GL_WEIGHTS * smoothstep(t), axis=-1)


def rho_smooth(s):
    """Smooth nondecreasing plateau function.

    Identity on [-1, 0]; constant -1.5 below -2 and 0.5 above 1; on the
    transition intervals the derivative is blended through the smooth step
    so that rho' stays in [0, 1] everywhere.
    """
    s = np.asarray(s, dtype=float)
    out = np.empty_like(s)
    out[s <= -2.0] = RHO_LOWER_PLATEAU
    out[s >= 1.0] = RHO_UPPER_PLATEAU
    ident = (s >= -1.0) & (s <= 0.0)
    out[ident] = s[ident]
    lo = (s > -2.0) & (s < -1.0)
    if np.any(lo):
        # rho' = smoothstep(s + 2) rising 0 -> 1 over [-2, -1]
        out[lo] = RHO_LOWER_PLATEAU + _smoothstep_integral(s[lo] + 2.0)
    hi = (s > 0.0) & (s < 1.0)
    if np.any(hi):
        # rho' = 1 - smoothstep(s) falling 1 -> 0 over [0, 1]
        out[hi] = s[hi] - _smoothstep_integral(s[hi])
    return out if out.ndim else float(out)


def rho_smooth_deriv(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    out[(s >= -1.0) & (s <= 0.0)] = 1.0
    lo = (s > -2.0) & (s < -1.0)
    out[lo] = smoothstep(s[lo] + 2.0)
    hi = (s > 0.0) & (s < 1.0)
    out[hi] = 1.0 - smoothstep(s[hi])
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# numeric Legendre transform
# ---------------------------------------------------------------------------


def solve_p_for_velocity(model: ContactModel, x, u, v, tol=1e-12, max_iter=100):
    """Solve v = dH/dp(x, u, p) for p in [-p_box, p_box].

    Safeguarded Newton iteration on the strictly increasing map p -> dH/dp
    with a bisection bracket; the Newton derivative is a central difference
    of dH/dp. Raises VelocityOutOfRange when v is not attainable inside the
    momentum window, which signals that p_box is too small for the request.
    """
    x, u, v = np.broadcast_arrays(
        np.asarray(x, dtype=float), np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    )
    shape = v.shape
    x = x.ravel().copy()
    u = u.ravel().copy()
    v = v.ravel().copy()
    lo = np.full_like(v, -model.p_box)
    hi = np.full_like(v, model.p_box)
    g_lo = model.dH_dp(x, u, lo) - v
    g_hi = model.dH_dp(x, u, hi) - v
    if np.any(g_lo > 0.0) or np.any(g_hi < 0.0):
        worst = float(np.max(np.abs(v)))
        raise VelocityOutOfRange(
            "velocity magnitude up to %g not attainable as dH/dp within |p| <= %g"
            % (worst, model.p_box)
        )
    p = 0.5 * (lo + hi)
    g = model.dH_dp(x, u, p) - v
    for _ in range(max_iter):
        if np.all(np.abs(g) <= tol):
            break
        eps = 1e-6 * (1.0 + np.abs(p))
        dg = (model.dH_dp(x, u, p + eps) - model.dH_dp(x, u, p - eps)) / (2.0 * eps)
        with np.errstate(divide="ignore", invalid="ignore"):
            p_new = p - g / dg
        bad = ~np.isfinite(p_new) | (p_new < lo) | (p_new > hi)
        p_new = np.where(bad, 0.5 * (lo + hi), p_new)
        g_new = model.dH_dp(x, u, p_new) - v
        neg = g_new < 0.0
        lo = np.where(neg, p_new, lo)
        hi = np.where(neg, hi, p_new)
        p, g = p_new, g_new
    p = p.reshape(shape)
    return p if p.ndim else float(p)


def legendre_L(model: ContactModel, x, u, v, tol=1e-12, max_iter=100):
    """Lagrangian L(x, u, v) = sup_p (p*v - H(x, u, p)).

    Uses the closed form when the model carries one; otherwise solves
    v = dH/dp and evaluates p*v - H at the maximizer.
    """
    if model.L_closed is not None:
        return model.L_closed(x, u, v)
    p = solve_p_for_velocity(model, x, u, v, tol=tol, max_iter=max_iter)
    return p * v - model.H(x, u, p)


# ---------------------------------------------------------------------------
# assumption validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AssumptionCheck:
    assumption: str  # "H1", "H2" or "H3"
    label: str
    lo: float
    hi: float
    passed: bool


@dataclass(frozen=True)
class ModelReport:
    model_name: str
    slab: tuple  # (u_box, p_box, (nx, nu, np))
    checks: tuple
    h3_strict_required: bool

    @property
    def ok(self) -> bool:
        for c in self.checks:
            if c.assumption == "H3":
                strict = c.label.startswith("strict")
                if self.h3_strict_required and strict and not c.passed:
                    return False
                if not self.h3_strict_required and not strict and not c.passed:
                    return False
            elif not c.passed:
                return False
        return True


def validate_assumptions(
    model: ContactModel,
    u_box: float = 2.0,
    p_box: Optional[float] = None,
    nx: int = 20,
    nu: int = 21,
    n_p: int = 21,
    h2_slope: float = 1.0,
) -> ModelReport:
    """Sample the compact slab |u| <= u_box, |p| <= p_box and check (H1)-(H3).

    H1: second differences of H in p are positive (convexity).
    H2: finite-slab superlinearity proxy, H(x, u, +-p_box)/p_box must exceed
        the configured slope; true superlinearity is not machine-checkable.
    H3: finite-difference dH/du lies in (0, Lambda] (strict row) or within
        [0, Lambda] up to roundoff slack (relaxed row). Failures are reported
        as data, not raised.
    """
    if u_box <= 0 or (p_box is not None and p_box <= 0):
        raise ValueError("slab bounds must be positive")
    pb = model.p_box if p_box is None else p_box
    xs = np.arange(nx) / nx
    us = np.linspace(-u_box, u_box, nu)
    ps = np.linspace(-pb, pb, n_p)
    X, U, P = np.meshgrid(xs, us, ps, indexing="ij")

    dp = ps[1] - ps[0]
    d2 = (
        model.H(X, U, P + dp) - 2.0 * model.H(X, U, P) + model.H(X, U, P - dp)
    ) / dp**2
    h1 = AssumptionCheck(
        "H1", "convexity-in-p", float(np.min(d2)), float(np.max(d2)), bool(np.min(d2) > 0.0)
    )

    edge = np.minimum(model.H(X[..., 0], U[..., 0], pb), model.H(X[..., 0], U[..., 0], -pb)) / pb
    h2 = AssumptionCheck(
        "H2",
        "superlinearity-proxy",
        float(np.min(edge)),
        float(np.max(edge)),
        bool(np.min(edge) >= h2_slope),
    )

    du = 1e-6
    fd = (model.H(X, U + du, P) - model.H(X, U - du, P)) / (2.0 * du)
    fd_min, fd_max = float(np.min(fd)), float(np.max(fd))
    slack = 1e-7
    upper_ok = fd_max <= model.Lambda + slack
    h3_strict = AssumptionCheck(
        "H3", "strict-positivity", fd_min, fd_max, bool(fd_min > 0.0 and upper_ok)
    )
    h3_relaxed = AssumptionCheck(
        "H3", "relaxed-nonnegativity", fd_min, fd_max, bool(fd_min >= -slack and upper_ok)
    )

    return ModelReport(
        model_name=model.name,
        slab=(u_box, pb, (nx, nu, n_p)),
        checks=(h1, h2, h3_strict, h3_relaxed),
        h3_strict_required=bool(model.lambda_lower) and model.lambda_lower > 0,
    )


# ---------------------------------------------------------------------------
# discounted surrogate
# ---------------------------------------------------------------------------


def build_surrogate(model: ContactModel, u_minus: GridFn, lam: float) -> ContactModel:
    """Freeze the contact argument of H on the graph of u_minus and relinearize.

    Returns Hbar(x, u, p) = lam*(u - u_minus(x)) + H(x, u_minus(x), p), the
    discounted surrogate with dHbar/du identically lam. u_minus is read
    through linear interpolation; its x-derivative (needed for dHbar/dx) is
    the piecewise-constant cell slope, so dHbar/dx jumps at grid nodes.
    """
    if lam <= 0:
        raise ValueError("surrogate discount rate must be positive")
    um = u_minus

    def H(x, u, p):
        ub = um(x)
        return lam * (u - ub) + model.H(x, ub, p)

    def dH_dx(x, u, p):
        ub = um(x)
        s = um.cell_slope(x)
        return -lam * s + model.dH_dx(x, ub, p) + model.dH_du(x, ub, p) * s

    def dH_du(x, u, p):
        return lam + 0.0 * (np.asarray(x) + np.asarray(u) + np.asarray(p))

    def dH_dp(x, u, p):
        return model.dH_dp(x, um(x), p)

    L_closed = None
    if model.L_closed is not None:
        base_L = model.L_closed

        def L_closed(x, u, v):
            ub = um(x)
            return base_L(x, ub, v) - lam * (u - ub)

    return ContactModel(
        name="surrogate(%s)" % model.name,
        H=H,
        dH_dx=dH_dx,
        dH_du=dH_du,
        dH_dp=dH_dp,
        Lambda=lam,
        lambda_lower=lam,
        p_box=model.p_box,
        L_closed=L_closed,
        discount=lam,
    )


# ---------------------------------------------------------------------------
# built-in models
# ---------------------------------------------------------------------------


def quad_model(lam: float = 1.0, p_box: float = 8.0) -> ContactModel:
    """H = lam*u + p^2/2, the discounted quadratic family."""
    if lam <= 0:
        raise ValueError("quad model needs lam > 0")

    def H(x, u, p):
        return lam * u + 0.5 * p * p + 0.0 * np.asarray(x)

    def dH_dx(x, u, p):
        return 0.0 * (np.asarray(x) + np.asarray(u) + np.asarray(p))

    def dH_du(x, u, p):
        return lam + 0.0 * (np.asarray(x) + np.asarray(u) + np.asarray(p))

    def dH_dp(x, u, p):
        return np.asarray(p) + 0.0 * (np.asarray(x) + np.asarray(u))

    def L_closed(x, u, v):
        return 0.5 * v * v - lam * u + 0.0 * np.asarray(x)

    return ContactModel(
        name="quad",
        H=H,
        dH_dx=dH_dx,
        dH_du=dH_du,
        dH_dp=dH_dp,
        Lambda=lam,
        lambda_lower=lam,
        p_box=p_box,
        L_closed=L_closed,
        discount=lam,
    )


def mechanical_model(lam: float = 1.0, amplitude: float = 1.0, p_box: float = 8.0) -> ContactModel:
    """H = lam*u + p^2/2 + amplitude*cos(2*pi*x)."""
    if lam <= 0:
        raise ValueError("mechanical model needs lam > 0")
    A = float(amplitude)
    two_pi = 2.0 * np.pi

    def H(x, u, p):
        return lam * u + 0.5 * p * p + A * np.cos(two_pi * x)

    def dH_dx(x, u, p):
        return -A * two_pi * np.sin(two_pi * x) + 0.0 * (np.asarray(u) + np.asarray(p))

    def dH_du(x, u, p):
        return lam + 0.0 * (np.asarray(x) + np.asarray(u) + np.asarray(p))

    def dH_dp(x, u, p):
        return np.asarray(p) + 0.0 * (np.asarray(x) + np.asarray(u))

    def L_closed(x, u, v):
        return 0.5 * v * v - lam * u - A * np.cos(two_pi * x)

    return ContactModel(
        name="mechanical",
        H=H,
        dH_dx=dH_dx,
        dH_du=dH_du,
        dH_dp=dH_dp,
        Lambda=lam,
        lambda_lower=lam,
        p_box=p_box,
        L_closed=L_closed,
        discount=lam,
    )


# dH/du of the counterexample is (3/2) u^2 rho'(u^3); rho' <= 1 and the
# factor u^2 is largest where rho' is still close to 1, numerically the
# supremum is about 1.66 (attained near u = -1.06), declared bound 1.75
COUNTEREXAMPLE_LAMBDA_BOUND = 1.75


def counterexample_model(p_box: float = 8.0) -> ContactModel:
    """H = (p^2 + rho(u^3))/2; dH/du vanishes at u = 0, breaking (H3)."""

    def H(x, u, p):
        return 0.5 * (p * p + rho_smooth(np.asarray(u) ** 3)) + 0.0 * np.asarray(x)

    def dH_dx(x, u, p):
        return 0.0 * (np.asarray(x) + np.asarray(u) + np.asarray(p))

    def dH_du(x, u, p):
        u = np.asarray(u, dtype=float)
        return 1.5 * u * u * rho_smooth_deriv(u**3) + 0.0 * (np.asarray(x) + np.asarray(p))

    def dH_dp(x, u, p):
        return np.asarray(p) + 0.0 * (np.asarray(x) + np.asarray(u))

    def L_closed(x, u, v):
        return 0.5 * v * v - 0.5 * rho_smooth(np.asarray(u) ** 3) + 0.0 * np.asarray(x)

    return ContactModel(
        name="counterexample",
        H=H,
        dH_dx=dH_dx,
        dH_du=dH_du,
        dH_dp=dH_dp,
        Lambda=COUNTEREXAMPLE_LAMBDA_BOUND,
        lambda_lower=0.0,
        p_box=p_box,
        L_closed=L_closed,
        discount=None,
    )


def frozen_model(base: ContactModel, a: float = 0.0) -> ContactModel:
    """Classical Hamiltonian h(x, p) = H(x, a, p) with the contact slot frozen."""

    def H(x, u, p):
        return base.H(x, a + 0.0 * np.asarray(u), p)

    def dH_dx(x, u, p):
        return base.dH_dx(x, a + 0.0 * np.asarray(u), p)

    def dH_du(x, u, p):
        return 0.0 * (np.asarray(x) + np.asarray(u) + np.asarray(p))

    def dH_dp(x, u, p):
        return base.dH_dp(x, a + 0.0 * np.asarray(u), p)

    L_closed = None
    if base.L_closed is not None:
        base_L = base.L_closed

        def L_closed(x, u, v):
            return base_L(x, a + 0.0 * np.asarray(u), v)

    return ContactModel(
        name="frozen(%s, a=%g)" % (base.name, a),
        H=H,
        dH_dx=dH_dx,
        dH_du=dH_du,
        dH_dp=dH_dp,
        Lambda=base.Lambda,
        lambda_lower=0.0,
        p_box=base.p_box,
        L_closed=L_closed,
        discount=None,
    )


def concave_model() -> ContactModel:
    """Negative control: H = u - p^2 is concave in p, so (H1) must fail."""

    def H(x, u, p):
        return np.asarray(u) - np.asarray(p) ** 2 + 0.0 * np.asarray(x)

    def dH_dx(x, u, p):
        return 0.0 * (np.asarray(x) + np.asarray(u) + np.asarray(p))

    def dH_du(x, u, p):
        return 1.0 + 0.0 * (np.asarray(x) + np.asarray(u) + np.asarray(p))

    def dH_dp(x, u, p):
        return -2.0 * np.asarray(p) + 0.0 * (np.asarray(x) + np.asarray(u))

    return ContactModel(
        name="concave",
        H=H,
        dH_dx=dH_dx,
        dH_du=dH_du,
        dH_dp=dH_dp,
        Lambda=1.0,
        lambda_lower=1.0,
        p_box=8.0,
        discount=None,
    )


MODEL_NAMES = ("quad", "mechanical", "counterexample", "frozen", "concave")


def make_model(name: str, params: Optional[dict] = None) -> ContactModel:
    """Build a model by registry name with a parameter table (for configs)."""
    params = dict(params or {})
    try:
        if name == "quad":
            return quad_model(
                lam=float(params.pop("lambda", 1.0)),
                p_box=float(params.pop("p_box", 8.0)),
            )
        if name == "mechanical":
            return mechanical_model(
                lam=float(params.pop("lambda", 1.0)),
                amplitude=float(params.pop("amplitude", 1.0)),
                p_box=float(params.pop("p_box", 8.0)),
            )
        if name == "counterexample":
            return counterexample_model(p_box=float(params.pop("p_box", 8.0)))
        if name == "frozen":
            base_name = params.pop("base", "mechanical")
            a = float(params.pop("a", 0.0))
            base = make_model(base_name, params)
            return frozen_model(base, a=a)
        if name == "concave":
            return concave_model()
    except (TypeError, ValueError) as exc:
        raise ConfigError("bad parameters for model %r: %s" % (name, exc)) from exc
    raise ConfigError("unknown model %r (known: %s)" % (name, ", ".join(MODEL_NAMES)))
