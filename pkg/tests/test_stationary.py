import numpy as np
import pytest

from contact_hj_lab.errors import BracketInvalid, NotConverged, NotDiscountedForm
from contact_hj_lab.evolve import LF, SL, EvolveConfig, run_batch
from contact_hj_lab.fields import GridFn, TorusGrid, sup_dist
from contact_hj_lab.models import (
    ContactModel,
    counterexample_model,
    mechanical_model,
    quad_model,
)
from contact_hj_lab.stationary import (
    CriticalValueResult,
    admissible_shift,
    critical_value,
    discounted_gap,
    discounted_value_iteration,
    solve_discounted,
    solve_longtime,
    stationary_residual,
)


def shifted_quad(K):
    # H = u + p^2/2 - K has the constant stationary solution u = K
    return ContactModel(
        name="quad-shifted",
        H=lambda x, u, p: u + 0.5 * p * p - K,
        dH_dx=lambda x, u, p: 0.0 * (x + u + p),
        dH_du=lambda x, u, p: 1.0 + 0.0 * (x + u + p),
        dH_dp=lambda x, u, p: p + 0.0 * (x + u),
        Lambda=1.0,
        lambda_lower=1.0,
        p_box=8.0,
        L_closed=lambda x, u, v: 0.5 * v * v - u + K,
        discount=1.0,
    )


def test_longtime_quad_zero():
    model = quad_model()
    grid = TorusGrid(128)
    phi = GridFn.from_callable(grid, lambda x: np.sin(2 * np.pi * x))
    res = solve_longtime(model, phi, EvolveConfig(scheme=SL, dt=grid.h), tol=1e-5)
    assert res.method == "longtime"
    assert res.residual < 1e-5
    assert np.max(np.abs(res.u_minus.values)) <= max(1e-5, 5 * grid.h ** 2)


def test_longtime_constant_shift():
    model = shifted_quad(0.8)
    grid = TorusGrid(64)
    phi = GridFn.constant(grid, 0.0)
    res = solve_longtime(model, phi, EvolveConfig(scheme=LF, dt=1e-2), tol=1e-6)
    assert np.max(np.abs(res.u_minus.values - 0.8)) < 1e-5


def test_longtime_stationarity_invariant():
    model = mechanical_model(amplitude=0.3)
    grid = TorusGrid(128)
    phi = GridFn.constant(grid, 0.0)
    cfg = EvolveConfig(scheme=SL, dt=grid.h)
    tol = 1e-5
    res = solve_longtime(model, phi, cfg, tol=tol)
    one_more = run_batch(model, res.u_minus.values, grid.nodes, grid.h, cfg,
                         int(round(1.0 / cfg.dt)))
    assert float(np.max(np.abs(one_more - res.u_minus.values))) <= 2 * tol


def test_longtime_not_converged():
    model = mechanical_model(amplitude=0.3)
    grid = TorusGrid(64)
    phi = GridFn.constant(grid, 0.0)
    with pytest.raises(NotConverged):
        solve_longtime(model, phi, EvolveConfig(scheme=SL, dt=grid.h),
                       tol=1e-13, t_max=2.0)


def test_longtime_uniqueness():
    model = mechanical_model(amplitude=0.3)
    grid = TorusGrid(64)
    rng = np.random.default_rng(21)
    cfg = EvolveConfig(scheme=SL, dt=grid.h)
    tol = 1e-4
    outs = []
    for _ in range(5):
        vals = rng.normal(0, 0.4) + rng.normal(0, 0.3) * np.sin(
            2 * np.pi * grid.nodes + rng.uniform(0, 1))
        outs.append(solve_longtime(model, GridFn(grid, vals), cfg, tol=tol).u_minus)
    for a in range(5):
        for b in range(a + 1, 5):
            assert sup_dist(outs[a], outs[b]) <= 10 * max(tol, grid.h)


def test_discounted_quad_exact():
    model = quad_model()
    res = solve_discounted(model, tol=1e-6, n=64)
    assert res.method == "discounted"
    assert res.iterations >= 1
    assert res.residual <= 1e-6
    assert np.max(np.abs(res.u_minus.values)) <= 1e-6 + 5 * res.u_minus.grid.h ** 2


def test_discounted_requires_declared_form():
    with pytest.raises(NotDiscountedForm):
        solve_discounted(counterexample_model(), tol=1e-4)


def test_discounted_pde_residual():
    model = mechanical_model(amplitude=0.3)
    n = 256
    res = solve_discounted(model, tol=1e-6, n=n)
    assert stationary_residual(model, res.u_minus) <= 10.0 / n


def test_cross_method_agreement():
    model = mechanical_model(amplitude=0.3)
    n = 256
    grid = TorusGrid(n)
    phi = GridFn.from_callable(grid, lambda x: np.sin(2 * np.pi * x))
    lt = solve_longtime(model, phi, EvolveConfig(scheme=SL, dt=grid.h), tol=1e-5)
    dc = solve_discounted(model, tol=1e-6, n=n)
    assert sup_dist(lt.u_minus, dc.u_minus) <= 5 * grid.h


def test_discounted_contraction_factor():
    model = mechanical_model(amplitude=0.3)
    grid = TorusGrid(128)
    dt = 0.05
    _, defects = discounted_value_iteration(model, 1.0, grid, dt, 1e-6, 4.0, 129)
    q = np.exp(-dt)
    for a, b in zip(defects[1:-1], defects[2:]):
        if a > 1e-13:
            assert b <= q * a + 1e-6


def test_critical_value_quad():
    cv = critical_value(quad_model(), 0.0, n=128)
    assert abs(cv.extrapolated) < 0.02
    assert cv.to_csv is not None
    lams = [l for l, _ in cv.ladder]
    assert lams == sorted(lams, reverse=True)


def test_critical_value_shift_property():
    c0 = critical_value(quad_model(), 0.0, n=128).extrapolated
    c7 = critical_value(quad_model(), 0.7, n=128).extrapolated
    assert abs((c7 - c0) - 0.7) < 0.02


def test_critical_value_mechanical():
    cv = critical_value(mechanical_model(amplitude=1.0), 0.0)
    assert abs(cv.extrapolated - 1.0) < 0.05


def test_critical_value_bad_ladder():
    with pytest.raises(ValueError):
        critical_value(quad_model(), 0.0, ladder=(0.1, 0.2))
    with pytest.raises(ValueError):
        critical_value(quad_model(), 0.0, ladder=())


def test_critical_result_csv(tmp_path):
    cv = critical_value(quad_model(), 0.3, ladder=(0.4, 0.2), n=64)
    path = tmp_path / "ladder.csv"
    cv.to_csv(path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "lambda,estimate"
    assert len(lines) == 3


def test_admissible_shift_quad():
    # c(h^a) = a for the quad model, so the shift is 0
    a_star = admissible_shift(quad_model(), (-0.5, 0.7), tol=0.02, n=64)
    assert abs(a_star) <= 0.05


def test_admissible_shift_monotone_samples():
    cs = [critical_value(quad_model(), a, ladder=(0.4, 0.2), n=64).extrapolated
          for a in np.linspace(-0.5, 0.7, 10)]
    assert all(b >= a - 1e-9 for a, b in zip(cs, cs[1:]))


def test_admissible_shift_bad_bracket():
    with pytest.raises(BracketInvalid):
        admissible_shift(quad_model(), (0.5, 0.9), tol=0.02, n=64)


def test_discounted_gap_quad():
    model = quad_model()
    grid = TorusGrid(64)
    phi = GridFn.constant(grid, 1.0)
    u_minus = GridFn.constant(grid, 0.0)
    cfg = EvolveConfig(scheme=LF, dt=1e-3)
    out = discounted_gap(model, phi, u_minus, (0.0, 1.0, 2.0), cfg)
    assert out.shape == (3, 2)
    for t, g in out:
        assert abs(g - np.exp(-t)) < 1e-3
    # decay bound with scheme-error allowance
    g0 = out[0, 1]
    for t, g in out[1:]:
        assert g <= g0 * np.exp(-0.9 * t) + 10 * grid.h


def test_discounted_gap_stationary_input():
    model = mechanical_model(amplitude=0.3)
    tol = 1e-6
    res = solve_discounted(model, tol=tol, n=128)
    cfg = EvolveConfig(scheme=SL, dt=1.0 / 128)
    out = discounted_gap(model, res.u_minus, res.u_minus, (0.0, 1.0), cfg)
    # the discrete fixed points of the two operators differ by scheme error
    assert out[1, 1] <= 10.0 / 128


def test_discounted_gap_requires_form():
    grid = TorusGrid(32)
    phi = GridFn.constant(grid, 0.0)
    with pytest.raises(NotDiscountedForm):
        discounted_gap(counterexample_model(), phi, phi, (1.0,),
                       EvolveConfig(scheme=LF, dt=1e-3))
