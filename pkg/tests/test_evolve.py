import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from morphsolve.errors import PositivityError
from morphsolve.evolve import State, bounds, check_estimates, imex_step, simulate
from morphsolve.grid import build_grid, l1_norm
from morphsolve.model import FIGURE1, reaction_rhs
from morphsolve.verify import temporal_order


def test_first_step_from_zero_closed_form():
    g = build_grid(16)
    dt = 1e-2
    s = imex_step(State.zeros(g), dt, FIGURE1, g)
    assert np.allclose(s.u[2], dt * FIGURE1.p3 / (1 + dt * FIGURE1.b[2]), rtol=1e-15)
    assert np.all(s.u[3:] == 0)
    assert s.t == dt
    # only the source node feeds u1 through a diffusion solve: mass dt*p1/(1 + dt*(b1 + c1))
    assert l1_norm(s.u[0], g) == pytest.approx(dt * FIGURE1.p1 / (1 + dt * 110), rel=1e-12)


@pytest.mark.parametrize("dt", [1e-3, 1.0, 1e3])
def test_positivity_any_dt(dt, rng):
    g = build_grid(64)
    for _ in range(20):
        u = rng.exponential(3.0, (5, 65)) * rng.integers(0, 2, (5, 65))
        assert np.min(imex_step(State(0.0, u), dt, FIGURE1, g).u) >= 0


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-6, 1e4), st.integers(0, 2**32 - 1))
def test_positivity_property(dt, seed):
    r = np.random.default_rng(seed)
    g = build_grid(32)
    u = r.exponential(5.0, (5, 33)) * r.integers(0, 2, (5, 33))
    assert np.min(imex_step(State(0.0, u), dt, FIGURE1, g).u) >= 0


def test_rejects_bad_dt():
    g = build_grid(8)
    with pytest.raises(ValueError):
        imex_step(State.zeros(g), 0.0, FIGURE1, g)


def test_positivity_error_on_negative_input():
    g = build_grid(8)
    u = np.zeros((5, 9))
    u[3, 4] = -1.0
    with pytest.raises(PositivityError, match="u4 at node 4"):
        imex_step(State(0.0, u), 1e-3, FIGURE1.replace(p1=0, p3=0), g)


def test_pure_decay_monotone():
    P = FIGURE1.replace(p1=0.0, p3=0.0)
    g = build_grid(32)
    s0 = State.constant(g, [1, 2, 3, 4, 5])
    traj = simulate(s0, 1.0, 1e-2, P, g)
    total = [sum(l1_norm(s.u[i], g) for i in range(5)) for s in traj.snapshots]
    assert np.all(np.diff(total) < 0)
    assert traj.final.u.max() < 1.0


def _ode_rhs(P):
    return lambda t, y: reaction_rhs(y, P)


def test_homogeneous_state_matches_ode():
    P = FIGURE1.replace(p1=0.0)
    g = build_grid(16)
    y0 = np.array([1.0, 0.5, 2.0, 0.3, 0.1])
    ref = solve_ivp(_ode_rhs(P), (0, 0.5), y0, method="Radau", rtol=1e-12, atol=1e-14).y[:, -1]
    errs = []
    for dt in (2e-4, 1e-4):
        u = simulate(State.constant(g, y0), 0.5, dt, P, g, stride=10**9).final.u
        # diffusion leaves constants untouched
        assert np.max(np.ptp(u, axis=1)) <= 1e-12
        errs.append(np.max(np.abs(u[:, 0] - ref)))
    assert errs[1] <= 1e-2 * np.max(ref)
    assert 1.7 <= errs[0] / errs[1] <= 2.3


def test_simulate_lands_on_t_end():
    g = build_grid(8)
    traj = simulate(State.zeros(g), 0.25, 0.1, FIGURE1, g, stride=2)
    assert traj.steps == 3
    assert traj.dt == pytest.approx(0.25 / 3)
    assert traj.final.t == 0.25
    assert list(traj.times) == pytest.approx([0.0, 2 * 0.25 / 3, 0.25])


@pytest.mark.parametrize("kw", [dict(t_end=0.0), dict(dt=-1.0), dict(stride=0), dict(stride=1.5)])
def test_simulate_validation(kw):
    g = build_grid(8)
    args = dict(t_end=1.0, dt=0.1, stride=1)
    args.update(kw)
    with pytest.raises(ValueError):
        simulate(State.zeros(g), args["t_end"], args["dt"], FIGURE1, g, stride=args["stride"])


def test_simulate_rejects_negative_initial_state():
    g = build_grid(8)
    with pytest.raises(ValueError):
        simulate(State.constant(g, [-1, 0, 0, 0, 0]), 1.0, 0.1, FIGURE1, g)


def test_bounds_formula():
    g = build_grid(8)
    b6a, b6b = bounds(0.1, FIGURE1, State.zeros(g), g)
    assert b6a == pytest.approx(10 * (1 - np.exp(-1)))
    assert b6b == pytest.approx(10 * (1 - np.exp(-1)))
    s0 = State.constant(g, [1, 1, 1, 1, 1])
    assert bounds(0.0, FIGURE1, s0, g) == pytest.approx((3.0, 8.0))


def test_estimates_hold_from_zero():
    g = build_grid(128)
    s0 = State.zeros(g)
    traj = simulate(s0, 2.0, 1e-3, FIGURE1, g, stride=50)
    assert traj.min_value >= 0
    rep = check_estimates(traj, FIGURE1, s0, g)
    assert rep.passed
    assert rep.rows[0].margin6a == 0 and rep.rows[0].margin6b == 0


def test_estimates_hold_from_moderate_data(rng):
    g = build_grid(64)
    s0 = State(0.0, rng.uniform(0, 2, (5, 65)))
    traj = simulate(s0, 1.0, 1e-3, FIGURE1, g, stride=10)
    assert check_estimates(traj, FIGURE1, s0, g).passed


def test_estimate_defect_is_first_order_for_large_data(rng):
    # explicit exchange gains break the exact cancellation by O(dt * rate * data);
    # far from equilibrium that exceeds the 2*dt*bound slack but still halves with dt
    g = build_grid(64)
    s0 = State(0.0, rng.uniform(0, 40, (5, 65)))
    worst = []
    for dt in (1e-3, 5e-4):
        traj = simulate(s0, 1.0, dt, FIGURE1, g, stride=int(round(0.01 / dt)))
        worst.append(min(check_estimates(traj, FIGURE1, s0, g).worst_margins))
    assert worst[0] < 0
    assert 1.7 <= worst[0] / worst[1] <= 2.3


def test_steady_state_is_fixed_point(fig1_split_512):
    g = fig1_split_512.grid
    s0 = State(0.0, np.array(fig1_split_512.u))
    traj = simulate(s0, 1.0, 1e-3, FIGURE1, g, stride=10**9, ref=fig1_split_512)
    assert traj.diagnostics[-1].dist_to_steady <= 10 * (fig1_split_512.residual + 1e-3)


def test_temporal_order_first():
    ratio, errs = temporal_order(FIGURE1, n=64)
    assert errs[0] > 1e-10
    assert 1.7 <= ratio <= 2.3
