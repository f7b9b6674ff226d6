"""Discrete property suite run by ``morphsolve verify``.

Every check returns a :class:`Check`; informational entries carry
``passed=None`` and never fail the suite.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from . import elliptic
from .errors import MorphsolveError
from .evolve import State, check_estimates, imex_step, simulate
from .grid import build_grid, discrete_delta, laplacian_apply, l1_norm, quadrature
from .model import Params, h_eval, reaction_rhs, steady_algebra
from .steady import (
    SteadyOptions,
    check_evenness,
    check_local_derivatives,
    mass_balance,
    solve as solve_steady_mode,
    solve_steady,
    solve_steady_split,
)

SIGNS = np.array([-1, 0, 1, -1, 1])


@dataclass(frozen=True)
class Check:
    group: str
    name: str
    passed: bool | None
    detail: str

    def line(self) -> str:
        tag = {True: "PASS", False: "FAIL", None: "INFO"}[self.passed]
        return f"[{tag}] {self.group}: {self.name} -- {self.detail}"


def random_block_system(rng: np.random.Generator, n: int) -> elliptic.BlockSystem:
    """Random coefficients obeying a11 >= a21, a22 >= a12, some at equality."""
    g = build_grid(n)
    m = n + 1
    a21 = rng.uniform(0, 50, m) * rng.integers(0, 2, m)
    a12 = rng.uniform(0, 50, m) * rng.integers(0, 2, m)
    a11 = a21 + rng.uniform(0, 50, m) * rng.integers(0, 2, m)
    a22 = a12 + rng.uniform(0, 50, m) * rng.integers(0, 2, m)
    d1, d2 = 10 ** rng.uniform(-2, 1, 2)
    lam = 10 ** rng.uniform(-2, 2)
    return elliptic.assemble(g, d1, d2, lam, a11, a12, a21, a22)


def resolvent_trial(rng: np.random.Generator, n: int) -> tuple[float, float]:
    """One randomized trial; returns (positivity slack, L1-bound slack), both >= 0 on success.

    Positivity slack is min(u) + 1e-12 * |f|_inf for nonnegative f.
    L1 slack is (1 + 1e-10) * |f|_1 / lam - |u|_1 for signed f.
    """
    sys = random_block_system(rng, n)
    g = sys.grid
    m = n + 1
    f1 = rng.uniform(0, 1, m) * rng.integers(0, 2, m)
    f2 = rng.uniform(0, 1, m) * rng.integers(0, 2, m)
    if rng.random() < 0.3:
        f1 = discrete_delta(g) * rng.uniform(0, 10)
    u1, u2 = elliptic.solve(sys, f1, f2)
    fmax = max(np.max(np.abs(f1)), np.max(np.abs(f2)))
    pos = min(np.min(u1), np.min(u2)) + 1e-12 * fmax
    s1 = rng.normal(size=m)
    s2 = rng.normal(size=m)
    v1, v2 = elliptic.solve(sys, s1, s2)
    bound = (l1_norm(s1, g) + l1_norm(s2, g)) / sys.lam
    l1 = (1 + 1e-10) * bound - (l1_norm(v1, g) + l1_norm(v2, g))
    return float(pos), float(l1)


def grid_checks(n: int, rng: np.random.Generator) -> Iterator[Check]:
    g = build_grid(n)
    yield Check("grid", "weights sum to 2", abs(g.weights.sum() - 2) <= 1e-14, f"sum={g.weights.sum():.17g}")
    delta = discrete_delta(g)
    phi = np.cos(3 * g.nodes) + g.nodes**2
    err = abs(quadrature(delta * phi, g) - phi[g.j0])
    yield Check("grid", "delta pairs to phi(0)", err <= 1e-12, f"|<delta,phi> - phi(0)|={err:.2e}")
    worst_cons = worst_sym = worst_neg = 0.0
    for _ in range(50):
        u = rng.normal(size=n + 1)
        v = rng.normal(size=n + 1)
        Lu, Lv = laplacian_apply(u, g), laplacian_apply(v, g)
        scale = l1_norm(Lu, g) + 1.0
        worst_cons = max(worst_cons, abs(quadrature(Lu, g)) / scale)
        worst_sym = max(worst_sym, abs(quadrature(Lu * v, g) - quadrature(u * Lv, g)) / (quadrature(np.abs(Lu * v), g) + 1))
        worst_neg = max(worst_neg, quadrature(u * Lu, g) / (quadrature(np.abs(u * Lu), g) + 1))
    yield Check("grid", "Laplacian conserves (flux-free walls)", worst_cons <= 1e-13, f"max rel={worst_cons:.2e}")
    yield Check("grid", "Laplacian symmetric under trapezoid weights", worst_sym <= 1e-13, f"max rel={worst_sym:.2e}")
    yield Check("grid", "Laplacian nonpositive", worst_neg <= 1e-13, f"max rel={worst_neg:.2e}")
    errs = []
    for m in (n, 2 * n):
        gm = build_grid(m)
        c = np.cos(np.pi * gm.nodes)
        errs.append(np.max(np.abs(laplacian_apply(c, gm) + np.pi**2 * c)))
    ratio = errs[0] / errs[1]
    yield Check("grid", "cos(pi x) eigenfunction, second order", 3.5 <= ratio <= 4.5, f"error ratio n/2n={ratio:.3f}")


def elliptic_checks(rng: np.random.Generator, trials: int = 1000) -> Iterator[Check]:
    worst_pos = worst_l1 = np.inf
    for _ in range(trials):
        n = 2 * int(rng.integers(2, 33))
        pos, l1 = resolvent_trial(rng, n)
        worst_pos = min(worst_pos, pos)
        worst_l1 = min(worst_l1, l1)
    yield Check("elliptic", f"positivity over {trials} random systems", worst_pos >= 0, f"worst slack={worst_pos:.2e}")
    yield Check("elliptic", f"L1 resolvent bound over {trials} random systems", worst_l1 >= 0, f"worst slack={worst_l1:.2e}")
    worst = 0.0
    for _ in range(50):
        n = 2 * int(rng.integers(2, 9))
        sys = random_block_system(rng, n)
        f1, f2 = rng.normal(size=(2, n + 1))
        u1, u2 = elliptic.solve(sys, f1, f2)
        dense = np.linalg.solve(elliptic.to_dense(sys), np.column_stack([f1, f2]).ravel())
        worst = max(worst, np.max(np.abs(np.column_stack([u1, u2]).ravel() - dense)) / np.max(np.abs(dense)))
    yield Check("elliptic", "block sweep matches dense solve (n<=16)", worst <= 1e-10, f"max rel diff={worst:.2e}")


def model_checks(P: Params, rng: np.random.Generator) -> Iterator[Check]:
    worst = 0.0
    for _ in range(2000):
        u = rng.exponential(5.0, 5)
        i = int(rng.integers(0, 5))
        u[i] = 0.0
        worst = min(worst, reaction_rhs(u, P)[i])
    yield Check("model", "reaction kinetics quasipositive", worst >= 0, f"min f_i at u_i=0: {worst:.2e}")
    x = rng.exponential(10.0, (2, 2000))
    H = h_eval(x[0], x[1], P)
    cap = P.p3 / P.b[2]
    ok = np.all(H <= cap * (1 + 1e-15)) and (P.p3 == 0 or np.all(H > 0))
    mono = np.all(h_eval(x[0] + 1, x[1], P) <= H) and np.all(h_eval(x[0], x[1] + 1, P) <= H)
    yield Check("model", "receptor closure bounded and decreasing", bool(ok and mono), f"max H={np.max(H):.6g}, cap={cap:.6g}")
    u3, u4, u5 = steady_algebra(x[0], x[1], P)
    r4 = np.max(np.abs(-(P.b[3] + P.c[3]) * u4 + x[0] * u3)) / (np.max(x[0] * u3) + 1)
    r5 = np.max(np.abs(-(P.b[4] + P.c[4]) * u5 + P.c[2] * x[1] * u3)) / (np.max(x[1] * u3) + 1)
    yield Check("model", "closed species are stationary", max(r4, r5) <= 1e-14, f"rel residual={max(r4, r5):.2e}")


def steady_checks(P: Params, n: int, opts: SteadyOptions) -> Iterator[Check]:
    g = build_grid(n)
    split = solve_steady_split(P, g, opts)
    delta = solve_steady(P, g, opts)
    sup = max(1.0, float(np.max(split.u)))
    for sol in (delta, split):
        yield Check(
            "steady",
            f"{sol.mode} converged",
            sol.converged,
            f"{sol.iterations} iterations, residual={sol.residual:.2e}",
        )
    diff = float(np.max(np.abs(split.u - delta.u)))
    yield Check("steady", "split and delta modes agree", diff <= 1e-8 * sup, f"sup diff={diff:.2e}")
    asym = check_evenness(split)
    yield Check("steady", "solution even", asym <= 1e-9 * sup, f"asymmetry={asym:.2e}")

    others = [
        SteadyOptions(opts.tol, opts.max_iter, 0.5),
        SteadyOptions(opts.tol, opts.max_iter, opts.damping, initial=(10 * P.p1, 10 * P.p1)),
        SteadyOptions(opts.tol, opts.max_iter, 0.5, initial=(10 * P.p1, 10 * P.p1)),
    ]
    dist = 0.0
    for o in others:
        dist = max(dist, float(np.max(np.abs(solve_steady_split(P, g, o).u - split.u))))
    yield Check("steady", "unique across initial guesses and dampings", dist <= 1e-8 * sup, f"sup distance={dist:.2e}")

    u1, u2, _, u4, u5 = split.u
    H = h_eval(u1, u2, P)
    clo = max(np.max(np.abs(P.b[3] * u4 - P.k1 * u1 * H)), np.max(np.abs(P.b[4] * u5 - P.k2 * u2 * H)))
    yield Check("steady", "closure identities", clo <= 1e-12 * sup, f"max={clo:.2e}")
    total, p1 = mass_balance(split)
    yield Check("steady", "stationary mass balance", abs(total - p1) <= 1e-8 * max(1.0, p1), f"integral={total:.12g}, p1={p1:g}")

    if P.p1 == 0:
        target = np.array([0, 0, P.p3 / P.b[2], 0, 0])[:, None]
        err = float(np.max(np.abs(split.u - target)))
        yield Check("steady", "zero source gives (0,0,p3/b3,0,0)", err <= 1e-12 and split.iterations <= 2, f"err={err:.2e}, iterations={split.iterations}")
        return

    fine = solve_steady_split(P, build_grid(2 * n), opts)
    d2v, d2u = [], []
    for sol in (split, fine):
        j, h = sol.grid.j0, sol.grid.h
        v = sol.split_field()
        d2v.append(abs(v[j - 1] - 2 * v[j] + v[j + 1]) / h**2)
        d2u.append(abs(sol.u[0, j - 1] - 2 * sol.u[0, j] + sol.u[0, j + 1]) / h**2)
    bounded = d2v[1] <= 1.1 * d2v[0] + 1.0 and d2u[1] >= 1.8 * d2u[0]
    yield Check(
        "steady",
        "regular part smooth across the source, u1 is not",
        bounded,
        f"|v''(0)| {d2v[0]:.4g} -> {d2v[1]:.4g}, |u1''(0)| {d2u[0]:.4g} -> {d2u[1]:.4g}",
    )

    if P.p3 > 0:
        chk = check_local_derivatives(split)
        rel, ok_sign = slope_agreement(chk, split)
        yield Check(
            "steady",
            "source slopes match closed forms within 5%",
            bool(np.all(rel <= 0.05)),
            "rel err=" + ", ".join(f"{r:.2e}" for r in rel),
        )
        yield Check("steady", "slope sign pattern (-,0,+,-,+)", ok_sign, "numeric=" + ", ".join(f"{s:.4g}" for s in chk.numeric))
        chk2 = check_local_derivatives(fine)
        shrink = chk.errors / np.maximum(chk2.errors, 1e-300)
        live = chk.errors > 1e-9 * np.maximum(np.abs(chk.formula), 1.0)
        yield Check(
            "steady",
            "slope errors shrink under refinement",
            bool(np.all(shrink[live] >= 1.8)),
            "ratios=" + ", ".join(f"{s:.2f}" for s in shrink),
        )


def slope_agreement(chk, sol) -> tuple[np.ndarray, bool]:
    """Relative slope errors; the u2 slope (exactly 0) is scaled by sup|u2|.

    Sign pattern: species 1, 3, 4, 5 must carry the expected strict sign,
    u2's slope must sit within the same 5% band around 0.
    """
    scale = np.abs(chk.formula)
    scale[1] = max(float(np.max(np.abs(sol.u[1]))), 1e-300)
    rel = chk.errors / np.where(scale > 0, scale, 1e-300)
    signs = np.sign(chk.numeric)
    ok = bool(np.all(signs[[0, 2, 3, 4]] == SIGNS[[0, 2, 3, 4]]) and rel[1] <= 0.05)
    return rel, ok


def temporal_order(P: Params, n: int = 128, dt: float = 2e-3, t_end: float = 1.0) -> tuple[float, list[float]]:
    g = build_grid(n)
    s0 = State.zeros(g)
    big = 10**9
    ref = simulate(s0, t_end, dt / 64, P, g, stride=big).final.u
    errs = [float(np.max(np.abs(simulate(s0, t_end, k, P, g, stride=big).final.u - ref))) for k in (dt, dt / 2)]
    return errs[0] / errs[1] if errs[1] > 0 else np.inf, errs


def evolve_checks(P: Params, n: int, dt: float, t_end: float, mode: str, opts: SteadyOptions, rng) -> Iterator[Check]:
    g = build_grid(n)
    worst = 0.0
    for step in (1e-3, 1.0, 1e3):
        for _ in range(20):
            s = State(t=0.0, u=rng.exponential(3.0, (5, n + 1)) * rng.integers(0, 2, (5, n + 1)))
            worst = min(worst, float(np.min(imex_step(s, step, P, g).u)))
    yield Check("evolve", "IMEX step positive for dt in {1e-3, 1, 1e3}", worst >= 0, f"min value={worst:.2e}")

    ref = solve_steady_mode(P, g, mode, opts)
    s0 = State.zeros(g)
    stride = max(1, int(round(0.1 / dt)))
    traj = simulate(s0, t_end, dt, P, g, stride=stride, ref=ref)
    yield Check("evolve", "nonnegative along trajectory", traj.min_value >= 0, f"min over all steps={traj.min_value:.2e}")
    rep = check_estimates(traj, P, s0, g)
    m6a, m6b = rep.worst_margins
    yield Check("evolve", "pointwise decay bound on u3+u4+u5", all(r.ok6a for r in rep.rows), f"worst margin={m6a:.3e}")
    yield Check("evolve", "L1 decay bound on u1,u2,u4,u5", all(r.ok6b for r in rep.rows), f"worst margin={m6b:.3e}")
    yield Check("evolve", f"distance to steady state at t={t_end:g} (observed only)", None, f"{traj.diagnostics[-1].dist_to_steady:.3e}")

    ratio, errs = temporal_order(P, n=min(n, 128))
    if errs[0] < 1e-13:
        yield Check("evolve", "first-order in time", None, f"errors at round-off ({errs[0]:.1e}); order not measurable")
    else:
        yield Check("evolve", "first-order in time", 1.7 <= ratio <= 2.3, f"error ratio dt/(dt/2)={ratio:.3f}")

    tr = simulate(State(t=0.0, u=np.array(ref.u)), 1.0, dt, P, g, stride=10**9, ref=ref)
    drift = tr.diagnostics[-1].dist_to_steady
    limit = 10 * (ref.residual + dt)
    yield Check("evolve", "steady state is a fixed point of the flow", drift <= limit, f"drift={drift:.2e}, limit={limit:.2e}")


def run_suite(P: Params, n: int, dt: float, t_end: float, mode: str, opts: SteadyOptions, seed: int = 0,
              progress: Callable[[Check], None] | None = None) -> list[Check]:
    rng = np.random.default_rng(seed)
    groups = [
        ("grid", lambda: grid_checks(n, rng)),
        ("model", lambda: model_checks(P, rng)),
        ("elliptic", lambda: elliptic_checks(rng)),
        ("steady", lambda: steady_checks(P, n, opts)),
        ("evolve", lambda: evolve_checks(P, n, dt, t_end, mode, opts, rng)),
    ]
    out: list[Check] = []
    for group, make in groups:
        t0 = time.perf_counter()
        try:
            for chk in make():
                out.append(chk)
                if progress:
                    progress(chk)
        except MorphsolveError as exc:
            chk = Check(group, "solver stage", False, f"{type(exc).__name__}: {exc}")
            out.append(chk)
            if progress:
                progress(chk)
        out.append(Check(group, "wall time", None, f"{time.perf_counter() - t0:.2f} s"))
    return out
