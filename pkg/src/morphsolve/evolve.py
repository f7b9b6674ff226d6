"""Positivity-preserving time stepping of the full five-species system.

Each species treats its own loss implicitly (coefficient frozen at the old
level) and all gains explicitly. The two diffusing species need one
tridiagonal M-matrix solve each; the other three are pointwise divisions,
so nonnegative data stay nonnegative for every dt > 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import PositivityError
from .grid import Grid, discrete_delta, l1_norm
from .model import Params

NEG_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class State:
    t: float
    u: np.ndarray  # shape (5, n+1)

    @classmethod
    def zeros(cls, g: Grid, t: float = 0.0) -> "State":
        return cls(t=t, u=np.zeros((5, g.n + 1)))

    @classmethod
    def constant(cls, g: Grid, values, t: float = 0.0) -> "State":
        vals = np.asarray(values, dtype=float).reshape(5, 1)
        return cls(t=t, u=np.repeat(vals, g.n + 1, axis=1))


@dataclass(frozen=True)
class Diagnostics:
    t: float
    sup3to5: float
    l1: tuple[float, float, float, float]  # species 1, 2, 4, 5
    bound6a: float
    bound6b: float
    dist_to_steady: float | None = None


@dataclass(eq=False)
class Trajectory:
    snapshots: list[State] = field(default_factory=list)
    diagnostics: list[Diagnostics] = field(default_factory=list)
    dt: float = 0.0
    steps: int = 0
    min_value: float = 0.0

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    @property
    def final(self) -> State:
        return self.snapshots[-1]


def _diffusion_bands(g: Grid, diff: float, dt: float, loss: np.ndarray) -> np.ndarray:
    """Banded form of 1 + dt*loss - dt*diff*L_h for scipy's solve_banded."""
    m = g.n + 1
    r = dt * diff / g.h**2
    ab = np.zeros((3, m))
    ab[1] = 1.0 + dt * loss + 2.0 * r
    ab[0, 1:] = -r
    ab[2, :-1] = -r
    # mirrored ghost nodes double the wall couplings
    ab[0, 1] = -2.0 * r
    ab[2, -2] = -2.0 * r
    return ab


def imex_step(s: State, dt: float, P: Params, g: Grid, source: np.ndarray | None = None) -> State:
    """Advance one step of size ``dt``; raises if any value drops below -1e-12."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if source is None:
        source = discrete_delta(g)
    u1, u2, u3, u4, u5 = s.u
    b1, b2, b3, b4, b5 = P.b
    c1, c2, c3, c4, c5 = P.c

    rhs1 = u1 + dt * (c2 * u2 + c4 * u4 + P.p1 * source)
    n1 = solve_banded((1, 1), _diffusion_bands(g, 1.0, dt, b1 + c1 + u3), rhs1)
    rhs2 = u2 + dt * (c1 * u1 + c5 * u5)
    n2 = solve_banded((1, 1), _diffusion_bands(g, P.d, dt, b2 + c2 + c3 * u3), rhs2)
    n3 = (u3 + dt * (c4 * u4 + c5 * u5 + P.p3)) / (1.0 + dt * (b3 + u1 + c3 * u2))
    n4 = (u4 + dt * u1 * u3) / (1.0 + dt * (b4 + c4))
    n5 = (u5 + dt * c3 * u2 * u3) / (1.0 + dt * (b5 + c5))

    new = np.vstack([n1, n2, n3, n4, n5])
    low = float(np.min(new))
    if low < -NEG_TOL or not np.all(np.isfinite(new)):
        i, j = np.unravel_index(int(np.argmin(new)), new.shape)
        raise PositivityError(f"u{i + 1} at node {j} is {low:.3e} after step to t={s.t + dt:g}")
    return State(t=s.t + dt, u=new)


def bounds(t: float, P: Params, u0: State, g: Grid) -> tuple[float, float]:
    """Right-hand sides of the pointwise (u3+u4+u5) and L1 (u1,u2,u4,u5) decay bounds."""
    bmin = P.b_min
    decay = np.exp(-bmin * t)
    sup0 = float(np.max(u0.u[2] + u0.u[3] + u0.u[4]))
    l10 = sum(float(l1_norm(u0.u[i], g)) for i in (0, 1, 3, 4))
    b6a = decay * sup0 + P.p3 * (1.0 - decay) / bmin
    b6b = decay * l10 + P.p1 * (1.0 - decay) / bmin
    return b6a, b6b


def diagnose(s: State, P: Params, g: Grid, u0: State, ref=None) -> Diagnostics:
    b6a, b6b = bounds(s.t - u0.t, P, u0, g)
    dist = None
    if ref is not None:
        dist = float(np.max(np.abs(s.u - ref.u)))
    return Diagnostics(
        t=s.t,
        sup3to5=float(np.max(s.u[2] + s.u[3] + s.u[4])),
        l1=tuple(float(l1_norm(s.u[i], g)) for i in (0, 1, 3, 4)),
        bound6a=b6a,
        bound6b=b6b,
        dist_to_steady=dist,
    )


def simulate(
    s0: State,
    t_end: float,
    dt: float,
    P: Params,
    g: Grid,
    stride: int = 1,
    ref=None,
) -> Trajectory:
    """Integrate from ``s0`` to ``t_end`` keeping every ``stride``-th state.

    The number of steps is ceil(t_end/dt) with the step shrunk so the last
    one lands on ``t_end``. ``ref`` is an optional steady solution for the
    distance column.
    """
    if not t_end > 0 or not dt > 0:
        raise ValueError("t_end and dt must be positive")
    if int(stride) != stride or stride < 1:
        raise ValueError(f"stride must be a positive integer, got {stride!r}")
    if np.min(s0.u) < 0:
        raise ValueError("initial state must be nonnegative")
    nsteps = int(np.ceil(t_end / dt - 1e-12))
    dt = t_end / nsteps
    src = discrete_delta(g)
    t0 = s0.t
    traj = Trajectory(dt=dt, steps=nsteps, min_value=float(np.min(s0.u)))
    traj.snapshots.append(s0)
    traj.diagnostics.append(diagnose(s0, P, g, s0, ref))
    s = s0
    for k in range(1, nsteps + 1):
        s = imex_step(s, dt, P, g, src)
        # step by index so that the final time is exact
        s = State(t=t0 + k * dt, u=s.u)
        traj.min_value = min(traj.min_value, float(np.min(s.u)))
        if k % stride == 0 or k == nsteps:
            traj.snapshots.append(s)
            traj.diagnostics.append(diagnose(s, P, g, s0, ref))
    return traj


@dataclass(frozen=True)
class EstimateRow:
    t: float
    margin6a: float
    margin6b: float
    slack6a: float
    slack6b: float

    @property
    def ok6a(self) -> bool:
        return self.margin6a >= -self.slack6a

    @property
    def ok6b(self) -> bool:
        return self.margin6b >= -self.slack6b


@dataclass(frozen=True)
class EstimateReport:
    rows: list[EstimateRow]

    @property
    def passed(self) -> bool:
        return all(r.ok6a and r.ok6b for r in self.rows)

    @property
    def worst_margins(self) -> tuple[float, float]:
        return min(r.margin6a for r in self.rows), min(r.margin6b for r in self.rows)


def check_estimates(traj: Trajectory, P: Params, u0: State, g: Grid) -> EstimateReport:
    """Compare every snapshot with both decay bounds.

    Margin is bound - observed. A row passes when margin >= -slack with
    slack = 1e-8 + 2*dt*bound, which absorbs the first-order time error.
    """
    rows = []
    for s in traj.snapshots:
        d = diagnose(s, P, g, u0)
        rows.append(
            EstimateRow(
                t=s.t,
                margin6a=d.bound6a - d.sup3to5,
                margin6b=d.bound6b - sum(d.l1),
                slack6a=1e-8 + 2.0 * traj.dt * d.bound6a,
                slack6b=1e-8 + 2.0 * traj.dt * d.bound6b,
            )
        )
    return EstimateReport(rows=rows)
