"""Steady state by Picard iteration on the reduced (u1, u2) boundary value problem.

Two discretisations of the point source are offered:

``discrete-delta``
    p1 * delta is replaced by a single-node spike of mass p1.
``singular-split``
    u1 = v + E with E = -p1 |x| / 2; the iteration runs on the kink-free
    field v, the E-dependent terms go to the right-hand side and the
    wall fluxes v'(+-1) = +-p1/2 enter through the ghost-node closure.

Both modes close u3, u4, u5 algebraically from the converged (u1, u2).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import elliptic
from .errors import ConsistencyError, ConvergenceError
from .grid import Grid, discrete_delta, laplacian_apply, l1_norm
from .model import Params, h_eval, local_derivatives, steady_algebra

log = logging.getLogger(__name__)

MODES = ("discrete-delta", "singular-split")
RESIDUAL_TOL = 1e-8
CLAMP_TOL = 1e-10


@dataclass(frozen=True)
class SteadyOptions:
    tol: float = 1e-10
    max_iter: int = 10_000
    damping: float = 1.0
    # initial (u1, u2); scalars or nodal arrays. None means zero.
    initial: tuple | None = None

    def __post_init__(self) -> None:
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol!r}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"max_iter must be a positive integer, got {self.max_iter!r}")
        if not 0 < self.damping <= 1:
            raise ValueError(f"damping must lie in (0, 1], got {self.damping!r}")


@dataclass(frozen=True, eq=False)
class SteadySolution:
    u: np.ndarray  # shape (5, n+1)
    mode: str
    iterations: int
    final_update: float
    residual: float
    grid: Grid
    params: Params
    tol: float
    history: list[float] = field(default_factory=list, repr=False)

    @property
    def converged(self) -> bool:
        return self.final_update <= self.tol * (float(np.max(np.abs(self.u[:2]))) + 1.0)

    def split_field(self) -> np.ndarray:
        """v = u1 + p1 |x| / 2, the regular part of u1."""
        return self.u[0] + self.params.p1 * np.abs(self.grid.nodes) / 2.0


def _coefficients(v1, v2, P: Params):
    lam = P.b_min
    H = h_eval(np.maximum(v1, 0.0), np.maximum(v2, 0.0), P)
    b1, b2 = P.b[0], P.b[1]
    c1, c2 = P.c[0], P.c[1]
    a11 = (b1 - lam) + c1 + P.k1 * H
    a22 = (b2 - lam) + c2 + P.k2 * H
    return lam, a11, c2, c1, a22


def _system(v1, v2, P: Params, g: Grid) -> elliptic.BlockSystem:
    lam, a11, a12, a21, a22 = _coefficients(v1, v2, P)
    return elliptic.assemble(g, 1.0, P.d, lam, a11, a12, a21, a22)


def picard_step(v1, v2, P: Params, g: Grid, source=None) -> tuple[np.ndarray, np.ndarray]:
    """One application of the frozen-coefficient map (v1, v2) -> (u1, u2).

    ``source`` is the nodal approximation of the unit point mass; the
    single-node spike is used when omitted.
    """
    if source is None:
        source = discrete_delta(g)
    sys = _system(v1, v2, P, g)
    return elliptic.solve(sys, P.p1 * np.asarray(source, dtype=float), np.zeros(g.n + 1))


def singular_part(P: Params, g: Grid) -> np.ndarray:
    return -P.p1 * np.abs(g.nodes) / 2.0


def _wall_flux_term(P: Params, g: Grid) -> np.ndarray:
    # ghost closure for v'(-1) = -p1/2, v'(1) = p1/2 contributes 2*|flux|/h at the walls
    out = np.zeros(g.n + 1)
    out[0] = out[-1] = 2.0 * (P.p1 / 2.0) / g.h
    return out


def split_step(v, u2, P: Params, g: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Frozen-coefficient step on the regular part v of u1."""
    E = singular_part(P, g)
    u1 = v + E
    sys = _system(u1, u2, P, g)
    rhs1 = -(sys.lam + sys.a11) * E + _wall_flux_term(P, g)
    rhs2 = sys.a21 * E
    return elliptic.solve(sys, rhs1, rhs2)


def _initial(opts: SteadyOptions, g: Grid) -> tuple[np.ndarray, np.ndarray]:
    if opts.initial is None:
        return np.zeros(g.n + 1), np.zeros(g.n + 1)
    w1, w2 = opts.initial
    w1 = np.broadcast_to(np.asarray(w1, dtype=float), (g.n + 1,)).copy()
    w2 = np.broadcast_to(np.asarray(w2, dtype=float), (g.n + 1,)).copy()
    if np.any(w1 < 0) or np.any(w2 < 0):
        raise ValueError("initial guess must be nonnegative")
    return w1, w2


def steady_residual(u1, u2, P: Params, g: Grid) -> float:
    """Discrete L1 residual of the reduced problem with a single-node source."""
    H = h_eval(np.maximum(u1, 0.0), np.maximum(u2, 0.0), P)
    b1, b2 = P.b[0], P.b[1]
    c1, c2 = P.c[0], P.c[1]
    r1 = -laplacian_apply(u1, g) + (b1 + c1 + P.k1 * H) * u1 - c2 * u2 - P.p1 * discrete_delta(g)
    r2 = -P.d * laplacian_apply(u2, g) - c1 * u1 + (b2 + c2 + P.k2 * H) * u2
    return float(l1_norm(r1, g) + l1_norm(r2, g))


def split_residual(v, u2, P: Params, g: Grid) -> float:
    """Discrete L1 residual of the split problem for (v, u2)."""
    E = singular_part(P, g)
    u1 = v + E
    H = h_eval(np.maximum(u1, 0.0), np.maximum(u2, 0.0), P)
    b1, b2 = P.b[0], P.b[1]
    c1, c2 = P.c[0], P.c[1]
    r1 = -laplacian_apply(v, g) - _wall_flux_term(P, g) + (b1 + c1 + P.k1 * H) * u1 - c2 * u2
    r2 = -P.d * laplacian_apply(u2, g) - c1 * u1 + (b2 + c2 + P.k2 * H) * u2
    return float(l1_norm(r1, g) + l1_norm(r2, g))


def _iterate(step, x1, x2, opts: SteadyOptions, offset=0.0, accept=None):
    """Damped Picard loop.

    Stops when the undamped correction |T(x) - x|_inf is at most
    tol * (|(u1, u2)|_inf + 1), with u1 = x1 + offset, and returns T(x).
    ``accept(y1, y2)`` is an extra gate checked only once the correction
    test passes; while it fails the loop keeps iterating.
    """
    history: list[float] = []
    w = opts.damping
    for it in range(1, opts.max_iter + 1):
        y1, y2 = step(x1, x2)
        corr = float(max(np.max(np.abs(y1 - x1)), np.max(np.abs(y2 - x2))))
        history.append(corr)
        if not np.isfinite(corr):
            break
        size = float(max(np.max(np.abs(x1 + offset)), np.max(np.abs(x2))))
        if corr <= opts.tol * (size + 1.0) and (accept is None or accept(y1, y2)):
            return y1, y2, it, history
        if w == 1.0:
            x1, x2 = y1, y2
        else:
            x1 = (1.0 - w) * x1 + w * y1
            x2 = (1.0 - w) * x2 + w * y2
    raise ConvergenceError(
        f"Picard iteration did not converge in {len(history)} iterations "
        f"(last correction {history[-1]:.3e})",
        history,
    )


def _clamp(u: np.ndarray, label: str) -> np.ndarray:
    low = float(np.min(u))
    if low < -CLAMP_TOL:
        raise ConsistencyError(f"{label} has negative value {low:.3e} below -{CLAMP_TOL:g}")
    if low < 0:
        log.info("clamping %s: min %.3e set to 0", label, low)
        u = np.maximum(u, 0.0)
    return u


def residual_floor(w1, w2, P: Params, g: Grid) -> float:
    """Round-off level of evaluating the residual: eps * |4 d_k / h^2 * w_k|_1."""
    eps = np.finfo(float).eps
    scale = 4.0 / g.h**2
    return float(eps * scale * (l1_norm(w1, g) + P.d * l1_norm(w2, g)))


def _finish(u1, u2, P, g, mode, it, history, residual, floor, opts) -> SteadySolution:
    gate = RESIDUAL_TOL + floor
    if not residual <= gate:
        raise ConsistencyError(f"steady residual {residual:.3e} exceeds {gate:.3e} after convergence")
    u1 = _clamp(u1, "u1")
    u2 = _clamp(u2, "u2")
    u3, u4, u5 = steady_algebra(u1, u2, P)
    u = np.vstack([u1, u2, u3, u4, u5])
    u.setflags(write=False)
    return SteadySolution(
        u=u,
        mode=mode,
        iterations=it,
        final_update=history[-1],
        residual=residual,
        grid=g,
        params=P,
        tol=opts.tol,
        history=history,
    )


def solve_steady(P: Params, g: Grid, opts: SteadyOptions | None = None) -> SteadySolution:
    """Steady state with the point source as a single-node spike."""
    opts = opts or SteadyOptions()
    src = discrete_delta(g)
    x1, x2 = _initial(opts, g)
    def ok(a, b):
        return steady_residual(a, b, P, g) <= RESIDUAL_TOL + residual_floor(a, b, P, g)

    u1, u2, it, history = _iterate(lambda a, b: picard_step(a, b, P, g, src), x1, x2, opts, accept=ok)
    residual = steady_residual(u1, u2, P, g)
    floor = residual_floor(u1, u2, P, g)
    return _finish(u1, u2, P, g, "discrete-delta", it, history, residual, floor, opts)


def solve_steady_split(P: Params, g: Grid, opts: SteadyOptions | None = None) -> SteadySolution:
    """Steady state via the regular part v = u1 + p1|x|/2."""
    opts = opts or SteadyOptions()
    E = singular_part(P, g)
    w1, w2 = _initial(opts, g)
    def ok(a, b):
        return split_residual(a, b, P, g) <= RESIDUAL_TOL + residual_floor(a, b, P, g)

    v, u2, it, history = _iterate(lambda a, b: split_step(a, b, P, g), w1 - E, w2, opts, offset=E, accept=ok)
    residual = split_residual(v, u2, P, g)
    floor = residual_floor(v, u2, P, g)
    return _finish(v + E, u2, P, g, "singular-split", it, history, residual, floor, opts)


def solve(P: Params, g: Grid, mode: str = "singular-split", opts: SteadyOptions | None = None) -> SteadySolution:
    if mode == "discrete-delta":
        return solve_steady(P, g, opts)
    if mode == "singular-split":
        return solve_steady_split(P, g, opts)
    raise ValueError(f"unknown steady mode {mode!r}; expected one of {MODES}")


def check_evenness(sol: SteadySolution) -> float:
    return float(np.max(np.abs(sol.u - sol.u[:, ::-1])))


@dataclass(frozen=True)
class SlopeCheck:
    numeric: np.ndarray
    formula: np.ndarray
    errors: np.ndarray


def one_sided_slopes(u: np.ndarray, g: Grid) -> np.ndarray:
    """Second-order forward differences at the origin node, per row of ``u``."""
    j = g.j0
    u = np.atleast_2d(u)
    return (-3.0 * u[:, j] + 4.0 * u[:, j + 1] - u[:, j + 2]) / (2.0 * g.h)


def check_local_derivatives(sol: SteadySolution) -> SlopeCheck:
    if not sol.converged:
        raise ValueError("slope check needs a converged steady solution")
    P = sol.params
    if not (P.p1 > 0 and P.p3 > 0):
        raise ValueError("slope check needs p1 > 0 and p3 > 0")
    j = sol.grid.j0
    numeric = one_sided_slopes(sol.u, sol.grid)
    formula = local_derivatives(sol.u[0, j], sol.u[1, j], P)
    return SlopeCheck(numeric=numeric, formula=formula, errors=np.abs(numeric - formula))


def mass_balance(sol: SteadySolution) -> tuple[float, float]:
    """(integral of b1 u1 + b2 u2 + b4 u4 + b5 u5, p1); equal at a steady state."""
    b = sol.params.b
    u = sol.u
    total = b[0] * u[0] + b[1] * u[1] + b[3] * u[3] + b[4] * u[4]
    return float(total @ sol.grid.weights), sol.params.p1
