"""Two-component elliptic systems (lam - G) u = f with diagonally dominant coupling.

On a grid with Neumann second difference L_h the operator is

    G u = (d1 L_h u1 - a11 u1 + a12 u2,  d2 L_h u2 + a21 u1 - a22 u2)

with nonnegative nodal coefficients satisfying a11 >= a21 and a22 >= a12.
Then lam - G_h is an M-matrix, so the resolvent maps nonnegative data to
nonnegative solutions and contracts the trapezoid L1 norm by 1/lam.
"""

from __future__ import annotations

import math

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, DominanceError, SingularPivotError
from .grid import Grid, laplacian_apply, l1_norm

RESIDUAL_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class BlockSystem:
    grid: Grid
    d1: float
    d2: float
    lam: float
    a11: np.ndarray
    a12: np.ndarray
    a21: np.ndarray
    a22: np.ndarray


def _field(value, g: Grid, name: str) -> np.ndarray:
    arr = np.broadcast_to(np.asarray(value, dtype=float), (g.n + 1,)).copy()
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


def assemble(g: Grid, d1, d2, lam, a11, a12, a21, a22) -> BlockSystem:
    """Validate coefficients and return an immutable system handle.

    Dominance is checked with zero tolerance; the offending node is reported.
    """
    if not (d1 > 0 and d2 > 0):
        raise ValueError(f"diffusivities must be positive, got d1={d1!r}, d2={d2!r}")
    if not lam > 0:
        raise ValueError(f"shift lam must be positive, got {lam!r}")
    a = {k: _field(v, g, k) for k, v in dict(a11=a11, a12=a12, a21=a21, a22=a22).items()}
    for name, arr in a.items():
        bad = np.flatnonzero(arr < 0)
        if bad.size:
            j = int(bad[0])
            raise DominanceError(f"{name} is negative at node {j}: {arr[j]!r}", node=j)
    for big, small in (("a11", "a21"), ("a22", "a12")):
        bad = np.flatnonzero(a[big] - a[small] < 0)
        if bad.size:
            j = int(bad[0])
            raise DominanceError(
                f"{big} - {small} < 0 at node {j}: {a[big][j]!r} < {a[small][j]!r}", node=j
            )
    return BlockSystem(grid=g, d1=float(d1), d2=float(d2), lam=float(lam), **a)


def apply(sys: BlockSystem, u1, u2) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate (lam - G_h)(u1, u2)."""
    g = sys.grid
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    r1 = (sys.lam + sys.a11) * u1 - sys.a12 * u2 - sys.d1 * laplacian_apply(u1, g)
    r2 = (sys.lam + sys.a22) * u2 - sys.a21 * u1 - sys.d2 * laplacian_apply(u2, g)
    return r1, r2


def to_dense(sys: BlockSystem) -> np.ndarray:
    """Dense matrix of lam - G_h, unknowns interleaved as (u1_0, u2_0, u1_1, ...)."""
    g = sys.grid
    m = g.n + 1
    L = np.zeros((m, m))
    eye = np.eye(m)
    for j in range(m):
        L[:, j] = laplacian_apply(eye[:, j], g)
    A = np.zeros((2 * m, 2 * m))
    A[0::2, 0::2] = -sys.d1 * L + np.diag(sys.lam + sys.a11)
    A[1::2, 1::2] = -sys.d2 * L + np.diag(sys.lam + sys.a22)
    A[0::2, 1::2] = -np.diag(sys.a12)
    A[1::2, 0::2] = -np.diag(sys.a21)
    return A


def _block_thomas(sys: BlockSystem, f1: np.ndarray, f2: np.ndarray):
    g = sys.grid
    m = g.n + 1
    inv_h2 = 1.0 / g.h**2
    d1, d2, lam = sys.d1, sys.d2, sys.lam
    # off-diagonal blocks are diagonal: -d_k * w_j with w = 1/h^2, doubled at the walls
    lo = [inv_h2] * m
    up = [inv_h2] * m
    lo[0] = 0.0
    up[-1] = 0.0
    up[0] = 2.0 * inv_h2
    lo[-1] = 2.0 * inv_h2
    diag1 = (lam + sys.a11 + 2.0 * d1 * inv_h2).tolist()
    diag2 = (lam + sys.a22 + 2.0 * d2 * inv_h2).tolist()
    a12 = sys.a12.tolist()
    a21 = sys.a21.tolist()
    f1 = f1.tolist()
    f2 = f2.tolist()

    # forward sweep: C_j = S_j^{-1} U_j (full 2x2), y_j = S_j^{-1}(f_j - L_j y_{j-1})
    c11 = [0.0] * m
    c12 = [0.0] * m
    c21 = [0.0] * m
    c22 = [0.0] * m
    y1 = [0.0] * m
    y2 = [0.0] * m
    p11 = p12 = p21 = p22 = 0.0
    q1 = q2 = 0.0
    for j in range(m):
        l1 = -d1 * lo[j]
        l2 = -d2 * lo[j]
        s11 = diag1[j] - l1 * p11
        s12 = -a12[j] - l1 * p12
        s21 = -a21[j] - l2 * p21
        s22 = diag2[j] - l2 * p22
        det = s11 * s22 - s12 * s21
        if not (det > 0.0 and s11 > 0.0 and s22 > 0.0) or not math.isfinite(det):
            raise SingularPivotError(f"2x2 pivot block at node {j} is singular or indefinite (det={det!r})")
        inv = 1.0 / det
        r1 = f1[j] - l1 * q1
        r2 = f2[j] - l2 * q2
        q1 = (s22 * r1 - s12 * r2) * inv
        q2 = (s11 * r2 - s21 * r1) * inv
        u1c = -d1 * up[j]
        u2c = -d2 * up[j]
        # S^{-1} diag(u1c, u2c)
        p11 = s22 * u1c * inv
        p12 = -s12 * u2c * inv
        p21 = -s21 * u1c * inv
        p22 = s11 * u2c * inv
        c11[j], c12[j], c21[j], c22[j] = p11, p12, p21, p22
        y1[j], y2[j] = q1, q2

    x1 = [0.0] * m
    x2 = [0.0] * m
    x1[-1], x2[-1] = y1[-1], y2[-1]
    for j in range(m - 2, -1, -1):
        n1, n2 = x1[j + 1], x2[j + 1]
        x1[j] = y1[j] - (c11[j] * n1 + c12[j] * n2)
        x2[j] = y2[j] - (c21[j] * n1 + c22[j] * n2)
    return np.array(x1), np.array(x2)


def residual_norm(sys: BlockSystem, u1, u2, f1, f2) -> float:
    r1, r2 = apply(sys, u1, u2)
    g = sys.grid
    return float(l1_norm(r1 - f1, g) + l1_norm(r2 - f2, g))


def solve(sys: BlockSystem, f1, f2) -> tuple[np.ndarray, np.ndarray]:
    """Solve (lam - G_h)(u1, u2) = (f1, f2) by a block Thomas sweep.

    The L1 residual is checked against ``RESIDUAL_RTOL * (|f|_1 + |u|_1)``.
    """
    g = sys.grid
    f1 = g._check(f1)
    f2 = g._check(f2)
    u1, u2 = _block_thomas(sys, f1, f2)
    res = residual_norm(sys, u1, u2, f1, f2)
    scale = float(l1_norm(f1, g) + l1_norm(f2, g) + l1_norm(u1, g) + l1_norm(u2, g))
    if not res <= RESIDUAL_RTOL * scale:
        raise ConsistencyError(f"block solve residual {res:.3e} exceeds tolerance (scale {scale:.3e})")
    return u1, u2
