"""Uniform node-centred mesh on [-1, 1] with the origin as a node."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class Grid:
    n: int
    h: float
    nodes: np.ndarray
    j0: int
    weights: np.ndarray

    @property
    def size(self) -> int:
        return self.n + 1

    def _check(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape[-1] != self.n + 1:
            raise ValueError(f"field has {u.shape[-1]} nodal values, grid has {self.n + 1}")
        return u


def build_grid(n: int) -> Grid:
    if int(n) != n or n < 4 or n % 2:
        raise ValueError(f"n must be an even integer >= 4 so that x=0 is a node, got {n!r}")
    n = int(n)
    h = 2.0 / n
    # exact 0 at the centre and exact mirror symmetry x_j = -x_{n-j}
    half = np.arange(n // 2 + 1) * h
    nodes = np.empty(n + 1)
    nodes[n // 2 :] = half
    nodes[: n // 2] = -half[:0:-1]
    nodes[0], nodes[-1] = -1.0, 1.0
    weights = np.full(n + 1, h)
    weights[0] = weights[-1] = h / 2
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return Grid(n=n, h=h, nodes=nodes, j0=n // 2, weights=weights)


def laplacian_apply(u, g: Grid) -> np.ndarray:
    """Second difference with mirrored-ghost Neumann closure."""
    u = g._check(u)
    out = np.empty_like(u)
    inv_h2 = 1.0 / g.h**2
    out[..., 1:-1] = (u[..., :-2] - 2.0 * u[..., 1:-1] + u[..., 2:]) * inv_h2
    out[..., 0] = 2.0 * (u[..., 1] - u[..., 0]) * inv_h2
    out[..., -1] = 2.0 * (u[..., -2] - u[..., -1]) * inv_h2
    return out


def quadrature(u, g: Grid):
    """Trapezoid integral over (-1, 1); the L1 norm is ``quadrature(abs(u), g)``."""
    u = g._check(u)
    return u @ g.weights


def l1_norm(u, g: Grid):
    return quadrature(np.abs(u), g)


def discrete_delta(g: Grid) -> np.ndarray:
    out = np.zeros(g.n + 1)
    out[g.j0] = 1.0 / g.weights[g.j0]
    return out
