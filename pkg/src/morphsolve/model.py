"""Model parameters, kinetics and the algebraic closure of the steady state.

Species ordering throughout the package:

    u1  free morphogen (diffuses, rate 1)
    u2  morphogen-glypican complex (diffuses, rate d)
    u3  free receptor
    u4  morphogen-receptor complex
    u5  morphogen-glypican-receptor complex
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class DimensionalParameters:
    """Raw rates of the dimensional model.

    Units: D, Dstar in length^2/time; gamma, gammaStar, alpha, alphaStar,
    kPrime, kRPrime, kRgPrime in 1/time; k, kR, kRg in 1/(concentration*time);
    s in concentration/time (point-source strength); GammaProd in
    concentration/time; Gconc in concentration; L in length.
    """

    D: float
    Dstar: float
    gamma: float
    gammaStar: float
    k: float
    kPrime: float
    kR: float
    kRPrime: float
    kRg: float
    kRgPrime: float
    alpha: float
    alphaStar: float
    s: float
    GammaProd: float
    Gconc: float
    L: float

    def __post_init__(self) -> None:
        for name in ("D", "Dstar", "L", "gamma", "gammaStar", "alpha", "alphaStar"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive, got {getattr(self, name)!r}")
        for name in ("k", "kPrime", "kR", "kRPrime", "kRg", "kRgPrime", "s", "GammaProd", "Gconc"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be nonnegative, got {getattr(self, name)!r}")


@dataclass(frozen=True)
class Params:
    """Nondimensional parameters.

    ``p1`` is the mass of the point source, ``p3`` the receptor production;
    the remaining source entries are identically zero and not stored.
    ``k1`` and ``k2`` are derived on construction.
    """

    d: float
    b: tuple[float, float, float, float, float]
    c: tuple[float, float, float, float, float]
    p1: float
    p3: float
    k1: float = field(init=False)
    k2: float = field(init=False)

    def __post_init__(self) -> None:
        b = tuple(float(v) for v in self.b)
        c = tuple(float(v) for v in self.c)
        if len(b) != 5:
            raise ValueError(f"b must have 5 entries, got {len(b)}")
        if len(c) != 5:
            raise ValueError(f"c must have 5 entries, got {len(c)}")
        if not self.d > 0:
            raise ValueError(f"d must be strictly positive, got {self.d!r}")
        if not all(v > 0 for v in b):
            raise ValueError(f"all entries of b must be strictly positive, got {b}")
        if not all(v >= 0 for v in c):
            raise ValueError(f"all entries of c must be nonnegative, got {c}")
        if not (self.p1 >= 0 and self.p3 >= 0):
            raise ValueError(f"p1 and p3 must be nonnegative, got p1={self.p1!r}, p3={self.p3!r}")
        object.__setattr__(self, "d", float(self.d))
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "p1", float(self.p1))
        object.__setattr__(self, "p3", float(self.p3))
        object.__setattr__(self, "k1", b[3] / (b[3] + c[3]))
        object.__setattr__(self, "k2", c[2] * b[4] / (b[4] + c[4]))

    @property
    def b_min(self) -> float:
        return min(self.b)

    @property
    def p(self) -> tuple[float, float, float, float, float]:
        return (self.p1, 0.0, self.p3, 0.0, 0.0)

    def replace(self, **changes) -> "Params":
        """Copy with some fields changed; ``b1``..``c5`` address single entries."""
        b = list(self.b)
        c = list(self.c)
        kw = {"d": self.d, "p1": self.p1, "p3": self.p3}
        for key, value in changes.items():
            if key in ("b", "c"):
                (b if key == "b" else c)[:] = list(value)
            elif len(key) == 2 and key[0] in "bc" and key[1] in "12345":
                (b if key[0] == "b" else c)[int(key[1]) - 1] = float(value)
            elif key in kw:
                kw[key] = float(value)
            else:
                raise KeyError(f"unknown parameter {key!r}")
        return Params(b=tuple(b), c=tuple(c), **kw)


FIGURE1 = Params(
    d=0.1,
    b=(100.0, 10.0, 10.0, 10.0, 10.0),
    c=(10.0, 10.0, 1.0, 10.0, 10.0),
    p1=100.0,
    p3=100.0,
)


def nondimensionalize(dp: DimensionalParameters) -> Params:
    """Rescale with T = L^2/D and K = T*kR."""
    if dp.kR == 0:
        raise ValueError("kR must be nonzero: c3 = kRg/kR is undefined")
    T = dp.L**2 / dp.D
    K = T * dp.kR
    return Params(
        d=dp.Dstar / dp.D,
        b=(T * dp.gamma, T * dp.gammaStar, T * dp.alpha, T * dp.alphaStar, T * dp.alphaStar),
        c=(T * dp.k * dp.Gconc, T * dp.kPrime, dp.kRg / dp.kR, T * dp.kRPrime, T * dp.kRgPrime),
        p1=K * T * dp.s,
        p3=K * T * dp.GammaProd,
    )


def h_eval(x1, x2, P: Params):
    """Free receptor level in equilibrium with morphogen levels ``x1``, ``x2``.

    Works pointwise on scalars or arrays.
    """
    return P.p3 / (P.k1 * np.asarray(x1, dtype=float) + P.k2 * np.asarray(x2, dtype=float) + P.b[2])


def reaction_rhs(u: Sequence, P: Params) -> np.ndarray:
    """Reaction part of the system, without diffusion and without the point source.

    ``u`` has leading axis of length 5; trailing axes (nodes) broadcast.
    """
    u1, u2, u3, u4, u5 = (np.asarray(v, dtype=float) for v in u)
    b1, b2, b3, b4, b5 = P.b
    c1, c2, c3, c4, c5 = P.c
    f1 = -(b1 + c1 + u3) * u1 + c2 * u2 + c4 * u4
    f2 = -(b2 + c2 + c3 * u3) * u2 + c1 * u1 + c5 * u5
    f3 = -(b3 + u1 + c3 * u2) * u3 + c4 * u4 + c5 * u5 + P.p3
    f4 = -(b4 + c4) * u4 + u1 * u3
    f5 = -(b5 + c5) * u5 + c3 * u2 * u3
    return np.array(np.broadcast_arrays(f1, f2, f3, f4, f5))


def steady_algebra(u1, u2, P: Params) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Close the non-diffusing species from (u1, u2) at a steady state."""
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    H = h_eval(u1, u2, P)
    u3 = H * np.ones_like(u1 + u2)
    u4 = P.k1 * u1 * H / P.b[3]
    u5 = P.k2 * u2 * H / P.b[4]
    return u3, u4, u5


def local_derivatives(u1_at_0: float, u2_at_0: float, P: Params) -> np.ndarray:
    """Right-sided slopes at the source of all five steady species.

    The u4 slope is written as -p1 k1 H^2 (k2 u2(0) + b3) / (2 p3 b4), which
    stays defined when k2 = 0.
    """
    if P.p3 == 0:
        raise ValueError("local slopes need p3 > 0")
    H = float(h_eval(u1_at_0, u2_at_0, P))
    p1, p3, k1, k2 = P.p1, P.p3, P.k1, P.k2
    b3, b4, b5 = P.b[2], P.b[3], P.b[4]
    common = p1 * k1 * H**2 / (2.0 * p3)
    return np.array(
        [
            -p1 / 2.0,
            0.0,
            common,
            -common * (k2 * u2_at_0 + b3) / b4,
            common * k2 * u2_at_0 / b5,
        ]
    )
