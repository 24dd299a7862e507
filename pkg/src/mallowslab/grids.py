"""Uniform tensor grids on rectangles and trapezoid calculus on them.

Everything downstream (the Cauchy solver, the Euler-Lagrange iteration, the
histogram comparisons) shares one container, ``GridFunction2D``, holding nodal
values on a uniform grid over ``[0, lx] x [0, ly]``.  The cumulative trapezoid
operator defined here is the single discretization used for every integral in
the fixed-point maps, so that discrete identities (marginals, normalization)
hold to rounding rather than to quadrature error.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class GridFunction2D:
    """Nodal values of a function on a uniform rectangular grid.

    ``values[i, j]`` is the value at ``(xs[i], ys[j])`` where the axes run
    from 0 to ``lx`` (resp. ``ly``) inclusive.  ``nx`` and ``ny`` count nodes,
    not cells.
    """

    nx: int
    ny: int
    lx: float
    ly: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("need at least one node per axis")
        if not (self.lx > 0 and self.ly > 0):
            raise ValueError("side lengths must be positive")
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.nx, self.ny):
            raise ValueError(f"values shape {v.shape} != ({self.nx}, {self.ny})")
        object.__setattr__(self, "values", v)

    @property
    def hx(self) -> float:
        if self.nx < 2:
            raise ValueError("spacing undefined on a single-node axis")
        return self.lx / (self.nx - 1)

    @property
    def hy(self) -> float:
        if self.ny < 2:
            raise ValueError("spacing undefined on a single-node axis")
        return self.ly / (self.ny - 1)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(0.0, self.lx, self.nx)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(0.0, self.ly, self.ny)

    def meshes(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinate arrays broadcast to the shape of ``values``."""
        return np.meshgrid(self.xs, self.ys, indexing="ij")

    def with_values(self, values: np.ndarray) -> "GridFunction2D":
        return GridFunction2D(self.nx, self.ny, self.lx, self.ly, values)

    @classmethod
    def from_callable(cls, func, nx: int, ny: int,
                      lx: float = 1.0, ly: float = 1.0) -> "GridFunction2D":
        xs = np.linspace(0.0, lx, nx)
        ys = np.linspace(0.0, ly, ny)
        vals = func(xs[:, None], ys[None, :])
        return cls(nx, ny, lx, ly, np.broadcast_to(vals, (nx, ny)).copy())


def trapezoid_weights(n: int, h: float) -> np.ndarray:
    """1D composite trapezoid weights: h everywhere, h/2 at the two ends."""
    w = np.full(n, h)
    w[0] = w[-1] = h / 2.0
    return w


def integrate2d(values: np.ndarray, hx: float, hy: float) -> float:
    """Tensor trapezoid integral over the whole rectangle."""
    wx = trapezoid_weights(values.shape[0], hx)
    wy = trapezoid_weights(values.shape[1], hy)
    return float(wx @ values @ wy)


def cumulative_trapezoid2d(values: np.ndarray, hx: float, hy: float) -> np.ndarray:
    """W[i, j] = trapezoid approximation of the integral over [0, x_i] x [0, y_j].

    Computed by composing the 1D cumulative trapezoid along each axis; the
    result at the far corner equals :func:`integrate2d` exactly, so prefix
    differences of W are consistent with the global normalization.
    """
    inc_x = np.zeros_like(values)
    inc_x[1:, :] = (values[1:, :] + values[:-1, :]) * (hx / 2.0)
    cum_x = np.cumsum(inc_x, axis=0)
    inc_y = np.zeros_like(cum_x)
    inc_y[:, 1:] = (cum_x[:, 1:] + cum_x[:, :-1]) * (hy / 2.0)
    return np.cumsum(inc_y, axis=1)
