"""Euler-Lagrange fixed point and Gibbs functional for the mean-field problem.

The optimizer of the variational problem has the form
u(x,y) = (1/Z) f(x) g(y) exp(-beta (h*u)(x,y)) subject to marginal
constraints, where h counts discordant pairs: h((x1,y1),(x2,y2)) =
theta(x1-x2) theta(y2-y1) + theta(x2-x1) theta(y1-y2).  The convolution
h*u reduces to prefix sums of the cumulative integral, and the constraints
are enforced by iterative proportional fitting between kernel updates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import GridFunction2D, cumulative_trapezoid2d, trapezoid_weights
from .limits import MarginalDensity
from .liouville import NonConvergence

_INNER_TOL = 1e-13
_INNER_MAX = 60
_OUTER_TOL = 1e-10
_OUTER_MAX = 10_000


@dataclass(frozen=True)
class InteractionKernel:
    """The discordance kernel; stateless, evaluated pointwise."""

    @staticmethod
    def evaluate(p1: tuple[float, float], p2: tuple[float, float]) -> float:
        x1, y1 = p1
        x2, y2 = p2
        return _theta(x1 - x2) * _theta(y2 - y1) + _theta(x2 - x1) * _theta(y1 - y2)


def _theta(t: float) -> float:
    # value at 0 is irrelevant in every integral; 1/2 keeps the kernel symmetric
    if t > 0:
        return 1.0
    if t < 0:
        return 0.0
    return 0.5


@dataclass(frozen=True)
class GibbsFunctionalValue:
    entropy: float
    energy: float
    objective: float


def h_convolution(u: GridFunction2D) -> GridFunction2D:
    """(h*u)(x,y) = mass of u over {x'<x, y'>y} plus {x'>x, y'<y}.

    Both corner integrals are prefix differences of the cumulative trapezoid
    W, so the whole field costs O(nx ny).
    """
    w = cumulative_trapezoid2d(u.values, u.hx, u.hy)
    c = w[:, -1][:, None] + w[-1, :][None, :] - 2.0 * w
    return u.with_values(c)


def _ipfp(w: np.ndarray, fv: np.ndarray, gv: np.ndarray,
          wx: np.ndarray, wy: np.ndarray) -> tuple[np.ndarray, float]:
    """Scale rows/columns of w until its trapezoid marginals are (fv, gv)."""
    for _ in range(_INNER_MAX):
        w = w * (fv / (w @ wy))[:, None]
        w = w * (gv / (wx @ w))[None, :]
        err = float(np.max(np.abs(w @ wy - fv)))
        if err < _INNER_TOL:
            break
    err = max(float(np.max(np.abs(w @ wy - fv))), float(np.max(np.abs(wx @ w - gv))))
    return w, err


def euler_lagrange_details(f: MarginalDensity | None, g: MarginalDensity | None,
                           beta: float, shape: int | tuple[int, int],
                           initial: str = "product",
                           damping: float = 0.5) -> tuple[GridFunction2D, dict]:
    """Constrained fixed point plus convergence diagnostics.

    Alternates (a) the kernel update w = f g exp(-beta h*u), (b) proportional
    fitting of w to the marginals, (c) the damped mix u <- (1-lambda) u +
    lambda w.  The damping halves when the sup-change grows for three
    consecutive iterations.
    """
    nx, ny = (shape, shape) if isinstance(shape, int) else shape
    if nx < 2 or ny < 2:
        raise ValueError("grid must have at least 2 nodes per axis")
    f = f or MarginalDensity.uniform()
    g = g or MarginalDensity.uniform()
    xs = np.linspace(0.0, 1.0, nx)
    ys = np.linspace(0.0, 1.0, ny)
    hx, hy = xs[1] - xs[0], ys[1] - ys[0]
    fv = np.asarray(f.pdf(xs), dtype=float)
    gv = np.asarray(g.pdf(ys), dtype=float)
    wx = trapezoid_weights(nx, hx)
    wy = trapezoid_weights(ny, hy)
    if initial == "product":
        u = fv[:, None] * gv[None, :]
    elif initial == "uniform":
        u = np.ones((nx, ny))
    elif initial == "perturbed":
        # positive non-product start, exercises initialization independence
        bump = 1.0 + 0.5 * np.outer(np.sin(2 * np.pi * xs), np.sin(2 * np.pi * ys))
        u = fv[:, None] * gv[None, :] * bump
    else:
        raise ValueError(f"unknown initial iterate {initial!r}")
    lam = damping
    prev_change = np.inf
    growth_run = 0
    marg_err = np.nan
    change = np.inf
    for iteration in range(1, _OUTER_MAX + 1):
        conv = h_convolution(GridFunction2D(nx, ny, 1.0, 1.0, u)).values
        w = fv[:, None] * gv[None, :] * np.exp(-beta * conv)
        w, marg_err = _ipfp(w, fv, gv, wx, wy)
        candidate = (1.0 - lam) * u + lam * w
        change = float(np.max(np.abs(candidate - u)))
        u = candidate
        if change < _OUTER_TOL:
            return GridFunction2D(nx, ny, 1.0, 1.0, u), {
                "iterations": iteration, "final_residual": change,
                "marginal_error": marg_err, "damping": lam,
            }
        if change > prev_change:
            growth_run += 1
            if growth_run >= 3 and lam > 1.0 / 16.0:
                lam /= 2.0
                growth_run = 0
        else:
            growth_run = 0
        prev_change = change
    raise NonConvergence("Euler-Lagrange iteration stalled", diagnostics={
        "iterations": _OUTER_MAX, "last_change": change,
        "marginal_error": marg_err, "damping": lam,
    })


def solve_euler_lagrange(f: MarginalDensity | None, g: MarginalDensity | None,
                         beta: float, shape: int | tuple[int, int],
                         initial: str = "product") -> GridFunction2D:
    """The constrained Euler-Lagrange fixed point; see euler_lagrange_details."""
    grid, _ = euler_lagrange_details(f, g, beta, shape, initial=initial)
    return grid


def gibbs_objective(u: GridFunction2D, f: MarginalDensity | None,
                    g: MarginalDensity | None, beta: float,
                    marginal_tol: float = 1e-6) -> GibbsFunctionalValue:
    """Entropy, energy, and the variational objective entropy - (beta/2) energy.

    Requires u to be a positive density carrying the prescribed marginals
    within `marginal_tol` (the functional is only meaningful on the
    constraint set).
    """
    if np.any(u.values <= 0):
        raise ValueError("density must be strictly positive at every node")
    f = f or MarginalDensity.uniform()
    g = g or MarginalDensity.uniform()
    fv = np.asarray(f.pdf(u.xs), dtype=float)
    gv = np.asarray(g.pdf(u.ys), dtype=float)
    wx = trapezoid_weights(u.nx, u.hx)
    wy = trapezoid_weights(u.ny, u.hy)
    marg = max(float(np.max(np.abs(u.values @ wy - fv))),
               float(np.max(np.abs(wx @ u.values - gv))))
    if marg > marginal_tol:
        raise ValueError(f"marginal error {marg:.3g} exceeds {marginal_tol:.1e}")
    ratio = np.log(u.values) - np.log(fv[:, None] * gv[None, :])
    entropy = -float(wx @ (u.values * ratio) @ wy)
    conv = h_convolution(u).values
    energy = float(wx @ (u.values * conv) @ wy)
    return GibbsFunctionalValue(entropy=entropy, energy=energy,
                                objective=entropy - beta / 2.0 * energy)
