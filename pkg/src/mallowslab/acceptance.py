"""The twelve acceptance checks behind `mll validate` and the release gate.

Each criterion is a self-contained function returning (passed, details); the
registry wraps it with timing and an optional wall-clock budget.  Full mode
runs every check at its contractual scale; quick mode shrinks the Monte Carlo
and grid sizes (loosening the statistical tolerances accordingly) so the whole
suite finishes in a few seconds.  Seeds are fixed, so both modes are exactly
reproducible.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import expit

from .asep import AsepParams, profile_monte_carlo, simulate_dynamics
from .curieweiss import (CwParams, burgers_residual, cw_moments,
                         cw_pressure_exact, cw_pressure_hs)
from .grids import GridFunction2D
from .limits import (blocking_profile, limit_cell_masses, limit_density,
                     profile_lattice_limit)
from .liouville import CauchyData, solve_cauchy
from .meanfield import euler_lagrange_details, gibbs_objective
from .qstats import (MallowsParams, inversion_count_distribution,
                     log_q_factorial, pressure_finite, pressure_limit)
from .sampler import (_encode_rows, empirical_histogram, exact_distribution,
                      iter_sample_chunks, sample_mallows_batch)


@dataclass(frozen=True)
class CriterionResult:
    """Outcome of one acceptance criterion."""

    index: int
    name: str
    passed: bool
    seconds: float
    details: dict

    def summary_line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.index:2d} {self.name} ({self.seconds:.2f}s)"


# wall-clock budgets in seconds, full mode only
_RUNTIME_LIMITS = {1: 30.0, 3: 5.0, 4: 60.0, 11: 120.0}


def _c01_exact_law(quick: bool):
    """TV distance between sampler draws and the enumeration oracle."""
    draws = 100_000 if quick else 1_000_000
    bound = 0.03 if quick else 0.01
    per_pair = {}
    for i, (n, q) in enumerate([(3, 0.5), (4, 1.0), (5, 0.6), (5, 2.0)]):
        dist = exact_distribution(n, q)
        counts = np.zeros(len(dist.probs), dtype=np.int64)
        params = MallowsParams.from_q(n, q, convention="lin")
        for _start, images in iter_sample_chunks(params, draws, seed=11 + i):
            counts += dist.counts_from_samples(images)
        tv = 0.5 * float(np.abs(counts / draws - dist.probs).sum())
        per_pair[f"n={n},q={q}"] = tv
    worst = max(per_pair.values())
    return worst < bound, {"draws": draws, "tv_bound": bound,
                           "tv_by_pair": per_pair, "tv_max": worst}


def _c02_moment_identity(quick: bool):
    """Sampled mean inversions vs the q d/dq log-derivative of the normalization."""
    draws = 4_000 if quick else 20_000
    per_pair = {}
    ok = True
    for i, (n, q) in enumerate([(20, 0.9), (100, 0.98)]):
        params = MallowsParams.from_q(n, q, convention="lin")
        inv = np.empty(draws)
        for start, images in iter_sample_chunks(params, draws, seed=23 + i):
            inv[start:start + images.shape[0]] = _encode_rows(images).sum(axis=1)
        h = 1e-6
        oracle = q * (log_q_factorial(n, q + h) - log_q_factorial(n, q - h)) / (2 * h)
        se = float(inv.std(ddof=1) / np.sqrt(draws))
        z = abs(float(inv.mean()) - oracle) / se
        per_pair[f"n={n},q={q}"] = {"sampled_mean": float(inv.mean()),
                                    "oracle": oracle, "stderr": se, "z": z}
        ok = ok and z < 4.0
    return ok, {"draws": draws, "z_bound": 4.0, "pairs": per_pair}


def _c03_variance_exact(quick: bool):
    """Uniform-measure inversion variance at n = 8 equals 49/3 exactly."""
    del quick
    counts = inversion_count_distribution(8)
    k = np.arange(counts.size, dtype=np.int64)
    total = int(counts.sum())
    s1 = int((k * counts).sum())
    s2 = int((k * k * counts).sum())
    mean = s1 / total
    variance = (s2 - (s1 // total) * s1) / total      # s1/total = 14 exactly
    closed = 8 * 7 * (2 * 8 + 5) / 72
    return variance == closed == 49 / 3, {
        "variance": variance, "closed_form": closed, "mean": mean,
        "exact_equality": variance == closed,
        "claimed_n3_over_72": 8 ** 3 / 72,
        "note": "the n^3/72 leading-order display underestimates the exact "
                "n(n-1)(2n+5)/72 by roughly a factor 2 at n = 8",
    }


def _c04_empirical_limit(quick: bool):
    """Averaged empirical bin masses against cell integrals of the density."""
    beta, bins = 2.0, 10
    if quick:
        n1, n2, samples, bound = 500, 2000, 100, 0.04
    else:
        n1, n2, samples, bound = 1000, 2000, 200, 0.02
    target = limit_cell_masses(beta, bins)
    errs = {}
    for i, n in enumerate((n1, n2)):
        mat = sample_mallows_batch(MallowsParams(n, beta), samples, seed=37 + i)
        emp = empirical_histogram(mat, bins)
        errs[n] = float(np.abs(emp.values - target).max())
    ok = errs[n1] < bound and errs[n2] < errs[n1]
    return ok, {"beta": beta, "bins": bins, "samples": samples,
                "max_cell_error": errs[n1], "bound": bound,
                "error_at_larger_n": errs[n2], "monotone": errs[n2] < errs[n1]}


def _c05_liouville_order(quick: bool):
    """Picard solution against (1 - beta x y)^{-2}; second-order mesh decay."""
    base = 100 if quick else 200
    data = CauchyData.constant(1.0)
    per_beta = {}
    ok = True
    for beta in (-1.0, 0.9):
        errs = {}
        for m in (base, 2 * base):
            sol = solve_cauchy(data, beta, (m, m))
            xg, yg = sol.meshes()
            exact = (1.0 - beta * xg * yg) ** -2.0
            errs[m] = float(np.abs(sol.values - exact).max())
        ratio = errs[base] / errs[2 * base]
        sup_ok = errs[base] < 1e-4
        ratio_ok = 3.5 <= ratio <= 4.5
        per_beta[beta] = {"sup_error": errs[base], "sup_bound": 1e-4,
                          "sup_ok": sup_ok, "halving_ratio": ratio,
                          "ratio_ok": ratio_ok}
        ok = ok and sup_ok and ratio_ok
    return ok, {"grid": base, "by_beta": per_beta,
                "note": "beta=0.9 peaks at 100 in the corner; a second-order "
                        "scheme (ratio ~ 4, as required) cannot reach 1e-4 "
                        "there at this mesh, so that clause fails honestly"}


def _c06_cauchy_closure(quick: bool):
    """Exponential Cauchy data reproduces the closed-form limit density."""
    m = 200 if quick else 400
    beta = 2.0
    sol = solve_cauchy(CauchyData.exponential(beta), beta, (m, m))
    xg, yg = sol.meshes()
    err = float(np.abs(sol.values - limit_density(xg, yg, beta)).max())
    return err < 1e-4, {"grid": m, "beta": beta, "sup_error": err, "bound": 1e-4}


def _c07_euler_lagrange(quick: bool):
    """Uniform-marginal fixed point vs the closed form, three couplings."""
    m = 128 if quick else 256
    per_beta = {}
    ok = True
    for beta in (-2.0, 1.0, 3.0):
        u, info = euler_lagrange_details(None, None, beta, (m, m))
        xg, yg = u.meshes()
        sup = float(np.abs(u.values - limit_density(xg, yg, beta)).max())
        alt, _ = euler_lagrange_details(None, None, beta, (m, m),
                                        initial="perturbed")
        gap = float(np.abs(u.values - alt.values).max())
        res = {"sup_error": sup, "marginal_error": info["marginal_error"],
               "init_gap": gap, "iterations": info["iterations"]}
        per_beta[beta] = res
        ok = ok and sup < 1e-3 and info["marginal_error"] < 1e-9 and gap < 1e-8
    return ok, {"grid": m, "bounds": {"sup": 1e-3, "marginal": 1e-9,
                                      "init_gap": 1e-8}, "by_beta": per_beta}


def _c08_variational_value(quick: bool):
    """Objective at the closed-form density equals the limit pressure."""
    m = 256 if quick else 512
    marginal_tol = 1e-4 if quick else 1e-6
    u = GridFunction2D.from_callable(lambda x, y: limit_density(x, y, 1.0), m, m)
    value = gibbs_objective(u, None, None, 1.0, marginal_tol=marginal_tol)
    p_inf = pressure_limit(1.0).value
    gap_obj = abs(value.objective - p_inf)
    gap_fin = abs(pressure_finite(MallowsParams(400, 1.0)).value - p_inf)
    ok = gap_obj < 1e-3 and gap_fin < 5e-3
    return ok, {"grid": m, "objective": value.objective, "pressure_limit": p_inf,
                "objective_gap": gap_obj, "objective_bound": 1e-3,
                "finite_n_gap": gap_fin, "finite_n_bound": 5e-3,
                "entropy": value.entropy, "energy": value.energy}


def _c09_rho_identities(quick: bool):
    """Integral, boundary, reflection, and derivative identities of the profile."""
    del quick
    details = {}
    worst_int = 0.0
    for y0, beta in [(0.6, 1.7), (0.35, -2.4)]:
        val, _ = quad(lambda x: float(blocking_profile(x, y0, beta)), 0.0, 1.0,
                      epsabs=1e-12, epsrel=1e-12, limit=200)
        worst_int = max(worst_int, abs(val - y0))
    details["integral_error"] = worst_int
    xs = np.linspace(0.0, 1.0, 41)
    details["boundary_error"] = float(
        max(np.abs(np.asarray(blocking_profile(xs, 1.0, b)) - 1.0).max()
            for b in (-3.0, 0.5, 2.0)))
    yg = np.linspace(0.05, 0.95, 19)
    xg, ym = np.meshgrid(xs, yg, indexing="ij")
    refl = np.abs(np.asarray(blocking_profile(xg, ym, 1.3))
                  - np.asarray(blocking_profile(1.0 - xg, ym, -1.3)))
    details["reflection_error"] = float(refl.max())
    h = 1e-4
    pts = [(0.3, 0.4), (0.7, 0.55), (0.15, 0.8)]
    fd = max(abs((float(blocking_profile(x, y + h, 1.7))
                  - float(blocking_profile(x, y - h, 1.7))) / (2 * h)
                 - float(limit_density(x, y, 1.7))) for x, y in pts)
    details["derivative_fd_error"] = fd
    ok = (worst_int < 1e-8 and details["boundary_error"] < 1e-14
          and details["reflection_error"] < 1e-12 and fd < 1e-6)
    details["bounds"] = {"integral": 1e-8, "boundary": 1e-14,
                         "reflection": 1e-12, "derivative_fd": 1e-6}
    return ok, details


def _c10_lattice_collapse(quick: bool):
    """Profile around its interface collapses onto the logistic curve."""
    del quick
    t = np.linspace(-5.0, 5.0, 201)
    errs = {}
    for beta, bound in [(50.0, 0.02), (1e4, 1e-3)]:
        vals = np.asarray(profile_lattice_limit(t, 0.5, beta))
        errs[beta] = float(np.abs(vals - expit(-t)).max())
    ok = errs[50.0] < 0.02 and errs[1e4] < 1e-3
    return ok, {"max_error_beta_50": errs[50.0], "bound_beta_50": 0.02,
                "max_error_beta_1e4": errs[1e4], "bound_beta_1e4": 1e-3}


def _c11_asep_two_route(quick: bool):
    """Dynamics time-average vs push-forward Monte Carlo vs the limit curve."""
    params = AsepParams.from_beta(40, 20, 4.0)
    if quick:
        mc_samples, t_end, route_bound, limit_bound = 50_000, 1e5, 0.03, 0.045
    else:
        mc_samples, t_end, route_bound, limit_bound = 200_000, 4e5, 0.02, 0.03
    mc = profile_monte_carlo(params, mc_samples, seed=5)
    dyn = simulate_dynamics(params, t_end=t_end, seed=6)
    gap_routes = float(np.abs(dyn.profile - mc.frequency).max())
    gap_mc = float(np.abs(mc.frequency - mc.rho_limit).max())
    gap_dyn = float(np.abs(dyn.profile - dyn.rho_limit).max())
    ok = gap_routes < route_bound and gap_mc < limit_bound and gap_dyn < limit_bound
    return ok, {"mc_samples": mc_samples, "t_end": t_end, "events": dyn.events,
                "route_gap": gap_routes, "route_bound": route_bound,
                "mc_vs_limit": gap_mc, "dynamics_vs_limit": gap_dyn,
                "limit_bound": limit_bound}


def _c12_curie_weiss(quick: bool):
    """Pressure route agreement, Burgers residual decay, thermodynamic identities."""
    sweep = [(50, 0.5, 0.2), (200, 1.0, -0.3), (400, 0.8, 0.1)]
    hs_gap = max(abs(cw_pressure_exact(CwParams(*p)) - cw_pressure_hs(CwParams(*p)))
                 for p in sweep)
    h = 0.02 if quick else 0.01
    tg = np.arange(0.0, 0.8 + 1e-12, h)
    xg = np.arange(-2.0, 2.0 + 1e-12, h)
    r_coarse = float(np.abs(burgers_residual(400, tg, xg)).max())
    tg2 = np.arange(0.0, 0.8 + 1e-12, h / 2)
    xg2 = np.arange(-2.0, 2.0 + 1e-12, h / 2)
    r_fine = float(np.abs(burgers_residual(400, tg2, xg2)).max())
    ratio = r_coarse / r_fine
    n0, t0, x0, hh = 80, 0.6, 0.35, 1e-4
    p = lambda t, x: cw_pressure_exact(CwParams(n0, t, x))
    m1, m2 = cw_moments(CwParams(n0, t0, x0))
    dt_gap = abs((p(t0 + hh, x0) - p(t0 - hh, x0)) / (2 * hh) - m2 / 2)
    dxx = (p(t0, x0 + hh) - 2 * p(t0, x0) + p(t0, x0 - hh)) / hh ** 2
    dxx_gap = abs(dxx - n0 * (m2 - m1 * m1))
    ok = (hs_gap < 1e-8 and r_coarse < 1e-2 and 2.5 <= ratio <= 6.0
          and dt_gap < 1e-7 and dxx_gap < 1e-5)
    return ok, {"hs_gap": hs_gap, "hs_bound": 1e-8, "grid_step": h,
                "burgers_max": r_coarse, "burgers_bound": 1e-2,
                "halving_ratio": ratio, "ratio_window": [2.5, 6.0],
                "dt_identity_gap": dt_gap, "dxx_identity_gap": dxx_gap}


_REGISTRY = [
    (1, "exact-law-sampling", _c01_exact_law),
    (2, "moment-identity", _c02_moment_identity),
    (3, "variance-adjudication", _c03_variance_exact),
    (4, "empirical-vs-limit", _c04_empirical_limit),
    (5, "liouville-order", _c05_liouville_order),
    (6, "cauchy-closure", _c06_cauchy_closure),
    (7, "euler-lagrange-fixed-point", _c07_euler_lagrange),
    (8, "variational-value", _c08_variational_value),
    (9, "profile-identities", _c09_rho_identities),
    (10, "lattice-collapse", _c10_lattice_collapse),
    (11, "asep-two-route", _c11_asep_two_route),
    (12, "curie-weiss", _c12_curie_weiss),
]


def criterion_names() -> list[str]:
    return [f"{idx:02d}-{name}" for idx, name, _func in _REGISTRY]


def run_criterion(index: int, quick: bool = False) -> CriterionResult:
    """Execute one criterion by its 1-based index."""
    for idx, name, func in _REGISTRY:
        if idx == index:
            start = time.perf_counter()
            passed, details = func(quick)
            elapsed = time.perf_counter() - start
            limit = _RUNTIME_LIMITS.get(idx)
            if limit is not None and not quick:
                details["runtime_limit_s"] = limit
                passed = passed and elapsed < limit
            return CriterionResult(idx, name, passed, elapsed, details)
    raise ValueError(f"no criterion with index {index}")


def run_all(quick: bool = False) -> list[CriterionResult]:
    """Execute every criterion in order."""
    return [run_criterion(idx, quick=quick) for idx, _name, _func in _REGISTRY]
