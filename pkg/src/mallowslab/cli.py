"""Command-line front end: reproducible experiments with file-based outputs.

Grids and profiles go to CSV (always with a header row), scalar summaries to
JSON (always a single object carrying a "version" field).  Identical
invocations produce byte-identical CSV bytes; file writes go through a
temporary name and a rename so partial output is never observed.  The
environment variable MLL_THREADS caps the numerical thread pools.
"""

from __future__ import annotations

import os

_cap = os.environ.get("MLL_THREADS")
if _cap:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                 "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(_var, _cap)

import argparse
import contextlib
import json
import sys
import tempfile

import numpy as np

from . import __version__
from .acceptance import run_all
from .asep import AsepParams, profile_monte_carlo, simulate_dynamics
from .curieweiss import (CwParams, burgers_residual, cw_magnetization,
                         cw_pressure_exact, cw_pressure_hs)
from .limits import (LimitDensityParams, MarginalDensity, blocking_profile,
                     limit_cell_masses, limit_density, limit_density_general)
from .liouville import (CauchyData, ExistenceViolated, NonConvergence,
                        liouville_residual, solve_cauchy)
from .meanfield import euler_lagrange_details, gibbs_objective
from .qstats import MallowsParams, pressure_finite, pressure_limit
from .sampler import empirical_histogram, sample_mallows_batch


def _fmt(value) -> str:
    """Shortest round-trip decimal form; the determinism contract hinges on it."""
    return repr(float(value))


def _csv_text(header: str, rows) -> str:
    lines = [header]
    lines.extend(",".join(row) for row in rows)
    return "\n".join(lines) + "\n"


def _coerce(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def _json_text(payload: dict) -> str:
    return json.dumps({"version": __version__, **payload},
                      indent=2, default=_coerce) + "\n"


def _emit(text: str, out: str | None) -> None:
    """Write to stdout, or atomically to `out` (temp file + rename)."""
    if out is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(out)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".mll-tmp-")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)   # mkstemp gives 0600
        os.replace(tmp, out)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


class _ArgError(ValueError):
    """Raised for bad arguments detected after parsing; maps to exit 2."""


def _guard(fn, *args, **kwargs):
    """Run a constructor or loader, converting its rejections to _ArgError."""
    try:
        return fn(*args, **kwargs)
    except (ValueError, OSError) as exc:
        raise _ArgError(str(exc)) from exc


def _read_table(path: str) -> tuple[np.ndarray, np.ndarray]:
    """Two-column (coordinate, value) CSV, header row optional."""
    coords, values = [], []
    with open(path) as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ValueError(f"{path}: expected two columns, got {line!r}")
            try:
                pair = (float(parts[0]), float(parts[1]))
            except ValueError:
                if coords:
                    raise ValueError(f"{path}: malformed row {line!r}") from None
                continue            # header row
            coords.append(pair[0])
            values.append(pair[1])
    if len(coords) < 2:
        raise ValueError(f"{path}: need at least two data rows")
    coords_arr = np.asarray(coords)
    if np.any(np.diff(coords_arr) <= 0):
        raise ValueError(f"{path}: coordinates must be strictly increasing")
    return coords_arr, np.asarray(values)


def _table_callable(path: str):
    coords, values = _read_table(path)
    return lambda z: np.interp(z, coords, values)


def _marginal_from_file(path: str) -> MarginalDensity:
    coords, values = _read_table(path)
    if abs(coords[0]) > 1e-12 or abs(coords[-1] - 1.0) > 1e-12:
        raise ValueError(f"{path}: marginal table must cover [0, 1]")
    step = np.diff(coords)
    if not np.allclose(step, step[0], rtol=1e-9, atol=1e-12):
        raise ValueError(f"{path}: marginal table must be uniformly spaced")
    return MarginalDensity.from_grid(values)


# ---------------------------------------------------------------- commands

def _cmd_pressure(args) -> int:
    if args.n is None:
        value = pressure_limit(args.beta)
        payload = {"pressure": value.value, "n": "limit", "beta": args.beta}
    else:
        value = pressure_finite(_guard(MallowsParams, args.n, args.beta))
        payload = {"pressure": value.value, "n": args.n, "beta": args.beta}
    _emit(_json_text(payload), args.out)
    return 0


def _cmd_sample(args) -> int:
    params = _guard(MallowsParams, args.n, args.beta)
    if args.count < 1:
        raise _ArgError("--count must be at least 1")
    images = sample_mallows_batch(params, args.count, seed=args.seed)
    rows = ((str(s), str(i + 1), str(int(images[s, i])))
            for s in range(args.count) for i in range(args.n))
    _emit(_csv_text("sample_id,position,value", rows), args.out)
    if args.fig:
        from .report import save_draws
        save_draws(images, args.fig,
                   title=f"n={args.n}, beta={args.beta:g}, seed={args.seed}")
    return 0


def _cmd_empirical(args) -> int:
    params = _guard(MallowsParams, args.n, args.beta)
    if args.samples < 1:
        raise _ArgError("--samples must be at least 1")
    if args.bins < 1:
        raise _ArgError("--bins must be at least 1")
    images = sample_mallows_batch(params, args.samples, seed=args.seed)
    emp = empirical_histogram(images, args.bins).values
    target = limit_cell_masses(args.beta, args.bins)
    err = np.abs(emp - target)
    rows = ((str(i + 1), str(j + 1), _fmt(emp[i, j]), _fmt(target[i, j]),
             _fmt(err[i, j]))
            for i in range(args.bins) for j in range(args.bins))
    _emit(_csv_text("x_bin,y_bin,empirical_mass,limit_mass,abs_error", rows),
          args.out)
    if args.fig:
        from .report import save_fields
        save_fields([("empirical", emp), ("limit", target), ("abs error", err)],
                    1.0, 1.0, args.fig)
    return 0


def _cmd_density(args) -> int:
    if args.grid < 2:
        raise _ArgError("--grid must be at least 2")
    xs = np.linspace(0.0, 1.0, args.grid)
    xg, yg = np.meshgrid(xs, xs, indexing="ij")
    if args.profile:
        vals = np.asarray(blocking_profile(xg, yg, args.beta))
        header, label = "x,y,rho", "rho"
    else:
        vals = np.asarray(limit_density(xg, yg, args.beta))
        header, label = "x,y,u", "u"
    rows = ((_fmt(xs[i]), _fmt(xs[j]), _fmt(vals[i, j]))
            for i in range(args.grid) for j in range(args.grid))
    _emit(_csv_text(header, rows), args.out)
    if args.fig:
        from .report import save_field
        save_field(vals, 1.0, 1.0, args.fig,
                   title=f"beta={args.beta:g}", label=label)
    return 0


def _cmd_pde(args) -> int:
    if (args.phi is None) != (args.psi is None):
        raise _ArgError("--phi and --psi must be given together")
    if args.grid < 3:
        raise _ArgError("--grid must be at least 3 (residual stencils)")
    if args.l1 <= 0 or args.l2 <= 0:
        raise _ArgError("--l1 and --l2 must be positive")
    if args.phi is None:
        base = CauchyData.exponential(args.beta)
        data = _guard(CauchyData, base.phi, base.psi, args.l1, args.l2)
    else:
        data = _guard(CauchyData, _guard(_table_callable, args.phi),
                      _guard(_table_callable, args.psi), args.l1, args.l2)
    sol = solve_cauchy(data, args.beta, (args.grid, args.grid))
    res = liouville_residual(sol, args.beta)
    xs, ys = sol.xs, sol.ys
    rows = ((_fmt(xs[i]), _fmt(ys[j]), _fmt(sol.values[i, j]), _fmt(res[i, j]))
            for i in range(args.grid) for j in range(args.grid))
    _emit(_csv_text("x,y,u,residual", rows), args.out)
    if args.fig:
        from .report import save_fields
        save_fields([("u", sol.values), ("residual", res)],
                    data.l1, data.l2, args.fig)
    return 0


def _cmd_el(args) -> int:
    if args.grid < 2:
        raise _ArgError("--grid must be at least 2")
    f = _guard(_marginal_from_file, args.f) if args.f else None
    g = _guard(_marginal_from_file, args.g) if args.g else None
    u, info = euler_lagrange_details(f, g, args.beta, (args.grid, args.grid))
    xg, yg = u.meshes()
    if f is None and g is None:
        closed = np.asarray(limit_density(xg, yg, args.beta))
    else:
        dens = LimitDensityParams(args.beta, f=f, g=g)
        closed = np.asarray(limit_density_general(xg, yg, dens))
    err = np.abs(u.values - closed)
    value = gibbs_objective(u, f, g, args.beta)
    xs, ys = u.xs, u.ys
    rows = ((_fmt(xs[i]), _fmt(ys[j]), _fmt(u.values[i, j]),
             _fmt(closed[i, j]), _fmt(err[i, j]))
            for i in range(args.grid) for j in range(args.grid))
    _emit(_csv_text("x,y,u,closed_form,abs_error", rows), args.out)
    _emit(_json_text({
        "iterations": info["iterations"],
        "final_residual": info["final_residual"],
        "objective": value.objective,
        "entropy": value.entropy,
        "energy": value.energy,
    }), None)
    if args.fig:
        from .report import save_fields
        save_fields([("u", u.values), ("abs error vs closed form", err)],
                    1.0, 1.0, args.fig)
    return 0


def _asep_rows(frequency, stderr, rho_limit):
    return ((str(i + 1), _fmt(frequency[i]), _fmt(stderr[i]), _fmt(rho_limit[i]))
            for i in range(len(frequency)))


def _cmd_asep_profile(args) -> int:
    params = _guard(AsepParams.from_beta, args.n, args.k, args.beta)
    if args.samples < 1:
        raise _ArgError("--samples must be at least 1")
    est = profile_monte_carlo(params, args.samples, seed=args.seed)
    _emit(_csv_text("site,frequency,stderr,rho_limit",
                    _asep_rows(est.frequency, est.stderr, est.rho_limit)),
          args.out)
    if args.fig:
        from .report import save_profile
        save_profile(est.frequency, est.stderr, est.rho_limit, args.fig,
                     title=f"push-forward, N={args.n}, k={args.k}, "
                           f"beta={args.beta:g}")
    return 0


def _cmd_asep_dynamics(args) -> int:
    params = _guard(AsepParams.from_beta, args.n, args.k, args.beta)
    if args.t <= 0:
        raise _ArgError("--t must be positive")
    result = simulate_dynamics(params, t_end=args.t, seed=args.seed)
    _emit(_csv_text("site,frequency,stderr,rho_limit",
                    _asep_rows(result.profile, result.stderr, result.rho_limit)),
          args.out)
    if args.fig:
        from .report import save_profile
        save_profile(result.profile, result.stderr, result.rho_limit, args.fig,
                     title=f"dynamics, N={args.n}, k={args.k}, "
                           f"beta={args.beta:g}, t={args.t:g}")
    return 0


def _cmd_cw(args) -> int:
    params = _guard(CwParams, args.N, args.t, args.x)
    h = args.grid
    if not 0 < h <= 0.4:
        raise _ArgError("--grid step must lie in (0, 0.4]")
    tg = np.arange(0.0, 0.8 + h / 2, h)
    xg = np.arange(-2.0, 2.0 + h / 2, h)
    residual = burgers_residual(args.N, tg, xg)
    payload = {
        "pressure_exact": cw_pressure_exact(params),
        "pressure_hs": cw_pressure_hs(params) if args.t > 0 else None,
        "magnetization": cw_magnetization(params),
        "burgers_residual_max": float(np.abs(residual).max()),
    }
    _emit(_json_text(payload), args.out)
    return 0


def _cmd_validate(args) -> int:
    results = run_all(quick=args.quick)
    payload = {
        "quick": args.quick,
        "all_passed": all(r.passed for r in results),
        "criteria": [{"index": r.index, "name": r.name, "passed": r.passed,
                      "details": r.details} for r in results],
    }
    _emit(_json_text(payload), args.out)
    return 0


# ------------------------------------------------------------------ parser

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mll",
        description="Mallows permutation laboratory: sampling, limit formulas, "
                    "PDE and mean-field solvers, exclusion dynamics.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, **kwargs):
        p = sub.add_parser(name, help=help_text, **kwargs)
        p.add_argument("--out", default=None, metavar="FILE",
                       help="write output to FILE (atomic); default stdout")
        return p

    p = add("pressure", "finite-n or limiting pressure as JSON")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--n", type=int, default=None,
                   help="permutation size; omit for the n -> infinity limit")
    p.set_defaults(func=_cmd_pressure)

    p = add("sample", "draw permutations, one CSV row per entry")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fig", default=None, metavar="FILE",
                   help="also render a scatter of the first draws")
    p.set_defaults(func=_cmd_sample)

    p = add("empirical", "binned empirical measure against the limit density")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--bins", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fig", default=None, metavar="FILE",
                   help="also render empirical/limit/error heatmaps")
    p.set_defaults(func=_cmd_empirical)

    p = add("density", "closed-form limit density (or occupation profile)")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--grid", type=int, required=True, metavar="K",
                   help="nodes per axis of the K x K evaluation grid")
    p.add_argument("--profile", action="store_true",
                   help="emit rho(x; y) instead of u(x, y)")
    p.add_argument("--fig", default=None, metavar="FILE",
                   help="also render the field as a heatmap")
    p.set_defaults(func=_cmd_density)

    p = add("pde", "solve the hyperbolic Liouville Cauchy problem")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--grid", type=int, required=True, metavar="K")
    p.add_argument("--phi", default=None, metavar="FILE",
                   help="x-boundary data as CSV (coordinate,value)")
    p.add_argument("--psi", default=None, metavar="FILE",
                   help="y-boundary data as CSV (coordinate,value)")
    p.add_argument("--l1", type=float, default=1.0)
    p.add_argument("--l2", type=float, default=1.0)
    p.add_argument("--fig", default=None, metavar="FILE",
                   help="also render solution and residual heatmaps")
    p.set_defaults(func=_cmd_pde)

    p = add("el", "mean-field Euler-Lagrange fixed point; JSON summary on stdout")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--grid", type=int, required=True, metavar="K")
    p.add_argument("--f", default=None, metavar="FILE",
                   help="x-marginal pdf table on [0,1] as CSV (coordinate,value)")
    p.add_argument("--g", default=None, metavar="FILE",
                   help="y-marginal pdf table on [0,1] as CSV (coordinate,value)")
    p.add_argument("--fig", default=None, metavar="FILE",
                   help="also render solution and error heatmaps")
    p.set_defaults(func=_cmd_el)

    p = add("asep-profile", "stationary occupation via exact push-forward draws")
    p.add_argument("--n", type=int, required=True, help="number of sites")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--k", type=int, required=True, help="number of particles")
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fig", default=None, metavar="FILE",
                   help="also render the profile with error bars")
    p.set_defaults(func=_cmd_asep_profile)

    p = add("asep-dynamics", "time-averaged occupation from event dynamics")
    p.add_argument("--n", type=int, required=True, help="number of sites")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--k", type=int, required=True, help="number of particles")
    p.add_argument("--t", type=float, required=True, help="trajectory length")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fig", default=None, metavar="FILE",
                   help="also render the profile with error bars")
    p.set_defaults(func=_cmd_asep_dynamics)

    p = add("cw", "Curie-Weiss pressure, magnetization, Burgers residual")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--grid", type=float, default=0.01, metavar="H",
                   help="step of the residual grid on [0,0.8] x [-2,2]")
    p.set_defaults(func=_cmd_cw)

    p = add("validate", "run the acceptance suite, JSON report per criterion")
    p.add_argument("--quick", action="store_true",
                   help="reduced Monte Carlo and grid sizes, loosened "
                        "statistical tolerances")
    p.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _ArgError as exc:
        parser.error(str(exc))
    except OSError as exc:
        parser.error(str(exc))
    except (ExistenceViolated, NonConvergence, ValueError) as exc:
        error = {"type": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ExistenceViolated):
            error["margin"] = exc.margin
        if isinstance(exc, NonConvergence):
            error["diagnostics"] = exc.diagnostics
        sys.stderr.write(_json_text({"error": error}))
        return 1


if __name__ == "__main__":
    sys.exit(main())
