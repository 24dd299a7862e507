"""Numerical laboratory for Mallows permutations and their mean-field limit.

Exact sampling and q-series statistics, the closed-form limit density and
occupation profile, a hyperbolic Liouville solver, the constrained mean-field
fixed point, weakly asymmetric exclusion dynamics, and the Curie-Weiss
companion model, all cross-validated by the acceptance suite in
:mod:`mallowslab.acceptance`.

Attributes resolve lazily so that the command-line front end can cap thread
pools before any numerical library loads.
"""

from importlib import import_module

__version__ = "0.1.0"

_EXPORTS = {
    "GridFunction2D": ".grids",
    "trapezoid_weights": ".grids",
    "integrate2d": ".grids",
    "cumulative_trapezoid2d": ".grids",
    "MallowsParams": ".qstats",
    "PressureValue": ".qstats",
    "q_integer": ".qstats",
    "log_q_factorial": ".qstats",
    "pressure_finite": ".qstats",
    "pressure_limit": ".qstats",
    "inversion_moments": ".qstats",
    "inversion_count_distribution": ".qstats",
    "Permutation": ".sampler",
    "LehmerCode": ".sampler",
    "to_permutation": ".sampler",
    "to_lehmer": ".sampler",
    "inversions": ".sampler",
    "inversions_quadratic": ".sampler",
    "rng_stream": ".sampler",
    "sample_mallows": ".sampler",
    "sample_mallows_batch": ".sampler",
    "iter_sample_chunks": ".sampler",
    "ExactDistribution": ".sampler",
    "exact_distribution": ".sampler",
    "HistogramAccumulator": ".sampler",
    "empirical_histogram": ".sampler",
    "MarginalDensity": ".limits",
    "LimitDensityParams": ".limits",
    "limit_density": ".limits",
    "limit_density_lemma_route": ".limits",
    "limit_density_general": ".limits",
    "blocking_profile": ".limits",
    "blocking_profile_hyperbolic": ".limits",
    "profile_lattice_limit": ".limits",
    "limit_cell_masses": ".limits",
    "CauchyData": ".liouville",
    "ExistenceViolated": ".liouville",
    "NonConvergence": ".liouville",
    "Reparam": ".liouville",
    "existence_margin": ".liouville",
    "solve_cauchy": ".liouville",
    "scaling_transform": ".liouville",
    "liouville_residual": ".liouville",
    "InteractionKernel": ".meanfield",
    "GibbsFunctionalValue": ".meanfield",
    "h_convolution": ".meanfield",
    "euler_lagrange_details": ".meanfield",
    "solve_euler_lagrange": ".meanfield",
    "gibbs_objective": ".meanfield",
    "ParticleConfig": ".asep",
    "AsepParams": ".asep",
    "pushforward": ".asep",
    "ProfileEstimate": ".asep",
    "profile_monte_carlo": ".asep",
    "DynamicsResult": ".asep",
    "simulate_dynamics": ".asep",
    "CwParams": ".curieweiss",
    "cw_pressure_exact": ".curieweiss",
    "cw_pressure_hs": ".curieweiss",
    "cw_magnetization": ".curieweiss",
    "cw_moments": ".curieweiss",
    "burgers_residual": ".curieweiss",
    "CriterionResult": ".acceptance",
    "criterion_names": ".acceptance",
    "run_criterion": ".acceptance",
    "run_all": ".acceptance",
}

__all__ = sorted(_EXPORTS) + ["__version__"]


def __getattr__(name: str):
    try:
        module = _EXPORTS[name]
    except KeyError:
        raise AttributeError(f"module {__name__!r} has no attribute {name!r}") from None
    return getattr(import_module(module, __name__), name)


def __dir__():
    return __all__
