import itertools

import numpy as np
import pytest

from mallowslab.asep import (AsepParams, DynamicsResult, ParticleConfig,
                             ProfileEstimate, profile_monte_carlo, pushforward,
                             simulate_dynamics)
from mallowslab.limits import blocking_profile
from mallowslab.sampler import Permutation


def _exact_frequencies(n: int, k: int, q: float) -> np.ndarray:
    # brute-force average of 1{pi_i <= k} under weights q^inv(pi)
    w_sum = 0.0
    freq = np.zeros(n)
    for perm in itertools.permutations(range(1, n + 1)):
        inv = sum(1 for a in range(n) for b in range(a + 1, n) if perm[a] > perm[b])
        w = q ** inv
        w_sum += w
        freq += w * (np.asarray(perm) <= k)
    return freq / w_sum


def test_pushforward_examples():
    pi = Permutation(np.array([3, 1, 4, 2]))
    assert pushforward(pi, 2).occupation.tolist() == [0, 1, 0, 1]
    assert pushforward(pi, 0).occupation.tolist() == [0, 0, 0, 0]
    assert pushforward(pi, 4).occupation.tolist() == [1, 1, 1, 1]
    # raw arrays work too
    assert pushforward(np.array([2, 1]), 1).occupation.tolist() == [0, 1]
    with pytest.raises(ValueError):
        pushforward(pi, 5)


def test_particle_config_validation():
    cfg = ParticleConfig(np.array([1, 0, 1]))
    assert cfg.n_sites == 3 and cfg.k == 2
    with pytest.raises(ValueError):
        ParticleConfig(np.array([0, 2, 0]))
    with pytest.raises(ValueError):
        ParticleConfig(np.array([], dtype=int))


def test_params_validation_and_derived():
    params = AsepParams.from_beta(40, 20, 4.0)
    assert abs(params.beta - 4.0) < 1e-12
    assert abs(params.p_left - (0.5 + 4.0 / 160.0)) < 1e-15
    assert abs(params.q - (1.0 - params.p_left) / params.p_left) < 1e-15
    with pytest.raises(ValueError):
        AsepParams(6, 7, 0.6)
    with pytest.raises(ValueError):
        AsepParams(6, 3, 1.0)
    with pytest.raises(ValueError):
        AsepParams.from_beta(5, 2, 11.0)


def test_two_site_occupancy_is_hop_rate():
    # N=2, k=1: stationary weights 1 and q, so P(site 1 occupied) = p_left
    params = AsepParams.from_beta(2, 1, 1.0)
    ex = _exact_frequencies(2, 1, params.q)
    assert abs(ex[0] - params.p_left) < 1e-12
    mc = profile_monte_carlo(params, 20000, seed=73)
    z = np.abs(mc.frequency - ex) / np.maximum(mc.stderr, 1e-12)
    assert np.max(z) < 4.0


def test_monte_carlo_against_enumeration():
    params = AsepParams.from_beta(6, 3, 2.0)
    ex = _exact_frequencies(6, 3, params.q)
    mc = profile_monte_carlo(params, 20000, seed=71)
    assert abs(mc.frequency.sum() - 3.0) < 1e-10
    z = np.abs(mc.frequency - ex) / np.maximum(mc.stderr, 1e-12)
    assert np.max(z) < 4.0
    assert mc.samples == 20000
    with pytest.raises(ValueError):
        profile_monte_carlo(params, 0)


def test_exact_profile_monotone_for_positive_beta():
    params = AsepParams.from_beta(6, 3, 2.0)
    ex = _exact_frequencies(6, 3, params.q)
    assert np.all(np.diff(ex) < 0.0)


def test_particle_hole_symmetry():
    q = AsepParams.from_beta(6, 2, 1.7).q
    particles = _exact_frequencies(6, 2, q)
    holes = _exact_frequencies(6, 4, q)
    assert np.max(np.abs(particles - (1.0 - holes[::-1]))) < 1e-12


def test_symmetric_case_is_flat():
    ex = _exact_frequencies(6, 2, 1.0)
    assert np.max(np.abs(ex - 2.0 / 6.0)) < 1e-12
    est = profile_monte_carlo(AsepParams(6, 2, 0.5), 10, seed=1)
    assert np.max(np.abs(est.rho_limit - 2.0 / 6.0)) < 1e-14


def test_rho_limit_column():
    params = AsepParams.from_beta(10, 4, -1.5)
    est = profile_monte_carlo(params, 10, seed=2)
    sites = np.arange(1, 11) / 10.0
    want = np.asarray(blocking_profile(sites, 0.4, params.beta))
    assert np.array_equal(est.rho_limit, want)


def test_dynamics_matches_enumeration():
    params = AsepParams.from_beta(6, 3, 2.0)
    ex = _exact_frequencies(6, 3, params.q)
    dyn = simulate_dynamics(params, 40000.0, seed=72)
    dev = np.abs(dyn.profile - ex)
    assert np.max(dev) < 0.03
    assert np.max(dev / np.maximum(dyn.stderr, 1e-12)) < 4.0


def test_dynamics_bookkeeping():
    params = AsepParams.from_beta(8, 3, -1.0)
    dyn = simulate_dynamics(params, 500.0, seed=9)
    assert dyn.final.k == 3
    assert dyn.events > 0
    assert dyn.burn_in == 250.0
    assert np.all(dyn.stderr > 0.0)
    assert abs(dyn.profile.sum() - 3.0) < 0.2
    # explicit burn-in survives
    again = simulate_dynamics(params, 500.0, seed=9, burn_in=100.0)
    assert again.burn_in == 100.0


def test_dynamics_deterministic_in_seed():
    params = AsepParams.from_beta(7, 3, 1.0)
    a = simulate_dynamics(params, 300.0, seed=4)
    b = simulate_dynamics(params, 300.0, seed=4)
    assert np.array_equal(a.profile, b.profile)
    assert a.events == b.events
    c = simulate_dynamics(params, 300.0, seed=5)
    assert not np.array_equal(a.profile, c.profile)


def test_dynamics_validation():
    params = AsepParams.from_beta(6, 3, 1.0)
    with pytest.raises(ValueError):
        simulate_dynamics(params, 0.0)
    with pytest.raises(ValueError):
        simulate_dynamics(params, 10.0, burn_in=10.0)
    with pytest.raises(ValueError):
        simulate_dynamics(params, 10.0, batches=0)


def test_frozen_states_produce_no_events():
    # all sites occupied: nothing can move, profile is identically 1
    params = AsepParams(4, 4, 0.7)
    dyn = simulate_dynamics(params, 50.0, seed=3)
    assert dyn.events == 0
    assert np.array_equal(dyn.profile, np.ones(4))
