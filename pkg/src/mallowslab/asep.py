"""Exclusion process on {1..N}: push-forward sampling and event-driven dynamics.

A Mallows(N, q) permutation pushed through eta_i = 1{pi_i <= k} has exactly
the stationary law of the asymmetric exclusion process with left-hop rate
p = 1/(1+q), so the stationary profile can be estimated two independent ways:
direct permutation sampling, and time averages of the continuous-time chain.
Under the weakly asymmetric scaling p = 1/2 + beta/(4N) both converge to the
blocking profile rho(x; k/N; beta); particles accumulate on the left for
beta > 0.

The simulator is a discrete-event scheme: one exponential clock per active
bond, kept in a heap with version counters so stale events are discarded
lazily.  The event order is the process, so a trajectory is sequential by
construction.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .limits import blocking_profile
from .qstats import MallowsParams
from .sampler import iter_sample_chunks, rng_stream


@dataclass(frozen=True)
class ParticleConfig:
    """Occupation vector eta in {0,1}^N."""

    occupation: np.ndarray

    def __post_init__(self):
        occ = np.asarray(self.occupation, dtype=np.int8).copy()
        if occ.ndim != 1 or occ.size < 1:
            raise ValueError("occupation must be a nonempty 1D array")
        if not np.all((occ == 0) | (occ == 1)):
            raise ValueError("occupation entries must be 0 or 1")
        occ.flags.writeable = False
        object.__setattr__(self, "occupation", occ)

    @property
    def n_sites(self) -> int:
        return self.occupation.size

    @property
    def k(self) -> int:
        return int(self.occupation.sum())


@dataclass(frozen=True)
class AsepParams:
    """N sites, k particles, left-hop rate p_left; q and beta derived."""

    n_sites: int
    k: int
    p_left: float

    def __post_init__(self):
        if not (isinstance(self.n_sites, (int, np.integer)) and self.n_sites >= 1):
            raise ValueError("n_sites must be a positive integer")
        if not 0 <= self.k <= self.n_sites:
            raise ValueError("k must lie in 0..N")
        if not 0.0 < self.p_left < 1.0:
            raise ValueError("p_left must lie strictly between 0 and 1")

    @property
    def q(self) -> float:
        return (1.0 - self.p_left) / self.p_left

    @property
    def beta(self) -> float:
        """Inverse temperature of the weakly-asymmetric scaling p = 1/2 + beta/(4N)."""
        return 4.0 * self.n_sites * (self.p_left - 0.5)

    @classmethod
    def from_beta(cls, n_sites: int, k: int, beta: float) -> "AsepParams":
        p = 0.5 + beta / (4.0 * n_sites)
        if not 0.0 < p < 1.0:
            raise ValueError(f"beta={beta} leaves no valid hop rate at N={n_sites}")
        return cls(n_sites, k, p)


def pushforward(pi, k: int) -> ParticleConfig:
    """eta_i = 1 if pi_i <= k; maps Mallows samples to stationary ASEP states."""
    image = np.asarray(getattr(pi, "image", pi))
    if not 0 <= k <= image.size:
        raise ValueError("k out of range")
    return ParticleConfig((image <= k).astype(np.int8))


@dataclass(frozen=True)
class ProfileEstimate:
    """Sitewise occupation estimate with its Monte Carlo error and limit curve."""

    frequency: np.ndarray
    stderr: np.ndarray
    rho_limit: np.ndarray
    samples: int = 0


def _rho_at_sites(params: AsepParams) -> np.ndarray:
    sites = np.arange(1, params.n_sites + 1) / params.n_sites
    return np.asarray(blocking_profile(sites, params.k / params.n_sites, params.beta))


def profile_monte_carlo(params: AsepParams, samples: int, seed: int = 0) -> ProfileEstimate:
    """Occupation frequencies from push-forward of exact Mallows draws.

    Each sample contributes exactly k particles, so the frequencies sum to k
    identically.  The companion column is rho(i/N; k/N; beta) at i = 1..N.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    n, k = params.n_sites, params.k
    mallows = MallowsParams.from_q(n, params.q, convention="lin")
    counts = np.zeros(n, dtype=np.int64)
    for _start, images in iter_sample_chunks(mallows, samples, seed=seed):
        counts += (images <= k).sum(axis=0)
    freq = counts / samples
    stderr = np.sqrt(freq * (1.0 - freq) / samples)
    return ProfileEstimate(frequency=freq, stderr=stderr,
                           rho_limit=_rho_at_sites(params), samples=samples)


@dataclass(frozen=True)
class DynamicsResult:
    """Time-averaged profile of one trajectory, with batch-mean error bars."""

    profile: np.ndarray
    stderr: np.ndarray
    rho_limit: np.ndarray
    final: ParticleConfig
    events: int
    t_end: float
    burn_in: float


def _initial_config(n: int, k: int) -> np.ndarray:
    """k particles spread evenly; a fixed, seed-independent starting state."""
    occ = np.zeros(n, dtype=np.int8)
    if k:
        occ[np.round(np.linspace(0, n - 1, k)).astype(int)] = 1
    return occ


class _ExpPool:
    """Buffered unit-exponential draws from one stream."""

    def __init__(self, rng: np.random.Generator, size: int = 65536):
        self._rng = rng
        self._size = size
        self._buf = rng.exponential(size=size)
        self._pos = 0

    def next(self) -> float:
        if self._pos == self._size:
            self._buf = self._rng.exponential(size=self._size)
            self._pos = 0
        v = self._buf[self._pos]
        self._pos += 1
        return float(v)


def simulate_dynamics(params: AsepParams, t_end: float, seed: int = 0,
                      burn_in: float | None = None,
                      batches: int = 10) -> DynamicsResult:
    """Continuous-time exclusion dynamics via per-bond exponential clocks.

    A (1,0) bond fires a right move at rate 1-p_left, a (0,1) bond a left
    move at rate p_left.  Clocks live in a heap; a move reschedules only the
    three bonds it touches, and superseded heap entries are recognized by a
    stale version counter and dropped on pop.  Occupation is integrated per
    site over (burn_in, t_end], split into `batches` windows whose spread
    yields the standard error.
    """
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    if burn_in is None:
        burn_in = t_end / 2.0
    if not 0 <= burn_in < t_end:
        raise ValueError("burn_in must lie in [0, t_end)")
    if batches < 1 or burn_in + batches * 1e-12 >= t_end:
        raise ValueError("batch windows must have positive width")
    n, k = params.n_sites, params.k
    p = params.p_left
    rates = {(1, 0): 1.0 - p, (0, 1): p}
    pool = _ExpPool(rng_stream(seed, 0))
    eta = _initial_config(n, k)
    version = [0] * max(n - 1, 1)
    heap: list[tuple[float, int, int]] = []

    def schedule(b: int, now: float):
        version[b] += 1
        rate = rates.get((eta[b], eta[b + 1]), 0.0)
        if rate > 0.0:
            heapq.heappush(heap, (now + pool.next() / rate, b, version[b]))

    for b in range(n - 1):
        schedule(b, 0.0)

    edges = np.linspace(burn_in, t_end, batches + 1)
    batch_means = np.empty((batches, n))
    acc = np.zeros(n)
    last = np.full(n, burn_in)
    edge_idx = 0
    events = 0

    def flush_all(up_to: float):
        live = up_to > last
        acc[live] += eta[live] * (up_to - last[live])
        last[live] = up_to

    while heap:
        t_fire, b, ver = heapq.heappop(heap)
        if ver != version[b]:
            continue
        if t_fire > t_end:
            break
        while edge_idx < batches and t_fire > edges[edge_idx + 1]:
            flush_all(edges[edge_idx + 1])
            batch_means[edge_idx] = acc / (edges[edge_idx + 1] - edges[edge_idx])
            acc[:] = 0.0
            edge_idx += 1
        for s in (b, b + 1):
            if t_fire > last[s]:
                acc[s] += eta[s] * (t_fire - last[s])
                last[s] = t_fire
        eta[b], eta[b + 1] = eta[b + 1], eta[b]
        events += 1
        for nb in (b - 1, b, b + 1):
            if 0 <= nb < n - 1:
                schedule(nb, t_fire)
    while edge_idx < batches:
        flush_all(edges[edge_idx + 1])
        batch_means[edge_idx] = acc / (edges[edge_idx + 1] - edges[edge_idx])
        acc[:] = 0.0
        edge_idx += 1

    profile = batch_means.mean(axis=0)
    stderr = batch_means.std(axis=0, ddof=1) / np.sqrt(batches) if batches > 1 \
        else np.zeros(n)
    assert int(eta.sum()) == k, "particle count must be conserved"
    return DynamicsResult(profile=profile, stderr=stderr,
                          rho_limit=_rho_at_sites(params),
                          final=ParticleConfig(eta.copy()), events=events,
                          t_end=t_end, burn_in=burn_in)
