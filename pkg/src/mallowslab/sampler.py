"""Exact sampling of Mallows permutations via independent Lehmer codes.

Under the Mallows weight q^inversions the Lehmer code entries are independent
truncated geometrics, so a sample is n independent inverse-CDF draws followed
by an insertion decode.  No Markov chain is involved; every draw is exact.

Randomness comes from counter-based Philox streams keyed per fixed-size chunk
of samples, so a batch is reproducible under any parallel execution schedule.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial

import numpy as np

from .grids import GridFunction2D
from .qstats import MallowsParams, log_q_factorial

_CHUNK = 4096          # samples per derived RNG stream
_TABLE_MAX = 8         # largest n with a cached code -> permutation table


class Permutation:
    """A permutation of {1..n} in one-line notation, validated and immutable."""

    __slots__ = ("image",)

    def __init__(self, image):
        arr = np.asarray(image, dtype=np.int64).copy()
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("one-line notation must be a nonempty 1D array")
        n = arr.size
        if not np.array_equal(np.sort(arr), np.arange(1, n + 1)):
            raise ValueError("not a permutation of 1..n")
        arr.flags.writeable = False
        object.__setattr__(self, "image", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Permutation is immutable")

    def __len__(self) -> int:
        return self.image.size

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and np.array_equal(self.image, other.image)

    def __hash__(self) -> int:
        return hash(self.image.tobytes())

    def __repr__(self) -> str:
        return f"Permutation({self.image.tolist()})"

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(1, n + 1))

    @classmethod
    def reversal(cls, n: int) -> "Permutation":
        return cls(np.arange(n, 0, -1))

    def inverse(self) -> "Permutation":
        inv = np.empty(len(self), dtype=np.int64)
        inv[self.image - 1] = np.arange(1, len(self) + 1)
        return Permutation(inv)


class LehmerCode:
    """Code c_1..c_n with 0 <= c_j <= j-1; c_j counts values below j placed after it."""

    __slots__ = ("codes",)

    def __init__(self, codes):
        arr = np.asarray(codes, dtype=np.int64).copy()
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("codes must be a nonempty 1D array")
        j = np.arange(1, arr.size + 1)
        if np.any(arr < 0) or np.any(arr >= j):
            raise ValueError("code entry j must lie in 0..j-1")
        arr.flags.writeable = False
        object.__setattr__(self, "codes", arr)

    def __setattr__(self, name, value):
        raise AttributeError("LehmerCode is immutable")

    def __len__(self) -> int:
        return self.codes.size

    def __eq__(self, other) -> bool:
        return isinstance(other, LehmerCode) and np.array_equal(self.codes, other.codes)

    def __repr__(self) -> str:
        return f"LehmerCode({self.codes.tolist()})"


def to_permutation(code: LehmerCode) -> Permutation:
    """Insertion decode: value j goes c_j places from the right of the word so far."""
    return Permutation(_decode_rows(code.codes[None, :])[0])


def to_lehmer(perm: Permutation) -> LehmerCode:
    return LehmerCode(_encode_rows(perm.image[None, :])[0])


def inversions(perm: Permutation | np.ndarray) -> int:
    """Inversion count by merge counting, O(n log n)."""
    arr = perm.image if isinstance(perm, Permutation) else np.asarray(perm)
    _, count = _merge_count(list(arr))
    return count


def inversions_quadratic(perm: Permutation | np.ndarray) -> int:
    """Direct pair count, the O(n^2) reference for the merge version."""
    arr = np.asarray(perm.image if isinstance(perm, Permutation) else perm)
    greater = arr[:, None] > arr[None, :]
    return int(np.sum(greater & np.tri(arr.size, arr.size, -1, dtype=bool).T))


def _merge_count(seq: list) -> tuple[list, int]:
    n = len(seq)
    if n < 2:
        return seq, 0
    left, cl = _merge_count(seq[: n // 2])
    right, cr = _merge_count(seq[n // 2:])
    merged = []
    i = j = 0
    cross = 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            merged.append(right[j])
            j += 1
            cross += len(left) - i
    merged.extend(left[i:])
    merged.extend(right[j:])
    return merged, cl + cr + cross


def rng_stream(seed: int, *key: int) -> np.random.Generator:
    """A Philox stream derived from (seed, key); independent across keys."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


def _sample_codes(n: int, q: float, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw `count` Lehmer codes, each entry truncated-geometric(q) on 0..j-1.

    Inverse CDF in log space.  For q < 1 the argument 1 + U(q^j - 1) stays in
    (0, 1]; for q > 1 it is assembled as (1-U) + U q^j via logaddexp so large
    j never overflows; q = 1 reduces to floor(jU).
    """
    u = rng.random((count, n))
    j = np.arange(1, n + 1, dtype=float)
    if q == 1.0:
        vals = u * j
    else:
        lnq = np.log(q)
        if q < 1.0:
            vals = np.log1p(u * np.expm1(j * lnq)) / lnq
        else:
            with np.errstate(divide="ignore"):
                vals = np.logaddexp(np.log1p(-u), np.log(u) + j * lnq) / lnq
    return np.clip(np.floor(vals), 0.0, j - 1.0).astype(np.int64)


def _decode_rows(codes: np.ndarray) -> np.ndarray:
    """Insertion decode of a batch of codes into one-line words."""
    m, n = codes.shape
    if n <= _TABLE_MAX:
        return _decode_table(n)[codes @ _radix_weights(n)]
    out = np.empty((m, n), dtype=np.int64)
    for r in range(m):
        word: list[int] = []
        row = codes[r]
        for j in range(1, n + 1):
            word.insert(j - 1 - row[j - 1], j)
        out[r] = word
    return out


def _encode_rows(images: np.ndarray) -> np.ndarray:
    """c_j = #{v < j positioned after j}; vectorized over the batch."""
    m, n = images.shape
    pos = np.argsort(images, axis=1)      # pos[:, v-1] = where value v sits
    later = pos[:, :, None] > pos[:, None, :]   # later[m, v, j]: v after j
    tri = np.tri(n, n, -1, dtype=bool).T        # pairs v < j
    return np.sum(later & tri[None, :, :], axis=1, dtype=np.int64)


@lru_cache(maxsize=None)
def _radix_weights(n: int) -> np.ndarray:
    return np.array([factorial(j - 1) for j in range(1, n + 1)], dtype=np.int64)


@lru_cache(maxsize=None)
def _decode_table(n: int) -> np.ndarray:
    """All n! decoded words, indexed by the factorial-base value of the code."""
    codes = _all_codes(n)
    table = np.empty((factorial(n), n), dtype=np.int64)
    table[codes @ _radix_weights(n)] = _decode_loop(codes)
    return table


def _decode_loop(codes: np.ndarray) -> np.ndarray:
    m, n = codes.shape
    out = np.empty((m, n), dtype=np.int64)
    for r in range(m):
        word: list[int] = []
        row = codes[r]
        for j in range(1, n + 1):
            word.insert(j - 1 - row[j - 1], j)
        out[r] = word
    return out


def _all_codes(n: int) -> np.ndarray:
    axes = [np.arange(j) for j in range(1, n + 1)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1).astype(np.int64)


def sample_mallows(params: MallowsParams, q_convention: str = "lin",
                   seed: int | np.random.Generator = 0) -> Permutation:
    """One exact Mallows(n, q) draw; q from the chosen convention."""
    q = params.q(q_convention)
    rng = seed if isinstance(seed, np.random.Generator) else rng_stream(int(seed), 0)
    codes = _sample_codes(params.n, q, 1, rng)
    return Permutation(_decode_rows(codes)[0])


def iter_sample_chunks(params: MallowsParams, count: int,
                       q_convention: str = "lin", seed: int = 0):
    """Yield (start, images) chunks of a batch without holding it all at once.

    Chunk c is drawn from the stream keyed (seed, c), so any scheduling of
    chunks, serial or parallel, produces the same draws.
    """
    if count < 1:
        raise ValueError("count must be positive")
    q = params.q(q_convention)
    n = params.n
    for c, start in enumerate(range(0, count, _CHUNK)):
        stop = min(start + _CHUNK, count)
        codes = _sample_codes(n, q, stop - start, rng_stream(seed, c))
        yield start, _decode_rows(codes)


def sample_mallows_batch(params: MallowsParams, count: int,
                         q_convention: str = "lin", seed: int = 0) -> np.ndarray:
    """`count` independent draws as a (count, n) array of one-line words."""
    out = np.empty((count, params.n), dtype=np.int64)
    for start, images in iter_sample_chunks(params, count, q_convention, seed):
        out[start:start + images.shape[0]] = images
    return out


@dataclass(frozen=True)
class ExactDistribution:
    """Full enumeration of Mallows(n, q): words, probabilities, inversion counts."""

    n: int
    q: float
    perms: np.ndarray = field(repr=False)
    probs: np.ndarray = field(repr=False)
    inversion_counts: np.ndarray = field(repr=False)

    def index_of(self, perm: Permutation | np.ndarray) -> int:
        arr = perm.image if isinstance(perm, Permutation) else np.asarray(perm)
        codes = _encode_rows(arr[None, :])[0]
        return int(codes @ _radix_weights(self.n))

    def prob(self, perm: Permutation | np.ndarray) -> float:
        return float(self.probs[self.index_of(perm)])

    def moments(self) -> tuple[float, float]:
        mean = float(self.probs @ self.inversion_counts)
        var = float(self.probs @ (self.inversion_counts - mean) ** 2)
        return mean, var

    def counts_from_samples(self, images: np.ndarray) -> np.ndarray:
        """Histogram of sampled words over the factorial-base index."""
        images = np.asarray(images)
        size = self.perms.shape[0]
        counts = np.zeros(size, dtype=np.int64)
        w = _radix_weights(self.n)
        for start in range(0, images.shape[0], 65536):
            chunk = images[start:start + 65536]
            idx = _encode_rows(chunk) @ w
            counts += np.bincount(idx, minlength=size)
        return counts

    def tv_from_samples(self, images: np.ndarray) -> float:
        counts = self.counts_from_samples(images)
        emp = counts / counts.sum()
        return 0.5 * float(np.abs(emp - self.probs).sum())


def exact_distribution(n: int, q: float) -> ExactDistribution:
    """Enumerate Mallows(n, q) exactly; n <= 10 by precondition."""
    if not 1 <= n <= 10:
        raise ValueError("exact enumeration is limited to n <= 10")
    if q <= 0:
        raise ValueError("q must be positive")
    codes = _all_codes(n)
    inv = codes.sum(axis=1)
    if q == 1.0:
        probs = np.full(codes.shape[0], 1.0 / factorial(n))
    else:
        log_probs = inv * np.log(q) - log_q_factorial(n, q)
        probs = np.exp(log_probs)
    order = codes @ _radix_weights(n)
    perms = np.empty((factorial(n), n), dtype=np.int16)
    perms[order] = _decode_loop(codes)
    inv_by_index = np.empty(factorial(n), dtype=np.int16)
    inv_by_index[order] = inv
    probs_by_index = np.empty(factorial(n))
    probs_by_index[order] = probs
    return ExactDistribution(n=n, q=q, perms=perms, probs=probs_by_index,
                             inversion_counts=inv_by_index)


class HistogramAccumulator:
    """Mergeable cell-count accumulator for the empirical permutation measure.

    Counts are integers, so merging partial histograms from any split of the
    samples is exact and order-independent.
    """

    def __init__(self, n: int, bins: int):
        if bins < 1:
            raise ValueError("bins must be >= 1")
        self.n = n
        self.bins = bins
        self.samples = 0
        self.counts = np.zeros((bins, bins), dtype=np.int64)

    def add(self, images: np.ndarray) -> "HistogramAccumulator":
        images = np.atleast_2d(np.asarray(images, dtype=np.int64))
        if images.shape[1] != self.n:
            raise ValueError("sample size does not match accumulator n")
        k, n = self.bins, self.n
        i = np.arange(1, n + 1, dtype=np.int64)
        a = (k * i - 1) // n                       # cell of i/n, left-open bins
        b = (k * images - 1) // n
        flat = (a[None, :] * k + b).ravel()
        self.counts += np.bincount(flat, minlength=k * k).reshape(k, k)
        self.samples += images.shape[0]
        return self

    def merge(self, other: "HistogramAccumulator") -> "HistogramAccumulator":
        if (other.n, other.bins) != (self.n, self.bins):
            raise ValueError("incompatible accumulators")
        self.counts += other.counts
        self.samples += other.samples
        return self

    def result(self) -> GridFunction2D:
        if self.samples == 0:
            raise ValueError("no samples accumulated")
        mass = self.counts / (self.samples * self.n)
        return GridFunction2D(self.bins, self.bins, 1.0, 1.0, mass)


def empirical_histogram(samples, bins: int) -> GridFunction2D:
    """Average cell masses of (1/n) sum of point masses at (i/n, pi_i/n).

    `samples` is a (M, n) array of one-line words or a sequence of
    Permutation objects sharing one n.  Values are per-cell masses (the
    container's nodal coordinates are not meaningful here), total mass 1.
    """
    if isinstance(samples, np.ndarray):
        images = np.atleast_2d(samples)
    else:
        seq = list(samples)
        if not seq:
            raise ValueError("need at least one sample")
        rows = [s.image if isinstance(s, Permutation) else np.asarray(s) for s in seq]
        sizes = {r.size for r in rows}
        if len(sizes) != 1:
            raise ValueError("samples mix different n")
        images = np.stack(rows)
    acc = HistogramAccumulator(images.shape[1], bins)
    return acc.add(images).result()
