"""Random reshuffling into pair batches and the per-step pairing indicator.

Particle labels are 0-based (0..N-1) throughout the package.  Randomness is
counter-based: each (seed, realization, step) triple keys its own Philox
stream, so partition sequences are reproducible bit-for-bit and independent
of execution order across realizations and steps.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np


def stream(seed: int, realization: int = 0, step: int = 0) -> np.random.Generator:
    """Counter-based RNG stream for one (seed, realization, step) cell."""
    bit = np.random.Philox(key=seed, counter=[0, 0, realization, step])
    return np.random.Generator(bit)


def shuffle(rng: np.random.Generator, N: int) -> tuple[int, ...]:
    """Uniform random permutation of 0..N-1 by the Durstenfeld swap, O(N) draws."""
    if N < 2 or N % 2 != 0:
        raise ValueError(f"N must be even and >= 2, got {N}")
    perm = list(range(N))
    for i in range(N - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        perm[i], perm[j] = perm[j], perm[i]
    return tuple(perm)


@dataclass(frozen=True)
class PairPartition:
    """A partition of {0..N-1} into N/2 unordered pairs induced by a permutation."""

    sigma: tuple
    pairs: tuple

    @classmethod
    def from_permutation(cls, sigma) -> "PairPartition":
        sigma = tuple(int(s) for s in sigma)
        N = len(sigma)
        if N % 2 != 0:
            raise ValueError("permutation length must be even")
        if sorted(sigma) != list(range(N)):
            raise ValueError("not a permutation of 0..N-1")
        pairs = tuple(
            tuple(sorted((sigma[2 * k], sigma[2 * k + 1]))) for k in range(N // 2)
        )
        return cls(sigma=sigma, pairs=tuple(sorted(pairs)))

    @property
    def N(self) -> int:
        return len(self.sigma)

    def partner(self, m: int) -> int:
        """The unique index sharing m's batch."""
        for a, b in self.pairs:
            if m == a:
                return b
            if m == b:
                return a
        raise ValueError(f"label {m} not covered by the partition")

    def contains_pair(self, l: int, n: int) -> bool:
        return tuple(sorted((l, n))) in self.pairs

    def validate(self) -> None:
        """Assert the pairs are disjoint and cover 0..N-1."""
        flat = [i for p in self.pairs for i in p]
        if sorted(flat) != list(range(self.N)):
            raise ValueError(f"pairs {self.pairs} do not partition 0..{self.N - 1}")


def enumerate_pair_partitions(N: int):
    """All distinct partitions of 0..N-1 into pairs ((N-1)!! of them)."""
    if N == 0:
        yield ()
        return
    labels = list(range(N))
    first = labels[0]
    for mate in labels[1:]:
        rest = [l for l in labels[1:] if l != mate]
        for sub in _pairings_of(rest):
            yield tuple(sorted(((first, mate),) + sub))


def _pairings_of(labels):
    if not labels:
        yield ()
        return
    first = labels[0]
    for i in range(1, len(labels)):
        mate = labels[i]
        rest = labels[1:i] + labels[i + 1 :]
        for sub in _pairings_of(rest):
            yield (tuple(sorted((first, mate))),) + sub


@dataclass
class BatchSchedule:
    """Reshuffling schedule: one partition per step interval [j*dt, (j+1)*dt).

    Partitions are generated lazily from the counter-based stream keyed by
    (seed, realization, j) and cached; identical (seed, realization) reproduce
    the identical sequence regardless of query order.
    """

    N: int
    dt: float
    seed: int
    realization: int = 0
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.N < 2 or self.N % 2 != 0:
            raise ValueError(f"N must be even and >= 2, got {self.N}")

    def partition(self, j: int) -> PairPartition:
        if j < 0:
            raise ValueError(f"step index must be >= 0, got {j}")
        if j not in self._cache:
            rng = stream(self.seed, self.realization, j)
            self._cache[j] = PairPartition.from_permutation(shuffle(rng, self.N))
        return self._cache[j]

    def step_of(self, t: float) -> int:
        if t < 0:
            raise ValueError(f"time must be >= 0, got {t}")
        return int(np.floor(t / self.dt))

    def dump(self, fh, steps: int) -> None:
        """Write the diagnostic text format, one line per step: 'j: (a,b)(c,d)...'."""
        for j in range(steps):
            pairs = "".join(f"({a},{b})" for a, b in self.partition(j).pairs)
            fh.write(f"{j}: {pairs}\n")


def indicator(schedule: BatchSchedule, t: float, l: int, n: int) -> int:
    """T_t(l, n): 1 iff l and n share a batch during the step containing t."""
    if l == n:
        raise ValueError("indicator requires two distinct labels")
    N = schedule.N
    if not (0 <= l < N and 0 <= n < N):
        raise ValueError(f"labels must lie in 0..{N - 1}")
    part = schedule.partition(schedule.step_of(t))
    return 1 if part.contains_pair(l, n) else 0


def pair_frequency(N: int, samples: int | None = None, seed: int = 0):
    """Probability that each unordered pair shares a batch under uniform shuffling.

    With samples=None, enumerates all N! permutations (N <= 8) and returns
    exact Fractions; otherwise Monte-Carlo estimates with standard errors,
    returned as {(l, n): (frequency, stderr)}.
    """
    if samples is None:
        if N > 8:
            raise ValueError("exhaustive enumeration supported only for N <= 8")
        counts = {}
        total = 0
        for sigma in itertools.permutations(range(N)):
            total += 1
            for k in range(N // 2):
                p = tuple(sorted((sigma[2 * k], sigma[2 * k + 1])))
                counts[p] = counts.get(p, 0) + 1
        return {p: Fraction(c, total) for p, c in sorted(counts.items())}

    rng = stream(seed, 0, 0)
    counts = {(l, n): 0 for l in range(N) for n in range(l + 1, N)}
    for _ in range(samples):
        part = PairPartition.from_permutation(shuffle(rng, N))
        for p in part.pairs:
            counts[p] += 1
    out = {}
    for p, c in sorted(counts.items()):
        freq = c / samples
        out[p] = (freq, float(np.sqrt(freq * (1.0 - freq) / samples)))
    return out
