"""Pair potentials, their Fourier-moment constants, and interaction diagonals.

The error-bound constants are the first and second absolute Fourier moments

    Lambda(V) = (1/2pi) * int |w| |V^(w)| dw,
    L(V)      = (1/2pi) * int w^2 |V^(w)| dw      (d = 1),

evaluated analytically for the built-in kinds and from the discrete Fourier
series for tabulated ones.  Pair differences x_l - x_n are always wrapped to
the minimal image on the torus.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .batching import PairPartition, enumerate_pair_partitions
from .grid import GridSpec


@dataclass(frozen=True)
class PotentialSpec:
    """Binary interaction potential V; V(z) = V(-z) for every built-in kind.

    kinds:
      gaussian   V(z) = amplitude * exp(-z^2 / (2 width^2))
      cosine     V(z) = amplitude * cos(wavenumber * z); decays nowhere, so it
                 violates the vanishing-at-infinity hypothesis and is meant
                 for verification suites only
      zero       V = 0
      tabulated  even samples of one period (length `period`), first sample
                 at z = -period/2
    """

    kind: str
    amplitude: float = 1.0
    width: float = 1.0
    wavenumber: float = 1.0
    samples: tuple = ()
    period: float = 0.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "cosine", "zero", "tabulated"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == "gaussian" and self.width <= 0:
            raise ValueError("gaussian width must be positive")
        if self.kind == "tabulated":
            if len(self.samples) < 4 or self.period <= 0:
                raise ValueError("tabulated potential needs samples and a period")
            v = np.asarray(self.samples, dtype=float)
            # evenness on the sample grid: v[j] ~ V(-period/2 + j*dz)
            mirrored = np.roll(v[::-1], 1)
            if np.max(np.abs(v - mirrored)) > 1e-12 * max(1.0, np.max(np.abs(v))):
                raise ValueError("tabulated potential must be even")

    @property
    def satisfies_decay_hypothesis(self) -> bool:
        """Whether V(z) -> 0 as |z| -> infinity holds for this kind."""
        return self.kind in ("gaussian", "zero")

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        if self.kind == "gaussian":
            return self.amplitude * np.exp(-(z**2) / (2.0 * self.width**2))
        if self.kind == "cosine":
            return self.amplitude * np.cos(self.wavenumber * z)
        if self.kind == "zero":
            return np.zeros_like(z)
        v = np.asarray(self.samples, dtype=float)
        n = len(v)
        dz = self.period / n
        idx = np.rint((z + self.period / 2.0) / dz).astype(int) % n
        return v[idx]

    def sup_norm(self) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "tabulated":
            return float(np.max(np.abs(self.samples)))
        return abs(self.amplitude)


@dataclass(frozen=True)
class PotentialConstants:
    Lambda: float
    Lconst: float
    sup_norm: float

    def __post_init__(self):
        if min(self.Lambda, self.Lconst, self.sup_norm) < 0:
            raise ValueError("potential constants must be nonnegative")


SPECTRAL_TAIL_FRACTION = 1e-8


def potential_constants(spec: PotentialSpec) -> PotentialConstants:
    """First/second Fourier-moment constants and the sup norm of V.

    gaussian: V^(w) = amplitude*width*sqrt(2 pi)*exp(-w^2 width^2/2), so
    Lambda = amplitude*sqrt(2/pi)/width and L = amplitude/width^2.
    cosine: atomic spectrum at +-wavenumber gives Lambda = |amplitude*k| and
    L = amplitude*k^2.  tabulated: discrete Fourier series, with a spectral
    tail check standing in for quadrature convergence.
    """
    a = spec.amplitude
    if spec.kind == "zero":
        return PotentialConstants(0.0, 0.0, 0.0)
    if spec.kind == "gaussian":
        w = spec.width
        return PotentialConstants(
            Lambda=abs(a) * np.sqrt(2.0 / np.pi) / w,
            Lconst=abs(a) / w**2,
            sup_norm=abs(a),
        )
    if spec.kind == "cosine":
        k = abs(spec.wavenumber)
        return PotentialConstants(Lambda=abs(a) * k, Lconst=abs(a) * k**2, sup_norm=abs(a))

    v = np.asarray(spec.samples, dtype=float)
    n = len(v)
    coeffs = np.fft.fftshift(np.fft.fft(v)) / n
    freqs = 2.0 * np.pi * np.arange(-(n // 2), n - n // 2) / spec.period
    weights2 = freqs**2 * np.abs(coeffs)
    total = float(np.sum(weights2))
    tail = float(np.sum(weights2[np.abs(freqs) >= 0.75 * np.abs(freqs).max()]))
    if total > 0 and tail > SPECTRAL_TAIL_FRACTION * total:
        raise ValueError(
            "tabulated potential spectrum does not decay: "
            f"tail fraction {tail / total:.2e} of the second-moment sum"
        )
    return PotentialConstants(
        Lambda=float(np.sum(np.abs(freqs) * np.abs(coeffs))),
        Lconst=total,
        sup_norm=float(np.max(np.abs(v))),
    )


def minimal_image(z, L: float):
    """Wrap separations onto [-L/2, L/2)."""
    return z - L * np.round(np.asarray(z, dtype=float) / L)


def pair_table(spec: PotentialSpec, g: GridSpec) -> np.ndarray:
    """V(x_i - x_j) with minimal-image wrapping, shape (M, M)."""
    diff = minimal_image(g.x[:, None] - g.x[None, :], g.L)
    return spec(diff)


def interaction_diagonal(
    spec: PotentialSpec,
    g: GridSpec,
    N: int,
    mode="full",
):
    """Diagonal of the interaction part of the Hamiltonian over the M^N grid.

    mode="full" gives (1/(N-1)) * sum_{l<n} V(x_l - x_n) (zero tensor for
    N = 1, which has no pairs); mode=PairPartition gives sum over the N/2
    batch pairs only.  Returns (values, pair_evaluations) where the count is
    the number of pair terms accumulated.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    table = pair_table(spec, g)
    values = np.zeros((g.M,) * N)

    def add_pair(l, n):
        shape = [1] * N
        shape[l] = g.M
        shape[n] = g.M
        # table is symmetric, so axis orientation does not matter
        np.add(values, table.reshape(shape), out=values)

    if isinstance(mode, PairPartition):
        if N % 2 != 0:
            raise ValueError(f"partition mode requires even N, got {N}")
        if mode.N != N:
            raise ValueError(f"partition covers {mode.N} labels, expected {N}")
        mode.validate()
        for l, n in mode.pairs:
            add_pair(l, n)
        return values, N // 2

    if mode != "full":
        raise ValueError(f"mode must be 'full' or a PairPartition, got {mode!r}")
    count = 0
    for l in range(N):
        for n in range(l + 1, N):
            add_pair(l, n)
            count += 1
    if count:
        values *= 1.0 / (N - 1)
    return values, count


def averaged_partition_diagonal(spec: PotentialSpec, g: GridSpec, N: int) -> np.ndarray:
    """Mean of the partition-mode diagonal over all pair partitions of 0..N-1.

    Exhaustive (meant for N <= 8); equals the full-mode diagonal entrywise,
    which is the Hamiltonian-level form of the pairing-probability identity
    E T(l, n) = 1/(N-1).
    """
    parts = list(enumerate_pair_partitions(N))
    acc = np.zeros((g.M,) * N)
    for pairs in parts:
        part = PairPartition(sigma=tuple(i for p in pairs for i in p), pairs=pairs)
        vals, _ = interaction_diagonal(spec, g, N, mode=part)
        acc += vals
    return acc / len(parts)
