"""Time evolution of the N-particle pure state: exact dynamics and random batch.

Both dynamics use Strang splitting with the potential half-steps outermost,

    exp(-i dtau V/2hbar) exp(-i dtau K/hbar) exp(-i dtau V/2hbar),

with the kinetic flow applied exactly in the Fourier basis (multiplication by
sum_m xi_m^2 / 2).  Every factor is a diagonal unitary in its own basis, so
the weighted norm is preserved to roundoff.  The random-batch propagator
rebuilds only the N/2-pair interaction diagonal at each reshuffling step;
the full-dynamics diagonal is built once.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .batching import BatchSchedule
from .container import MAGIC_STATE, read_container, write_container
from .grid import GridSpec
from .potential import PotentialSpec, interaction_diagonal

DEFAULT_AMP_CAP = 2**26
BOUNDARY_MASS_TOL = 1e-10

_fft_workers = 1


def set_fft_workers(n: int) -> None:
    """Worker count passed to scipy.fft for tensor-wide transforms."""
    global _fft_workers
    _fft_workers = max(1, int(n))


@dataclass
class WaveFunctionN:
    """Pure N-particle state: complex amplitude tensor of shape (M,)*N.

    Axis m carries particle m's coordinate.  The physical normalization is
    dx^(N/2) * ||amps||_2 = 1.
    """

    amps: np.ndarray
    grid: GridSpec
    N: int

    def __post_init__(self):
        if self.amps.shape != (self.grid.M,) * self.N:
            raise ValueError(
                f"amplitude tensor must be {(self.grid.M,) * self.N}, got {self.amps.shape}"
            )
        if self.N * self.grid.M**self.N > DEFAULT_AMP_CAP:
            raise MemoryError(
                f"N*M^N = {self.N * self.grid.M ** self.N} exceeds the amplitude cap "
                f"{DEFAULT_AMP_CAP}"
            )

    def norm(self) -> float:
        return self.grid.weighted_norm(self.amps)

    def normalized(self) -> "WaveFunctionN":
        return WaveFunctionN(self.amps / self.norm(), self.grid, self.N)

    def fidelity(self, other: "WaveFunctionN") -> float:
        """|<self|other>| with the grid quadrature weight."""
        return float(
            abs(np.vdot(self.amps, other.amps)) * self.grid.dx**self.N
        )

    def boundary_mass(self) -> float:
        """Probability mass within dx of the torus seam, maximized over axes."""
        prob = np.abs(self.amps) ** 2 * self.grid.dx**self.N
        worst = 0.0
        for ax in range(self.N):
            marg = prob.sum(axis=tuple(a for a in range(self.N) if a != ax))
            worst = max(worst, float(marg[0] + marg[-1]))
        return worst

    def check_boundary(self) -> None:
        m = self.boundary_mass()
        if m > BOUNDARY_MASS_TOL:
            warnings.warn(
                f"wave packet carries {m:.3e} probability mass within dx of the "
                "domain boundary; enlarge L",
                stacklevel=2,
            )


def gaussian_product_state(
    grid: GridSpec,
    centers,
    widths,
    momenta=None,
) -> WaveFunctionN:
    """Normalized product of Gaussian packets, one per particle.

    Packet m: exp(-(x - c_m)^2 / (4 s_m^2) + i p_m (x - c_m) / hbar), so s_m is
    the position-density standard deviation.
    """
    centers = np.atleast_1d(np.asarray(centers, dtype=float))
    N = len(centers)
    widths = np.broadcast_to(np.asarray(widths, dtype=float), (N,))
    if momenta is None:
        momenta = np.zeros(N)
    momenta = np.broadcast_to(np.asarray(momenta, dtype=float), (N,))
    x = grid.x
    amps = None
    for c, s, p in zip(centers, widths, momenta):
        phi = np.exp(-((x - c) ** 2) / (4.0 * s**2) + 1j * p * (x - c) / grid.hbar)
        phi = phi / (np.linalg.norm(phi) * grid.dx**0.5)
        amps = phi if amps is None else np.multiply.outer(amps, phi)
    psi = WaveFunctionN(amps=amps.astype(complex), grid=grid, N=N)
    psi.check_boundary()
    return psi


def symmetrize(psi: WaveFunctionN) -> WaveFunctionN:
    """Project onto the exchange-symmetric subspace and renormalize."""
    import itertools

    acc = np.zeros_like(psi.amps)
    for perm in itertools.permutations(range(psi.N)):
        acc += np.transpose(psi.amps, perm)
    out = WaveFunctionN(acc, psi.grid, psi.N)
    return out.normalized()


@dataclass
class EvolveReport:
    """Cost accounting for one propagation.

    pair_evaluations counts one evaluation per pair term per substep, i.e.
    steps*substeps*N(N-1)/2 for the full dynamics and steps*substeps*(N/2)
    for the random-batch dynamics.
    """

    steps: int
    substeps_per_step: int
    pair_evaluations: int
    wall_time: float


def _kinetic_phase(grid: GridSpec, N: int, dtau: float) -> np.ndarray:
    """exp(-i dtau/(2 hbar) * sum_m xi_m^2) over the M^N Fourier grid."""
    xi2 = grid.xi_fft**2
    ksum = xi2
    for _ in range(N - 1):
        ksum = ksum[..., None] + xi2
    return np.exp((-1j * dtau / (2.0 * grid.hbar)) * ksum)


def _propagate_span(
    amps: np.ndarray,
    diag: np.ndarray,
    dtau: float,
    nsub: int,
    grid: GridSpec,
    kin_phase: np.ndarray | None = None,
) -> np.ndarray:
    """nsub Strang substeps of size dtau under a fixed interaction diagonal."""
    N = amps.ndim
    axes = tuple(range(N))
    if kin_phase is None:
        kin_phase = _kinetic_phase(grid, N, dtau)
    half = np.exp((-1j * dtau / (2.0 * grid.hbar)) * diag)
    full = half * half
    amps = amps * half
    for s in range(nsub):
        amps = sfft.fftn(amps, axes=axes, workers=_fft_workers, overwrite_x=True)
        amps *= kin_phase
        amps = sfft.ifftn(amps, axes=axes, workers=_fft_workers, overwrite_x=True)
        amps *= full if s < nsub - 1 else half
    return amps


def strang_step(
    psi: WaveFunctionN,
    diag: np.ndarray,
    dtau: float,
    hbar: float | None = None,
) -> WaveFunctionN:
    """One splitting step exp(-i dtau V/2h) exp(-i dtau K/h) exp(-i dtau V/2h)."""
    if diag.shape != psi.amps.shape:
        raise ValueError(
            f"interaction diagonal shape {diag.shape} does not match state "
            f"{psi.amps.shape}"
        )
    g = psi.grid
    if hbar is not None and hbar != g.hbar:
        g = GridSpec(L=g.L, M=g.M, hbar=float(hbar))
    amps = _propagate_span(psi.amps.copy(), diag, dtau, 1, g)
    return WaveFunctionN(amps, psi.grid, psi.N)


def evolve_full(
    psi0: WaveFunctionN,
    t: float,
    substeps_per_unit: int,
    spec: PotentialSpec,
) -> tuple[WaveFunctionN, EvolveReport]:
    """Propagate under the full Hamiltonian (time-independent diagonal, cached)."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    t0 = time.perf_counter()
    if t == 0:
        return psi0, EvolveReport(0, 0, 0, 0.0)
    nsub = max(1, int(round(t * substeps_per_unit)))
    dtau = t / nsub
    diag, pairs = interaction_diagonal(spec, psi0.grid, psi0.N, mode="full")
    amps = _propagate_span(psi0.amps.copy(), diag, dtau, nsub, psi0.grid)
    psi = WaveFunctionN(amps, psi0.grid, psi0.N)
    psi.check_boundary()
    report = EvolveReport(
        steps=1,
        substeps_per_step=nsub,
        pair_evaluations=nsub * pairs,
        wall_time=time.perf_counter() - t0,
    )
    return psi, report


def evolve_rb(
    psi0: WaveFunctionN,
    t: float,
    schedule: BatchSchedule,
    substeps_per_step: int,
    spec: PotentialSpec,
) -> tuple[WaveFunctionN, EvolveReport]:
    """Propagate under the piecewise-constant random-batch Hamiltonian.

    Step j covers [j dt, (j+1) dt) with the partition-j diagonal rebuilt from
    the schedule (N/2 pair evaluations each); a final partial step, if t is
    not a multiple of dt, uses partition floor(t/dt), mirroring the two-sided
    product formula for the propagator.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    t0 = time.perf_counter()
    if t == 0:
        return psi0, EvolveReport(0, substeps_per_step, 0, 0.0)
    g = psi0.grid
    N = psi0.N
    dt = schedule.dt
    whole = int(np.floor(t / dt + 1e-12))
    remainder = t - whole * dt
    if remainder < 1e-12 * max(t, dt):
        remainder = 0.0

    dtau = dt / substeps_per_step
    kin = _kinetic_phase(g, N, dtau)
    amps = psi0.amps.copy()
    total_sub = 0
    pair_per_rebuild = N // 2
    for j in range(whole):
        diag, _ = interaction_diagonal(spec, g, N, mode=schedule.partition(j))
        amps = _propagate_span(amps, diag, dtau, substeps_per_step, g, kin_phase=kin)
        total_sub += substeps_per_step
    if remainder > 0.0:
        nsub = max(1, int(np.ceil(remainder / dtau - 1e-12)))
        dtau_r = remainder / nsub
        diag, _ = interaction_diagonal(spec, g, N, mode=schedule.partition(whole))
        amps = _propagate_span(amps, diag, dtau_r, nsub, g)
        total_sub += nsub
    psi = WaveFunctionN(amps, g, N)
    psi.check_boundary()
    steps = whole + (1 if remainder > 0 else 0)
    report = EvolveReport(
        steps=steps,
        substeps_per_step=substeps_per_step,
        pair_evaluations=total_sub * pair_per_rebuild,
        wall_time=time.perf_counter() - t0,
    )
    return psi, report


ORACLE_SIZE_CAP = 4096


def exact_evolve_oracle(
    psi0: WaveFunctionN,
    t: float,
    spec: PotentialSpec,
    partition=None,
) -> WaveFunctionN:
    """Machine-precision reference propagation via dense eigendecomposition.

    Builds the M^N x M^N Hamiltonian (Fourier kinetic plus the interaction
    diagonal, full mode or a fixed partition) and applies exp(-i t H / hbar)
    exactly.  Limited to M^N <= 4096.
    """
    g = psi0.grid
    N = psi0.N
    D = g.M**N
    if D > ORACLE_SIZE_CAP:
        raise MemoryError(f"dense oracle needs M^N <= {ORACLE_SIZE_CAP}, got {D}")
    eye = np.eye(g.M)
    F = sfft.fft(eye, axis=0)
    K1 = sfft.ifft((g.xi_fft**2 / 2.0)[:, None] * F, axis=0)
    K1 = 0.5 * (K1 + K1.conj().T)
    H = np.zeros((D, D), dtype=complex)
    for m in range(N):
        ops = [eye] * N
        ops[m] = K1
        term = ops[0]
        for op in ops[1:]:
            term = np.kron(term, op)
        H += term
    mode = "full" if partition is None else partition
    diag, _ = interaction_diagonal(spec, g, N, mode=mode)
    H[np.diag_indices(D)] += diag.ravel()
    evals, vecs = np.linalg.eigh(H)
    coeffs = vecs.conj().T @ psi0.amps.ravel()
    coeffs *= np.exp(-1j * t * evals / g.hbar)
    amps = (vecs @ coeffs).reshape((g.M,) * N)
    return WaveFunctionN(amps, g, N)


def save_state(psi: WaveFunctionN, path) -> None:
    write_container(path, MAGIC_STATE, psi.amps, psi.grid)


def load_state(path) -> WaveFunctionN:
    data, grid = read_container(path, expect_magic=MAGIC_STATE)
    return WaveFunctionN(amps=data, grid=grid, N=data.ndim)
