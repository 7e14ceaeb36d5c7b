"""Single-particle reduced density matrices and ensemble averaging.

Reduction from the N-particle amplitude tensor is a single tensor contraction
(never the M^N x M^N density matrix).  The label-averaged variant handles the
random-batch dynamics, whose piecewise Hamiltonian breaks exchange symmetry.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import GridSpec

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_TOL = -1e-9


@dataclass
class DensityMatrix1:
    """Reduced one-particle density as a kernel r(x_i, x_j) with dx-weighted trace."""

    kernel: np.ndarray
    grid: GridSpec

    def __post_init__(self):
        M = self.grid.M
        if self.kernel.shape != (M, M):
            raise ValueError(f"kernel must be {(M, M)}, got {self.kernel.shape}")

    def trace(self) -> float:
        return float(np.real(self.grid.dx * np.trace(self.kernel)))

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.kernel - self.kernel.conj().T)))

    def eigenvalues(self) -> np.ndarray:
        """Operator eigenvalues (of the dx-weighted kernel), ascending."""
        return np.linalg.eigvalsh(self.grid.dx * self.kernel)

    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues()[0])

    def validate(self) -> dict:
        """Check the Hermiticity / unit-trace / positivity invariants.

        Returns the measured diagnostics; raises on violation.
        """
        diag = {
            "hermiticity_defect": self.hermiticity_defect(),
            "trace": self.trace(),
            "min_eigenvalue": self.min_eigenvalue(),
        }
        if diag["hermiticity_defect"] > HERMITICITY_TOL:
            raise ValueError(f"Hermiticity defect {diag['hermiticity_defect']:.3e}")
        if abs(diag["trace"] - 1.0) > TRACE_TOL:
            raise ValueError(f"trace deviates from 1 by {abs(diag['trace'] - 1.0):.3e}")
        if diag["min_eigenvalue"] < POSITIVITY_TOL:
            raise ValueError(f"negative eigenvalue {diag['min_eigenvalue']:.3e}")
        return diag


def reduce_one(psi, label: int) -> DensityMatrix1:
    """Partial trace onto particle `label` (0-based) of a pure N-particle state.

    kernel(x, y) = dx^(N-1) * sum over the other axes of
    psi(..., x at `label`, ...) * conj(psi(..., y at `label`, ...)).
    """
    N = psi.N
    if not 0 <= label < N:
        raise ValueError(f"label must be in 0..{N - 1}, got {label}")
    others = tuple(ax for ax in range(N) if ax != label)
    kernel = np.tensordot(psi.amps, psi.amps.conj(), axes=(others, others))
    kernel *= psi.grid.dx ** (N - 1)
    return DensityMatrix1(kernel=kernel, grid=psi.grid)


def reduce_one_symmetrized(psi) -> DensityMatrix1:
    """Label-averaged reduction (1/N) * sum_j reduce_one(psi, j)."""
    N = psi.N
    acc = reduce_one(psi, 0).kernel
    for j in range(1, N):
        acc += reduce_one(psi, j).kernel
    return DensityMatrix1(kernel=acc / N, grid=psi.grid)


@dataclass
class EnsembleAccumulator:
    """Running mean and per-entry variance over reshuffling realizations.

    Entries are fed in realization-index order so ensemble results do not
    depend on worker scheduling.
    """

    grid: GridSpec
    count: int = 0
    mean: np.ndarray = None
    _m2: np.ndarray = None

    def __post_init__(self):
        M = self.grid.M
        if self.mean is None:
            self.mean = np.zeros((M, M), dtype=complex)
        if self._m2 is None:
            self._m2 = np.zeros((M, M))

    def mean_density(self) -> DensityMatrix1:
        if self.count == 0:
            raise ValueError("no realizations accumulated")
        return DensityMatrix1(kernel=self.mean.copy(), grid=self.grid)

    def entry_variance(self) -> np.ndarray:
        if self.count < 2:
            return np.zeros_like(self._m2)
        return self._m2 / (self.count - 1)

    def entry_standard_error(self) -> np.ndarray:
        return np.sqrt(self.entry_variance() / max(self.count, 1))


def ensemble_mean(acc: EnsembleAccumulator, rho: DensityMatrix1) -> EnsembleAccumulator:
    """Fold one realization into the accumulator (Welford update); returns it."""
    if rho.grid != acc.grid:
        raise ValueError("realization grid differs from accumulator grid")
    acc.count += 1
    delta = rho.kernel - acc.mean
    acc.mean = acc.mean + delta / acc.count
    acc._m2 = acc._m2 + np.real(delta.conj() * (rho.kernel - acc.mean))
    return acc


def trace_distance(rho: DensityMatrix1, sigma: DensityMatrix1) -> float:
    """Trace norm ||rho - sigma||_1: sum of |eigenvalues| of the difference."""
    if rho.grid != sigma.grid:
        raise ValueError("states live on different grids")
    diff = rho.grid.dx * (rho.kernel - sigma.kernel)
    diff = 0.5 * (diff + diff.conj().T)
    return float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def save_density(rho: DensityMatrix1, path) -> None:
    """Write the kernel as a two-axis state container plus a JSON sidecar.

    The sidecar (path + '.json') records trace, minimum eigenvalue, and the
    Hermiticity defect for quick integrity checks without reloading the kernel.
    """
    import json

    from .container import MAGIC_STATE, write_container

    write_container(path, MAGIC_STATE, rho.kernel, rho.grid)
    sidecar = {
        "trace": rho.trace(),
        "min_eigenvalue": rho.min_eigenvalue(),
        "hermiticity_defect": rho.hermiticity_defect(),
    }
    with open(str(path) + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2)
        fh.write("\n")


def load_density(path) -> DensityMatrix1:
    from .container import MAGIC_STATE, read_container

    data, grid = read_container(path, expect_magic=MAGIC_STATE)
    if data.ndim != 2:
        raise ValueError(f"bad container field 'N': density kernels need N=2, got {data.ndim}")
    return DensityMatrix1(kernel=data, grid=grid)
