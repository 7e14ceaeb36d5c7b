"""Wigner transform of single-particle density matrices and phase-space metrics.

The transform follows the kernel formula W(x, .) = (1/2pi) * F_y[s(x + hbar*y/2,
x - hbar*y/2)] realized on the periodic grid: off-grid kernel arguments are
obtained by band-limited (Fourier) interpolation onto the half-grid, and the
y-integral becomes a centered DFT over the M-point grid conjugate to xi.  With
this discretization the phase-space mass dx*dxi*sum(W) reproduces the trace
exactly, and Hermitian kernels give real Wigner values up to roundoff.

The dual Sobolev-type norm and the commutator-constrained operator metric are
not computable exactly (they are suprema over infinite symbol classes); this
module reports certified lower bounds obtained from finite symbol dictionaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import hermite_e

from .grid import (
    GridSpec,
    OperatorMatrix,
    centered_fft,
    gather_rotated,
    momentum_operator,
    position_operator,
    upsample2,
    weyl_quantize,
)
from .density import DensityMatrix1


@dataclass
class WignerGrid:
    """Real phase-space table W(x_j, xi_k) on a shared GridSpec."""

    values: np.ndarray
    grid: GridSpec

    def __post_init__(self):
        M = self.grid.M
        if self.values.shape != (M, M):
            raise ValueError(f"Wigner table must be {(M, M)}, got {self.values.shape}")

    def mass(self) -> float:
        return float(self.grid.dx * self.grid.dxi * self.values.sum())

    def purity(self) -> float:
        """(2*pi*hbar) * dx*dxi * sum(W^2); equals trace(rho^2) for resolved states."""
        g = self.grid
        return float(2.0 * np.pi * g.hbar * g.dx * g.dxi * np.sum(self.values ** 2))

    def to_csv(self, path) -> None:
        """Write (x, xi, value) rows; columns documented in the header line."""
        g = self.grid
        X = np.repeat(g.x, g.M)
        XI = np.tile(g.xi, g.M)
        with open(path, "w", newline="") as fh:
            fh.write("x,xi,value\n")
            for x, xi, v in zip(X, XI, self.values.ravel()):
                fh.write(f"{x!r},{xi!r},{v!r}\n")

    def save(self, path) -> None:
        from .container import MAGIC_WIGNER, write_container

        write_container(path, MAGIC_WIGNER, self.values, self.grid)

    @classmethod
    def load(cls, path) -> "WignerGrid":
        from .container import MAGIC_WIGNER, read_container

        data, grid = read_container(path, expect_magic=MAGIC_WIGNER)
        if data.ndim != 2:
            raise ValueError(f"bad container field 'N': Wigner tables need N=2, got {data.ndim}")
        return cls(values=data, grid=grid)


IMAG_RESIDUE_TOL = 1e-10


def wigner(rho: DensityMatrix1, g: GridSpec) -> WignerGrid:
    """Wigner transform of a single-particle density matrix.

    Raises if the grids mismatch.  The imaginary residue left after the
    transform (nonzero only through band-limit truncation of the kernel) is
    checked against IMAG_RESIDUE_TOL before being discarded.
    """
    if rho.grid != g:
        raise ValueError("density matrix and target grid differ")
    M = g.M
    fine = upsample2(rho.kernel)
    G = gather_rotated(fine, M)
    dy = g.dx / g.hbar
    W = (dy / (2.0 * np.pi)) * centered_fft(G, axis=1)
    residue = float(np.max(np.abs(W.imag)))
    if residue > IMAG_RESIDUE_TOL:
        import warnings

        warnings.warn(
            f"Wigner imaginary residue {residue:.3e} exceeds {IMAG_RESIDUE_TOL:.0e}; "
            "state may not be resolved by the grid band limit",
            stacklevel=2,
        )
    return WignerGrid(values=W.real.copy(), grid=g)


def wigner_of_kernel(kernel: np.ndarray, g: GridSpec) -> WignerGrid:
    """Wigner transform of a raw (not necessarily unit-trace) Hermitian kernel."""
    M = g.M
    fine = upsample2(np.asarray(kernel, dtype=complex))
    G = gather_rotated(fine, M)
    dy = g.dx / g.hbar
    W = (dy / (2.0 * np.pi)) * centered_fft(G, axis=1)
    return WignerGrid(values=W.real.copy(), grid=g)


# ---------------------------------------------------------------------------
# Symbol dictionaries for the dual-norm and metric lower bounds
# ---------------------------------------------------------------------------

def _gaussian_derivative_sup(order: int) -> float:
    """sup_u |d^n/du^n exp(-u^2/2)| computed from the Hermite-He recursion.

    d^n/du^n e^{-u^2/2} = (-1)^n He_n(u) e^{-u^2/2}, whose critical points are
    the roots of He_{n+1}; the maximum over those roots is exact.
    """
    if order == 0:
        return 1.0
    roots = hermite_e.hermeroots([0.0] * (order + 1) + [1.0])
    vals = np.abs(hermite_e.hermeval(roots, [0.0] * order + [1.0])) * np.exp(
        -np.real(roots) ** 2 / 2.0
    )
    return float(np.max(vals))


@dataclass
class Symbol:
    """One normalized test symbol: samples plus its analytic normalization."""

    kind: str
    params: tuple
    normalization: float  # divisor applied so the derivative constraint is tight

    def sample(self, g: GridSpec) -> np.ndarray:
        x = g.x[:, None]
        xi = g.xi[None, :]
        if self.kind == "plane":
            k, eta = self.params
            return np.exp(1j * (k * x + eta * xi)) / self.normalization
        if self.kind == "bump":
            x0, xi0, sx, sxi = self.params
            return (
                np.exp(-((x - x0) ** 2) / (2 * sx**2) - ((xi - xi0) ** 2) / (2 * sxi**2))
                / self.normalization
            )
        raise ValueError(f"unknown symbol kind {self.kind!r}")


def _plane_wave_normalization(k: float, eta: float, order: int) -> float:
    best = 0.0
    for a in range(order + 1):
        for b in range(order + 1):
            if a + b == 0:
                continue
            best = max(best, abs(k) ** a * abs(eta) ** b)
    return best


def _bump_normalization(sx: float, sxi: float, order: int) -> float:
    sup = [_gaussian_derivative_sup(n) for n in range(order + 1)]
    best = 0.0
    for a in range(order + 1):
        for b in range(order + 1):
            if a + b == 0:
                continue
            best = max(best, sup[a] / sx**a * sup[b] / sxi**b)
    return best


@dataclass
class SymbolDictionary:
    """Finite family of phase-space test symbols with unit derivative budget.

    Every stored symbol a satisfies max_{|alpha|,|beta| <= order, |alpha|+|beta|>0}
    sup|d_x^alpha d_xi^beta a| <= 1 (with equality on the binding derivative),
    so pairings against it are admissible competitors in the dual norm.
    """

    order: int
    symbols: list[Symbol]
    _samples: dict = field(default_factory=dict, repr=False)

    def sampled(self, g: GridSpec) -> np.ndarray:
        """All symbols sampled on g, cached, shape (n_symbols, M, M)."""
        key = (g.L, g.M, g.hbar)
        if key not in self._samples:
            self._samples[key] = np.stack([s.sample(g) for s in self.symbols])
        return self._samples[key]

    def __len__(self) -> int:
        return len(self.symbols)


def default_dictionary(
    g: GridSpec,
    order: int = 3,
    n_plane: int = 21,
    n_bump: int = 8,
) -> SymbolDictionary:
    """Plane waves on a signed log-spaced (k, eta) lattice plus Gaussian bumps.

    n_plane is the number of lattice values per axis (an odd count gives
    (n_plane-1)/2 log-spaced magnitudes per sign plus the zero frequency);
    n_bump is the per-axis count of the bump-center lattice.
    """
    symbols: list[Symbol] = []

    def signed_log_lattice(vmax: float, count: int) -> np.ndarray:
        half = (count - 1) // 2
        if half == 0:
            return np.array([0.0])
        mags = np.geomspace(vmax / 10.0 ** (half / 3.0), vmax, half)
        return np.concatenate([-mags[::-1], [0.0], mags])

    kmax = np.pi / g.dx
    etamax = np.pi / g.dxi
    ks = signed_log_lattice(kmax, n_plane)
    etas = signed_log_lattice(etamax, n_plane)
    for k in ks:
        for eta in etas:
            if k == 0.0 and eta == 0.0:
                continue
            norm = _plane_wave_normalization(k, eta, order)
            symbols.append(Symbol("plane", (float(k), float(eta)), norm))

    if n_bump > 0:
        xi_lo, xi_hi = g.xi[0], g.xi[-1]
        sx = g.L / n_bump
        sxi = (xi_hi - xi_lo) / n_bump
        centers_x = np.linspace(-g.L / 2, g.L / 2, n_bump, endpoint=False) + g.L / (2 * n_bump)
        centers_xi = np.linspace(xi_lo, xi_hi, n_bump)
        norm = _bump_normalization(sx, sxi, order)
        for x0 in centers_x:
            for xi0 in centers_xi:
                symbols.append(Symbol("bump", (float(x0), float(xi0), sx, sxi), norm))

    return SymbolDictionary(order=order, symbols=symbols)


def dual_norm_lower_bound(w: WignerGrid, order: int, dictionary: SymbolDictionary) -> float:
    """Certified lower bound of the order-(-order) dual norm of a Wigner table.

    Returns max over dictionary symbols a of |dx*dxi*sum(w * conj(a))|.  The
    true dual norm is the supremum over all admissible symbols, so enlarging
    the dictionary can only increase the value.
    """
    if len(dictionary) == 0:
        raise ValueError("empty symbol dictionary")
    if dictionary.order != order:
        raise ValueError(
            f"dictionary was normalized for order {dictionary.order}, requested {order}"
        )
    g = w.grid
    samples = dictionary.sampled(g)
    pair = samples.reshape(len(dictionary), -1).conj() @ w.values.ravel()
    return float(np.max(np.abs(pair)) * g.dx * g.dxi)


def _constraint_budget(A: OperatorMatrix, g: GridSpec) -> float:
    """Left-hand side of the commutator constraint defining the operator metric.

    hbar*||[x,A]|| + hbar*||[hD,A]|| + ||[x,[x,A]]|| + ||[hD,[x,A]]||
    + ||[hD,[hD,A]]||, with actual discrete operator norms.
    """
    X = position_operator(g)
    P = momentum_operator(g)
    cxA = X.commutator(A)
    cpA = P.commutator(A)
    h = g.hbar
    return (
        h * cxA.op_norm()
        + h * cpA.op_norm()
        + X.commutator(cxA).op_norm()
        + P.commutator(cxA).op_norm()
        + P.commutator(cpA).op_norm()
    )


def dhbar_lower_bound(
    rho: DensityMatrix1,
    sigma: DensityMatrix1,
    dictionary: SymbolDictionary,
) -> float:
    """Certified lower bound of the commutator-constrained metric between states.

    Each dictionary symbol is Weyl-quantized, rescaled so that its commutator
    budget equals 5*hbar^2 exactly (the binding constraint), and paired against
    rho - sigma; the best admissible test operator found this way bounds the
    metric from below.
    """
    if rho.grid != sigma.grid:
        raise ValueError("states live on different grids")
    g = rho.grid
    budget = 5.0 * g.hbar**2
    delta = rho.kernel - sigma.kernel
    best = 0.0
    for sym in dictionary.symbols:
        A = weyl_quantize(sym.sample(g), g)
        c = _constraint_budget(A, g)
        if c <= 1e-14:
            # commutes with x and hD: a multiple of the identity, pairing ~ 0
            continue
        scale = budget / c
        val = abs(g.dx**2 * np.sum(delta.T * A.entries)) * scale
        best = max(best, val)
    return best
