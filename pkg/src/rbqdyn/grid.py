"""Periodic one-dimensional grid, elementary operators, and Weyl quantization.

Everything downstream (potentials, propagators, reduced densities, phase-space
transforms) shares the discretization defined here: M equispaced points on the
torus [-L/2, L/2) with conjugate momenta xi_k = 2*pi*hbar*k/L for
k = -M/2 .. M/2-1.

Operators are stored as position-basis kernels a(x_i, x_j) carrying the
quadrature weight dx: an operator acts on samples as (A psi)_i = dx * sum_j
a(x_i, x_j) psi_j, and trace(A) = dx * sum_i a(x_i, x_i).  This keeps the
discrete formulas literal transcriptions of the continuum kernel calculus.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

HERMITIAN_TOL = 1e-12


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Shared discretization of one particle's configuration space.

    Attributes
    ----------
    L : float
        Domain length; positions live on [-L/2, L/2).
    M : int
        Number of grid points, a power of two >= 8.
    hbar : float
        Dimensionless action constant entering the momentum grid and all
        propagators.
    """

    L: float
    M: int
    hbar: float

    @property
    def dx(self) -> float:
        return self.L / self.M

    @property
    def dxi(self) -> float:
        return 2.0 * np.pi * self.hbar / self.L

    @property
    def x(self) -> np.ndarray:
        """Position samples x_j = -L/2 + j*dx, j = 0..M-1."""
        return -0.5 * self.L + self.dx * np.arange(self.M)

    @property
    def xi(self) -> np.ndarray:
        """Momentum samples 2*pi*hbar*k/L for k = -M/2..M/2-1 (centered order)."""
        return self.dxi * np.arange(-self.M // 2, self.M // 2)

    @property
    def xi_fft(self) -> np.ndarray:
        """Momentum samples in FFT layout, aligned with scipy.fft conventions."""
        return sfft.ifftshift(self.xi)

    def weighted_norm(self, amps: np.ndarray) -> float:
        """dx^(n_axes/2)-weighted 2-norm of an amplitude tensor on this grid."""
        n_axes = amps.ndim
        return float(np.linalg.norm(amps.ravel()) * self.dx ** (n_axes / 2.0))


def make_grid(L: float, M: int, hbar: float) -> GridSpec:
    """Build a GridSpec, rejecting non-power-of-two M and nonpositive L, hbar."""
    if not isinstance(M, (int, np.integer)) or not _is_power_of_two(int(M)) or M < 8:
        raise ValueError(f"M must be a power of two >= 8, got {M!r}")
    if L <= 0:
        raise ValueError(f"L must be positive, got {L!r}")
    if hbar <= 0:
        raise ValueError(f"hbar must be positive, got {hbar!r}")
    return GridSpec(L=float(L), M=int(M), hbar=float(hbar))


@dataclass
class OperatorMatrix:
    """One-particle operator as a position-basis kernel with dx quadrature weight.

    entries[i, j] samples the kernel a(x_i, x_j); see the module docstring for
    the action and trace conventions.  The `hermitian` flag is advisory and is
    checked at construction time when set.
    """

    entries: np.ndarray
    grid: GridSpec
    hermitian: bool = False

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=complex)
        M = self.grid.M
        if self.entries.shape != (M, M):
            raise ValueError(f"operator entries must be {(M, M)}, got {self.entries.shape}")
        if self.hermitian and self.hermiticity_defect() > HERMITIAN_TOL:
            raise ValueError(
                f"hermitian flag set but max|A - A^dag| = {self.hermiticity_defect():.3e}"
            )

    @property
    def matrix(self) -> np.ndarray:
        """dx * entries: the plain matrix acting on sample vectors."""
        return self.entries * self.grid.dx

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix @ vec

    def trace(self) -> complex:
        return complex(self.grid.dx * np.trace(self.entries))

    def op_norm(self) -> float:
        """Operator 2-norm with respect to the dx-weighted inner product."""
        return float(np.linalg.norm(self.matrix, ord=2))

    def adjoint(self) -> "OperatorMatrix":
        return OperatorMatrix(self.entries.conj().T, self.grid, hermitian=self.hermitian)

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if other.grid != self.grid:
            raise ValueError("operator composition requires a shared grid")
        return OperatorMatrix(self.grid.dx * (self.entries @ other.entries), self.grid)

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.entries + other.entries, self.grid)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.entries - other.entries, self.grid)

    def __mul__(self, c: complex) -> "OperatorMatrix":
        return OperatorMatrix(self.entries * c, self.grid)

    __rmul__ = __mul__

    def commutator(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return self @ other - other @ self


def identity_operator(g: GridSpec) -> OperatorMatrix:
    return OperatorMatrix(np.eye(g.M) / g.dx, g, hermitian=True)


def multiplication_operator(f: np.ndarray, g: GridSpec) -> OperatorMatrix:
    """Operator multiplying by the grid function f (kernel f(x) delta(x-y))."""
    f = np.asarray(f)
    if f.shape != (g.M,):
        raise ValueError(f"grid function must have shape ({g.M},), got {f.shape}")
    return OperatorMatrix(np.diag(f.astype(complex)) / g.dx, g,
                          hermitian=bool(np.isrealobj(f) or np.allclose(f.imag, 0)))


def position_operator(g: GridSpec) -> OperatorMatrix:
    """Multiplication by the (minimal-image) coordinate x in [-L/2, L/2)."""
    return multiplication_operator(g.x, g)


def momentum_operator(g: GridSpec) -> OperatorMatrix:
    """-i*hbar*d/dx realized through the discrete Fourier transform."""
    F = sfft.fft(np.eye(g.M), axis=0)
    ent = sfft.ifft(g.xi_fft[:, None] * F, axis=0) / g.dx
    ent = 0.5 * (ent + ent.conj().T)  # kill roundoff asymmetry
    return OperatorMatrix(ent, g, hermitian=True)


# ---------------------------------------------------------------------------
# Band-limited resampling and the rotated-diagonal bookkeeping shared by the
# Wigner transform (wigner module) and its trace-pairing adjoint below.
# ---------------------------------------------------------------------------

def _pad_spectrum(c: np.ndarray, axis: int) -> np.ndarray:
    """Zero-pad an FFT-layout spectrum from M to 2M modes, splitting Nyquist."""
    M = c.shape[axis]
    h = M // 2
    sl = [slice(None)] * c.ndim

    shape = list(c.shape)
    shape[axis] = 2 * M
    out = np.zeros(shape, dtype=complex)

    def put(dst, src):
        sl_d = list(sl)
        sl_d[axis] = dst
        sl_s = list(sl)
        sl_s[axis] = src
        out[tuple(sl_d)] = c[tuple(sl_s)]

    put(slice(0, h), slice(0, h))
    put(slice(2 * M - h + 1, 2 * M), slice(h + 1, M))
    # split the Nyquist coefficient symmetrically between +M/2 and -M/2
    sl_n = list(sl)
    sl_n[axis] = h
    nyq = c[tuple(sl_n)] * 0.5
    for dst in (h, 2 * M - h):
        sl_d = list(sl)
        sl_d[axis] = dst
        out[tuple(sl_d)] = nyq
    return out


def _crop_spectrum(c: np.ndarray, axis: int) -> np.ndarray:
    """Adjoint of _pad_spectrum: crop 2M modes to M, merging the Nyquist pair."""
    M2 = c.shape[axis]
    M = M2 // 2
    h = M // 2
    sl = [slice(None)] * c.ndim

    def take(src):
        s = list(sl)
        s[axis] = src
        return c[tuple(s)]

    shape = list(c.shape)
    shape[axis] = M
    out = np.zeros(shape, dtype=complex)

    def put(dst, val):
        s = list(sl)
        s[axis] = dst
        out[tuple(s)] = val

    put(slice(0, h), take(slice(0, h)))
    put(slice(h + 1, M), take(slice(2 * M - h + 1, 2 * M)))
    put(h, 0.5 * (take(h) + take(2 * M - h)))
    return out


def upsample2(kernel: np.ndarray) -> np.ndarray:
    """Band-limited interpolation of an M x M kernel onto the 2M x 2M half-grid.

    Exact for kernels whose two-sided spectrum lies inside the grid band; the
    half-grid carries positions -L/2 + p*dx/2, p = 0..2M-1.
    """
    c = sfft.fft2(kernel)
    c = _pad_spectrum(c, 0)
    c = _pad_spectrum(c, 1)
    return sfft.ifft2(c) * 4.0


def upsample2_adjoint(fine: np.ndarray) -> np.ndarray:
    """Frobenius adjoint of upsample2 (maps 2M x 2M back to M x M)."""
    c = sfft.fft2(fine)
    c = _crop_spectrum(c, 0)
    c = _crop_spectrum(c, 1)
    return sfft.ifft2(c)


def rotated_diagonal_indices(M: int) -> tuple[np.ndarray, np.ndarray]:
    """Fine-grid indices of s(x_j + n*dx/2, x_j - n*dx/2).

    Returns (U, V) of shape (M, M+1) with n = -M/2..+M/2 along the second
    axis, so U[j, n_idx] = (2j + n) mod 2M and V[j, n_idx] = (2j - n) mod 2M.
    """
    j = np.arange(M)[:, None]
    n = np.arange(-M // 2, M // 2 + 1)[None, :]
    return (2 * j + n) % (2 * M), (2 * j - n) % (2 * M)


def gather_rotated(fine: np.ndarray, M: int) -> np.ndarray:
    """Extract the centered rotated-diagonal table G[j, n], n = -M/2..M/2-1.

    The two half-weighted endpoints n = +-M/2 are folded into the single
    n = -M/2 slot, which keeps the table conjugate-symmetric in n for
    Hermitian kernels (so the Wigner values come out real).
    """
    U, V = rotated_diagonal_indices(M)
    G_ext = fine[U, V]
    G = np.empty((M, M), dtype=complex)
    G[:, 1:] = G_ext[:, 1:M]
    G[:, 0] = 0.5 * (G_ext[:, 0] + G_ext[:, M])
    return G


def scatter_rotated(G: np.ndarray, M: int) -> np.ndarray:
    """Adjoint of gather_rotated: accumulate G[j, n] back onto the fine grid."""
    U, V = rotated_diagonal_indices(M)
    H_ext = np.empty((M, M + 1), dtype=complex)
    H_ext[:, 1:M] = G[:, 1:]
    H_ext[:, 0] = 0.5 * G[:, 0]
    H_ext[:, M] = 0.5 * G[:, 0]
    fine = np.zeros((2 * M, 2 * M), dtype=complex)
    np.add.at(fine, (U, V), H_ext)
    return fine


def centered_fft(a: np.ndarray, axis: int = -1) -> np.ndarray:
    """DFT with both input index and output frequency in centered order."""
    return sfft.fftshift(sfft.fft(sfft.ifftshift(a, axes=axis), axis=axis), axes=axis)


def centered_ifft_adjoint(a: np.ndarray, axis: int = -1) -> np.ndarray:
    """Adjoint of centered_fft: M times the centered inverse DFT."""
    M = a.shape[axis]
    return M * sfft.fftshift(sfft.ifft(sfft.ifftshift(a, axes=axis), axis=axis), axes=axis)


def weyl_quantize(a: np.ndarray, g: GridSpec) -> OperatorMatrix:
    """Discrete Weyl operator of a phase-space symbol sampled on the (x, xi) grid.

    Constructed as the exact trace-pairing adjoint of the Wigner transform:
    for every density kernel rho on the grid,

        trace(rho * weyl_quantize(a)) = dx*dxi * sum W[rho] * conj(a),

    which is the discrete counterpart of the continuum duality formula.  The
    identity holds to machine precision by construction; real symbols yield
    Hermitian operators.

    Parameters
    ----------
    a : array (M, M)
        Symbol samples a(x_j, xi_k) with x along axis 0 and xi (centered
        order) along axis 1; must be periodic in x.
    """
    a = np.asarray(a, dtype=complex)
    M = g.M
    if a.shape != (M, M):
        raise ValueError(f"symbol must be sampled on the full {(M, M)} phase grid, "
                         f"got {a.shape}")
    dy = g.dx / g.hbar
    # Adjoint of W = (dy/2pi) * CDFT_n  o  gather  o  upsample, weighted dx*dxi.
    H = (dy / (2.0 * np.pi)) * centered_ifft_adjoint(a, axis=1)
    fine = scatter_rotated(H, M)
    B = (g.dx * g.dxi) * upsample2_adjoint(fine)
    entries = B.conj().T / g.dx ** 2
    is_real = bool(np.max(np.abs(a.imag)) == 0.0)
    op = OperatorMatrix(entries, g)
    if is_real and op.hermiticity_defect() <= 1e-10:
        op.hermitian = True
    return op
