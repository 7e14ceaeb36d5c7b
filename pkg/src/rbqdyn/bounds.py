"""Closed-form error bounds and the commutator inequality they rest on.

theorem_rhs evaluates the convergence-theorem right-hand side, which involves
neither N nor hbar; naive_trace_rhs evaluates the trace-norm estimate one gets
without the commutator machinery, growing like N^2/hbar^2.  The inequality
||[f, T]|| <= Lambda(f) * ||[x, T]|| is a theorem on the discrete torus for
band-limited f (the modulation-path argument goes through verbatim with
x = diag(x_j)), so the randomized check treats any violation as a hard error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .grid import GridSpec, OperatorMatrix, multiplication_operator, position_operator


@dataclass(frozen=True)
class BoundInputs:
    """Inputs of the closed-form bounds; dconf is fixed to 1."""

    t: float
    dt: float
    Lambda: float
    Lconst: float
    gamma_d: float = 1.0
    N: int = 2
    hbar: float = 1.0
    sup_norm: float = 0.0
    dconf: int = 1

    def __post_init__(self):
        vals = (self.t, self.dt, self.Lambda, self.Lconst, self.gamma_d, self.hbar,
                self.sup_norm)
        if any(v < 0 for v in vals):
            raise ValueError("bound inputs must be nonnegative")
        if self.dconf != 1:
            raise ValueError("only configuration dimension 1 is supported")


def theorem_rhs(b: BoundInputs) -> float:
    """Wigner dual-norm bound: independent of N and hbar by construction.

    2*gamma_d*dt*exp(6t*max(1, sqrt(d)*L)) * Lambda
      * (2 + 3*t*Lambda*max(1, dt) + 4*sqrt(d)*L*t*dt),  d = 1.
    """
    sd = np.sqrt(float(b.dconf))
    return float(
        2.0
        * b.gamma_d
        * b.dt
        * np.exp(6.0 * b.t * max(1.0, sd * b.Lconst))
        * b.Lambda
        * (2.0 + 3.0 * b.t * b.Lambda * max(1.0, b.dt) + 4.0 * sd * b.Lconst * b.t * b.dt)
    )


def naive_trace_rhs(b: BoundInputs) -> float:
    """Trace-norm estimate (2N/hbar)*dt*||V||*(1 + N*t*||V||/hbar).

    Kept as the contrast exhibit: it degrades both as N grows and as hbar
    shrinks, unlike theorem_rhs.
    """
    v = b.sup_norm
    return float((2.0 * b.N / b.hbar) * b.dt * v * (1.0 + b.N * b.t * v / b.hbar))


def lambda_discrete(f: np.ndarray, g: GridSpec) -> float:
    """First Fourier moment of a grid function: sum_k |kappa_k| |c_k|.

    c_k are the discrete Fourier series coefficients of f on the torus and
    kappa_k = 2*pi*k/L the modulation frequencies; exact for grid functions.
    """
    f = np.asarray(f)
    if f.shape != (g.M,):
        raise ValueError(f"grid function must have shape ({g.M},)")
    coeffs = sfft.fftshift(sfft.fft(f)) / g.M
    kappa = (2.0 * np.pi / g.L) * np.arange(-g.M // 2, g.M - g.M // 2)
    return float(np.sum(np.abs(kappa) * np.abs(coeffs)))


def commutator_lemma_check(
    f: np.ndarray,
    T: OperatorMatrix,
    g: GridSpec,
) -> tuple[float, float, bool]:
    """Check ||[f, T]|| <= Lambda(f) * ||[x, T]|| on the grid.

    Returns (lhs, rhs, holds) with holds = lhs <= rhs * (1 + 1e-8).
    f must be real (complex f is rejected; the inequality needs a self-adjoint
    multiplication operator on the left only through Lambda, but the spec'd
    check is for real potential-like functions).
    """
    f = np.asarray(f)
    if np.iscomplexobj(f) and np.max(np.abs(f.imag)) > 0:
        raise ValueError("f must be real-valued")
    f = f.real.astype(float)
    F = multiplication_operator(f, g)
    X = position_operator(g)
    lhs = F.commutator(T).op_norm()
    rhs = lambda_discrete(f, g) * X.commutator(T).op_norm()
    return lhs, rhs, bool(lhs <= rhs * (1.0 + 1e-8))
