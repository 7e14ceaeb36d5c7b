import numpy as np
import pytest
import scipy.fft as sfft

from rbqdyn.grid import (
    GridSpec,
    OperatorMatrix,
    centered_fft,
    gather_rotated,
    identity_operator,
    make_grid,
    momentum_operator,
    multiplication_operator,
    position_operator,
    upsample2,
    upsample2_adjoint,
    weyl_quantize,
)


def test_make_grid_spacings():
    g = make_grid(16.0, 32, 0.5)
    assert g.dx == 0.5
    assert g.dxi == pytest.approx(2 * np.pi * 0.5 / 16.0, rel=1e-15)
    assert g.dx * g.M == g.L


def test_make_grid_small_example():
    g = make_grid(2.0, 8, 1.0)
    assert np.allclose(g.x, [-1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75])


def test_make_grid_rejects_bad_inputs():
    with pytest.raises(ValueError):
        make_grid(16.0, 33, 1.0)
    with pytest.raises(ValueError):
        make_grid(16.0, 4, 1.0)  # power of two but below the minimum
    with pytest.raises(ValueError):
        make_grid(-1.0, 32, 1.0)
    with pytest.raises(ValueError):
        make_grid(16.0, 32, 0.0)


def test_grid_point_counts_and_symmetry():
    g = make_grid(10.0, 16, 0.7)
    assert len(g.x) == g.M and len(g.xi) == g.M
    # momentum grid symmetric apart from the single Nyquist point
    assert np.allclose(g.xi[1:], -g.xi[1:][::-1])
    assert g.xi[0] == -(g.xi[-1] + g.dxi)  # lone Nyquist at index 0


def test_operator_hermitian_flag_checked():
    g = make_grid(8.0, 8, 1.0)
    bad = np.triu(np.ones((8, 8)))
    with pytest.raises(ValueError):
        OperatorMatrix(bad, g, hermitian=True)


def test_operator_algebra_basics():
    g = make_grid(8.0, 16, 1.0)
    I = identity_operator(g)
    assert I.trace() == pytest.approx(16)
    assert I.op_norm() == pytest.approx(1.0)
    phi = np.exp(-g.x**2)
    phi = phi / (np.linalg.norm(phi) * g.dx**0.5)
    proj = OperatorMatrix(np.outer(phi, phi.conj()), g, hermitian=True)
    assert proj.trace() == pytest.approx(1.0)
    assert (proj @ proj).trace() == pytest.approx(1.0)


def test_canonical_commutator_on_packet():
    # [x, p] psi = i hbar psi away from the torus seam
    g = make_grid(16.0, 64, 0.5)
    X, P = position_operator(g), momentum_operator(g)
    C = X.commutator(P)
    phi = np.exp(-g.x**2 / (2 * 0.7**2)).astype(complex)
    phi /= np.linalg.norm(phi) * g.dx**0.5
    out = C.apply(phi)
    assert np.max(np.abs(out - 1j * g.hbar * phi)) < 1e-10


def test_upsample_is_exact_interpolation():
    g = make_grid(16.0, 32, 1.0)
    rng = np.random.default_rng(3)
    k = rng.standard_normal((32, 32)) + 1j * rng.standard_normal((32, 32))
    fine = upsample2(k)
    # original samples sit at even fine indices
    assert np.allclose(fine[::2, ::2], k, atol=1e-12)


def test_upsample_adjoint_identity():
    rng = np.random.default_rng(4)
    a = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    b = rng.standard_normal((32, 32)) + 1j * rng.standard_normal((32, 32))
    lhs = np.vdot(b, upsample2(a))
    rhs = np.vdot(upsample2_adjoint(b), a)
    assert abs(lhs - rhs) < 1e-12 * abs(lhs)


def test_weyl_constant_symbol_gives_identity():
    g = make_grid(16.0, 32, 0.5)
    op = weyl_quantize(np.ones((32, 32)), g)
    assert np.max(np.abs(op.entries - np.eye(32) / g.dx)) < 1e-12


def test_weyl_position_symbol_gives_multiplication():
    g = make_grid(16.0, 32, 0.5)
    a = np.broadcast_to(g.x[:, None], (32, 32)).copy()
    op = weyl_quantize(a, g)
    assert np.max(np.abs(op.entries - np.diag(g.x) / g.dx)) < 1e-12


def test_weyl_momentum_symbol_matches_fft_momentum():
    # agreement holds modulo the lone doubly-Nyquist Fourier mode, where the
    # sawtooth symbol xi is genuinely ambiguous on an even grid
    g = make_grid(16.0, 32, 0.5)
    a = np.broadcast_to(g.xi[None, :], (32, 32)).copy()
    D = weyl_quantize(a, g).entries - momentum_operator(g).entries
    Dhat = sfft.fft2(D)
    Dhat[g.M // 2, g.M // 2] = 0.0  # remove the (Nyquist, Nyquist) component
    assert np.max(np.abs(sfft.ifft2(Dhat))) < 1e-12
    # and the two act identically on band-resolved states
    phi = np.exp(-g.x**2 / 2.0).astype(complex)
    phi /= np.linalg.norm(phi) * g.dx**0.5
    resid = (weyl_quantize(a, g).matrix - momentum_operator(g).matrix) @ phi
    assert np.linalg.norm(resid) * g.dx**0.5 < 1e-8


def test_weyl_shape_mismatch_rejected():
    g = make_grid(16.0, 32, 0.5)
    with pytest.raises(ValueError):
        weyl_quantize(np.ones((16, 16)), g)


def _complex_wigner(kernel, g):
    fine = upsample2(kernel)
    G = gather_rotated(fine, g.M)
    return (g.dx / g.hbar / (2 * np.pi)) * centered_fft(G, axis=1)


def test_weyl_adjointness_random_pairs():
    g = make_grid(16.0, 32, 0.5)
    rng = np.random.default_rng(11)
    for _ in range(10):
        A = rng.standard_normal((32, 32)) + 1j * rng.standard_normal((32, 32))
        kern = A @ A.conj().T
        kern /= np.real(g.dx * np.trace(kern))
        a = rng.standard_normal((32, 32)) + 1j * rng.standard_normal((32, 32))
        op = weyl_quantize(a, g)
        lhs = g.dx**2 * np.sum(kern.T * op.entries)
        rhs = g.dx * g.dxi * np.sum(_complex_wigner(kern, g) * np.conj(a))
        assert abs(lhs - rhs) <= 1e-8 * abs(rhs)


def test_weyl_real_symbols_hermitian():
    g = make_grid(12.0, 16, 1.0)
    rng = np.random.default_rng(12)
    for _ in range(10):
        op = weyl_quantize(rng.standard_normal((16, 16)), g)
        assert op.hermiticity_defect() <= 1e-10
