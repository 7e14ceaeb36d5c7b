import warnings

import numpy as np
import pytest

import rbqdyn.propagator as prop
from rbqdyn.batching import BatchSchedule
from rbqdyn.density import reduce_one_symmetrized, trace_distance
from rbqdyn.grid import make_grid
from rbqdyn.potential import PotentialSpec, interaction_diagonal
from rbqdyn.propagator import (
    WaveFunctionN,
    evolve_full,
    evolve_rb,
    exact_evolve_oracle,
    gaussian_product_state,
    load_state,
    save_state,
    strang_step,
    symmetrize,
)

GAUSS = PotentialSpec("gaussian", amplitude=1.0, width=1.0)
ZERO = PotentialSpec("zero")


def _free_exact(psi, t):
    """Exact free evolution on the grid (Fourier multiplier)."""
    import scipy.fft as sfft

    g = psi.grid
    xi2 = g.xi_fft**2
    ks = xi2
    for _ in range(psi.N - 1):
        ks = ks[..., None] + xi2
    hat = sfft.fftn(psi.amps)
    hat *= np.exp(-1j * t * ks / (2 * g.hbar))
    return WaveFunctionN(sfft.ifftn(hat), g, psi.N)


def test_strang_step_free_is_exact():
    g = make_grid(16.0, 16, 0.5)
    psi = gaussian_product_state(g, [-1.0, 1.0], [0.7])
    diag = np.zeros((16, 16))
    out = strang_step(psi, diag, 0.3)
    exact = _free_exact(psi, 0.3)
    assert g.weighted_norm(out.amps - exact.amps) < 1e-14


def test_strang_step_norm_preserving():
    g = make_grid(16.0, 16, 0.5)
    psi = gaussian_product_state(g, [-1.0, 1.0], [0.7])
    diag, _ = interaction_diagonal(GAUSS, g, 2, mode="full")
    out = strang_step(psi, diag, 0.1)
    assert abs(out.norm() - 1.0) < 1e-13


def test_strang_step_shape_mismatch():
    g = make_grid(16.0, 16, 0.5)
    psi = gaussian_product_state(g, [-1.0, 1.0], [0.7])
    with pytest.raises(ValueError):
        strang_step(psi, np.zeros((8, 8)), 0.1)


def test_strang_local_error_third_order():
    g = make_grid(16.0, 16, 0.5)
    psi = gaussian_product_state(g, [-1.0, 1.0], [0.7])
    diag, _ = interaction_diagonal(GAUSS, g, 2, mode="full")
    errs = []
    for dtau in (0.2, 0.1, 0.05):
        stepped = strang_step(psi, diag, dtau)
        exact = exact_evolve_oracle(psi, dtau, GAUSS)
        errs.append(g.weighted_norm(stepped.amps - exact.amps))
    assert errs[0] / errs[1] == pytest.approx(8.0, rel=0.25)
    assert errs[1] / errs[2] == pytest.approx(8.0, rel=0.25)


def test_evolve_full_t0_identity():
    g = make_grid(16.0, 16, 0.5)
    psi = gaussian_product_state(g, [-1.0, 1.0], [0.7])
    out, rep = evolve_full(psi, 0.0, 64, GAUSS)
    assert out is psi and rep.pair_evaluations == 0


def test_free_gaussian_variance_law():
    # sigma_x^2(t) = s^2 + (hbar t / 2 s)^2 for a packet of density std s;
    # equivalently 2*Var(t) = (sigma^4 + hbar^2 t^2)/sigma^2 with sigma^2 = 2 s^2
    g = make_grid(32.0, 128, 0.5)
    s = 1.0
    psi = gaussian_product_state(g, [0.0], [s])
    out, _ = evolve_full(psi, 1.0, 64, ZERO)
    prob = np.abs(out.amps) ** 2 * g.dx
    var = float(np.sum(prob * g.x**2) - np.sum(prob * g.x) ** 2)
    sigma_sq = 2 * s**2
    expected = (sigma_sq**2 + g.hbar**2 * 1.0**2) / sigma_sq / 2.0
    assert abs(var - expected) < 1e-6


def test_energy_conservation_levels():
    # measured drift is O(dtau^2): ~3e-6 at the default density of 64/unit on
    # this setup, reaching 1e-8 only near 2048/unit (frozen from a refinement
    # study against the conserved-energy functional)
    import scipy.fft as sfft

    g = make_grid(16.0, 32, 0.5)
    psi0 = gaussian_product_state(g, [-1.0, 1.0], [0.7])
    diag, _ = interaction_diagonal(GAUSS, g, 2, mode="full")
    xi2 = g.xi_fft**2
    ks = xi2[:, None] + xi2[None, :]

    def energy(p):
        hat = sfft.fftn(p.amps, norm="ortho")
        ekin = float(np.sum(np.abs(hat) ** 2 * ks / 2) * g.dx**2)
        epot = float(np.sum(np.abs(p.amps) ** 2 * diag) * g.dx**2)
        return ekin + epot

    e0 = energy(psi0)
    p64, _ = evolve_full(psi0, 1.0, 64, GAUSS)
    assert abs(energy(p64) - e0) < 1e-5
    p2048, _ = evolve_full(psi0, 1.0, 2048, GAUSS)
    assert abs(energy(p2048) - e0) < 1e-8


def test_oracle_unitary_and_identity_at_t0():
    g = make_grid(16.0, 16, 0.5)
    psi = gaussian_product_state(g, [-1.0, 1.0], [0.7])
    out0 = exact_evolve_oracle(psi, 0.0, GAUSS)
    assert g.weighted_norm(out0.amps - psi.amps) < 1e-12
    out = exact_evolve_oracle(psi, 1.0, GAUSS)
    assert abs(out.norm() - 1.0) < 1e-13


def test_oracle_crosscheck_and_global_order():
    # frozen from the oracle study: the splitting error at 256 substeps/unit
    # is ~8e-7 on this configuration and scales as O(dtau^2)
    g = make_grid(16.0, 16, 0.5)
    psi = gaussian_product_state(g, [-1.0, 1.0], [0.7])
    ref = exact_evolve_oracle(psi, 1.0, GAUSS)
    e256 = g.weighted_norm(evolve_full(psi, 1.0, 256, GAUSS)[0].amps - ref.amps)
    e512 = g.weighted_norm(evolve_full(psi, 1.0, 512, GAUSS)[0].amps - ref.amps)
    assert e256 < 1e-6
    assert e256 / e512 == pytest.approx(4.0, rel=0.2)


def test_oracle_size_cap():
    # M^N = 16384 exceeds the 4096 cap (4096 itself is allowed)
    g = make_grid(16.0, 128, 0.5)
    psi = gaussian_product_state(g, [-1.0, 1.0], [0.7])
    with pytest.raises(MemoryError):
        exact_evolve_oracle(psi, 1.0, GAUSS)


def test_oracle_fixed_partition_matches_rb_hamiltonian():
    g = make_grid(16.0, 8, 0.5)
    psi = gaussian_product_state(g, [-1.5, -0.5, 0.5, 1.5], [0.5])
    sched = BatchSchedule(N=4, dt=10.0, seed=3)  # one partition for all of t
    part = sched.partition(0)
    rb, _ = evolve_rb(psi, 0.5, sched, substeps_per_step=2048, spec=GAUSS)
    oracle = exact_evolve_oracle(psi, 0.5, GAUSS, partition=part)
    assert g.weighted_norm(rb.amps - oracle.amps) < 1e-5


def test_rb_n2_equals_full_any_seed_dt():
    g = make_grid(16.0, 32, 0.5)
    psi = gaussian_product_state(g, [-1.0, 1.0], [0.7])
    full, _ = evolve_full(psi, 1.0, 64, GAUSS)
    for seed in (0, 1, 12345):
        for dt in (0.25, 0.125):
            sched = BatchSchedule(N=2, dt=dt, seed=seed)
            rb, _ = evolve_rb(psi, 1.0, sched, int(64 * dt), GAUSS)
            assert g.weighted_norm(rb.amps - full.amps) < 1e-12


def test_rb_free_potential_seed_independent():
    g = make_grid(16.0, 16, 0.5)
    psi = gaussian_product_state(g, [-1.0, 1.0], [0.7])
    exact = _free_exact(psi, 1.0)
    for seed in (4, 9):
        rb, _ = evolve_rb(psi, 1.0, BatchSchedule(N=2, dt=0.25, seed=seed), 8, ZERO)
        assert g.weighted_norm(rb.amps - exact.amps) < 1e-12


def test_rb_seeds_differ_but_stay_normalized():
    g = make_grid(16.0, 16, 0.5)
    psi = gaussian_product_state(g, [-1.8, -0.6, 0.6, 1.8], [0.5])
    a, _ = evolve_rb(psi, 1.0, BatchSchedule(N=4, dt=0.25, seed=1), 16, GAUSS)
    b, _ = evolve_rb(psi, 1.0, BatchSchedule(N=4, dt=0.25, seed=2), 16, GAUSS)
    assert a.fidelity(b) < 1.0 - 1e-6
    assert abs(a.norm() - 1.0) < 1e-12 and abs(b.norm() - 1.0) < 1e-12


def test_rb_partial_final_step():
    g = make_grid(16.0, 16, 0.5)
    psi = gaussian_product_state(g, [-1.0, 1.0], [0.7])
    sched = BatchSchedule(N=2, dt=0.4, seed=5)
    out, rep = evolve_rb(psi, 1.0, sched, substeps_per_step=16, spec=GAUSS)
    assert rep.steps == 3  # two whole steps plus the remainder
    assert abs(out.norm() - 1.0) < 1e-12


def test_exchange_symmetry_preserved_by_full_dynamics():
    g = make_grid(16.0, 16, 0.5)
    psi = symmetrize(gaussian_product_state(g, [-1.0, 1.0], [0.7]))
    out, _ = evolve_full(psi, 1.0, 64, GAUSS)
    swapped = np.transpose(out.amps, (1, 0))
    assert g.weighted_norm(out.amps - swapped) < 1e-10


def test_cost_law_pair_counts():
    g = make_grid(16.0, 8, 0.5)
    for N in (2, 4, 6):
        psi = gaussian_product_state(g, np.linspace(-2, 2, N), [0.5])
        full, rf = evolve_full(psi, 0.5, 16, GAUSS)
        sched = BatchSchedule(N=N, dt=0.25, seed=0)
        rb, rr = evolve_rb(psi, 0.5, sched, substeps_per_step=4, spec=GAUSS)
        # equal substep totals: 8 each
        assert rf.pair_evaluations == 8 * N * (N - 1) // 2
        assert rr.pair_evaluations == 8 * (N // 2)
        assert rr.pair_evaluations / rf.pair_evaluations == 1.0 / (N - 1)


def test_unitarity_per_unit_time():
    g = make_grid(16.0, 16, 0.5)
    psi = gaussian_product_state(g, [-1.8, -0.6, 0.6, 1.8], [0.5])
    out, _ = evolve_full(psi, 1.0, 64, GAUSS)
    assert abs(out.norm() - 1.0) <= 1e-12


def test_memory_cap_enforced(monkeypatch):
    monkeypatch.setattr(prop, "DEFAULT_AMP_CAP", 100)
    g = make_grid(16.0, 16, 0.5)
    with pytest.raises(MemoryError):
        WaveFunctionN(np.zeros((16, 16), dtype=complex), g, 2)


def test_boundary_mass_warning():
    g = make_grid(8.0, 32, 0.5)
    with pytest.warns(UserWarning, match="boundary"):
        gaussian_product_state(g, [3.9], [1.0])


def test_state_container_roundtrip(tmp_path):
    g = make_grid(16.0, 16, 0.5)
    psi = gaussian_product_state(g, [-1.0, 1.0], [0.7])
    path = tmp_path / "psi.rbq"
    save_state(psi, path)
    back = load_state(path)
    assert back.grid == g and back.N == 2
    assert np.array_equal(back.amps, psi.amps)
