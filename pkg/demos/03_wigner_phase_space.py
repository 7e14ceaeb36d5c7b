"""Wigner functions: coherent-state Gaussian, quantum negativity, dual metrics.

Transforms single-particle density matrices to phase space, reproduces the
closed-form coherent-state Wigner function, exhibits negativity for the first
excited oscillator state, and evaluates the dictionary-based lower bounds for
the dual norm and the commutator-constrained metric.

Run:  python demos/03_wigner_phase_space.py
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from rbqdyn import DensityMatrix1, default_dictionary, dhbar_lower_bound, dual_norm_lower_bound, make_grid, wigner

g = make_grid(16.0, 64, 0.5)


def pure(f):
    f = f / (np.linalg.norm(f) * g.dx**0.5)
    return DensityMatrix1(np.outer(f, f.conj()), g)


coherent = pure(np.exp(-g.x**2 / (2 * g.hbar)).astype(complex))
excited = pure((g.x * np.exp(-g.x**2 / (2 * g.hbar))).astype(complex))

W0 = wigner(coherent, g)
W1 = wigner(excited, g)
exact = (1 / (np.pi * g.hbar)) * np.exp(-(g.x[:, None] ** 2 + g.xi[None, :] ** 2) / g.hbar)

print(f"coherent state: sup|W - analytic| = {np.max(np.abs(W0.values - exact)):.2e}")
print(f"mass  = {W0.mass():.12f} (trace identity)")
print(f"purity = {W0.purity():.12f} (pure state)")
print(f"excited state: min W = {W1.values.min():.4f}  "
      f"(analytic at origin: {-1 / (np.pi * g.hbar):.4f})")

# --- phase-space metrics on the pair of states --------------------------------
dictionary = default_dictionary(g, order=3, n_plane=21, n_bump=8)
diff = wigner(coherent, g)
diff.values = W0.values - W1.values
dual = dual_norm_lower_bound(diff, 3, dictionary)
dhb = dhbar_lower_bound(coherent, excited, dictionary)
print(f"dual-norm lower bound of W difference: {dual:.4f}")
print(f"commutator-metric lower bound:          {dhb:.4f}")
print(f"empirical dual/metric ratio:            {dual / dhb:.2f}")

fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
for ax, W, title in ((axes[0], W0, "coherent state"), (axes[1], W1, "first excited state")):
    vmax = np.abs(W.values).max()
    im = ax.pcolormesh(g.x, g.xi, W.values.T, cmap="RdBu_r", vmin=-vmax, vmax=vmax)
    ax.set_xlim(-4, 4)
    ax.set_ylim(-3, 3)
    ax.set_xlabel("x")
    ax.set_title(title)
    fig.colorbar(im, ax=ax)
axes[0].set_ylabel(r"$\xi$")
fig.tight_layout()
fig.savefig("demos/03_wigner_phase_space.png", dpi=120)
print("wrote demos/03_wigner_phase_space.png")
