"""Miniature random-batch convergence study (small K; minutes of runtime).

Runs the full pipeline at reduced ensemble size: exact N=4 dynamics as the
reference, random-batch realizations per reshuffling step dt, ensemble-mean
reduced density, trace-distance and Wigner dual-norm errors, and the
closed-form bound for comparison.  The headline acceptance experiment is the
same thing at K=200 (see tests/test_acceptance.py or `rbqdyn converge`).

Run:  python demos/04_rbm_convergence.py
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from rbqdyn import RunConfig, run_convergence_sweep

cfg = RunConfig(K=24, dt_list=[0.25, 0.125, 0.0625], output_dir="demos/rbm_convergence")
res = run_convergence_sweep(cfg)
res.write(cfg.output_dir)

print(f"substep density after refinement check: {res.substep_density}/unit")
print(f"{'dt':>8} {'trace dist':>12} {'std err':>10} {'dual norm lb':>13} "
      f"{'theorem rhs':>12} {'naive rhs':>10}")
for r in res.rows:
    print(f"{r.dt:8.4f} {r.trace_dist:12.6f} {r.trace_dist_se:10.6f} "
          f"{r.wigner_dual_lb:13.6f} {r.theorem_rhs:12.2f} {r.naive_trace_rhs:10.2f}")
print(f"fitted slope (expect ~1 at O(dt)): {res.slope:.3f}")
print(f"outputs written to {cfg.output_dir}/")

dts = [r.dt for r in res.rows]
fig, ax = plt.subplots(figsize=(5.5, 4))
ax.errorbar(dts, [r.trace_dist for r in res.rows],
            yerr=[r.trace_dist_se for r in res.rows], fmt="o-", label="trace distance")
ax.loglog(dts, [r.wigner_dual_lb for r in res.rows], "s-", label="dual-norm lower bound")
ref = res.rows[-1].trace_dist
ax.loglog(dts, [ref * d / dts[-1] for d in dts], "--", color="gray", label=r"$\propto \Delta t$")
ax.set_xlabel(r"$\Delta t$")
ax.set_ylabel("ensemble-bias error at t=1")
ax.legend()
fig.tight_layout()
fig.savefig("demos/04_rbm_convergence.png", dpi=120)
print("wrote demos/04_rbm_convergence.png")
