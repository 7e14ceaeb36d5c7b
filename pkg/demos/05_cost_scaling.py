"""Interaction-evaluation cost: the N(N-1)/2 -> N/2 reduction and O(N) shuffling.

Run:  python demos/05_cost_scaling.py
"""

from rbqdyn import RunConfig, run_cost_bench

report = run_cost_bench(RunConfig())

print(f"{'N':>4} {'full pairs':>11} {'batch pairs':>12} {'ratio':>9}  1/(N-1)")
for row in report["counts"]:
    print(f"{row['N']:>4} {row['pairs_full']:>11} {row['pairs_rb']:>12} "
          f"{row['ratio']:>9.4f}  {1 / (row['N'] - 1):.4f}")

print("\nreshuffle timing (Durstenfeld swap, one long-lived stream):")
for n, t in zip(report["shuffle_Ns"], report["shuffle_seconds"]):
    print(f"  N={n:>5}: {t * 1e6:8.2f} us per shuffle")
print(f"fitted scaling exponent: {report['shuffle_exponent']:.3f} (linear cost => ~1)")
