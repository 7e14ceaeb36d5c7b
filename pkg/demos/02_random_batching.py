"""Random pair batching: schedules, the pairing indicator, and its statistics.

Shows the reshuffling machinery on its own: reproducible partition sequences,
the step-function indicator, exact exhaustive pair frequencies (1/(N-1)), and
Monte-Carlo agreement for larger N.

Run:  python demos/02_random_batching.py
"""

import sys

from rbqdyn import BatchSchedule, indicator, pair_frequency

# --- a reproducible schedule -------------------------------------------------
sched = BatchSchedule(N=6, dt=0.25, seed=2024, realization=0)
print("first five partitions (one per reshuffling step):")
sched.dump(sys.stdout, steps=5)

print("\nindicator T_t(0,1) over one step boundary:")
for t in (0.49, 0.50, 0.51):
    print(f"  t={t:4.2f}  step={sched.step_of(t)}  T={indicator(sched, t, 0, 1)}")

# --- exhaustive frequencies: every pair meets with probability 1/(N-1) -------
print("\nexhaustive pair frequencies, N=4 (24 permutations):")
for pair, freq in pair_frequency(4).items():
    print(f"  {pair}: {freq}  (= 1/3)")

# --- Monte-Carlo check at N=10 ------------------------------------------------
print("\nMonte-Carlo frequencies, N=10, 100k samples (target 1/9 = 0.1111):")
mc = pair_frequency(10, samples=100_000, seed=7)
worst = max(abs(f - 1 / 9) / se for f, se in mc.values())
sample = list(mc.items())[:4]
for pair, (f, se) in sample:
    print(f"  {pair}: {f:.4f} +- {se:.4f}")
print(f"  ... worst deviation over all 45 pairs: {worst:.2f} standard errors")
