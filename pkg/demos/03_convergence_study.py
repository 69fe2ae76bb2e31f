"""How many terms does each series actually need?

Draws random parameters (each 10 u^2 with u uniform), counts the terms the
selected series needs to reach machine precision, and bins the results.
"""
import time

from wedge import convergence_study

t0 = time.perf_counter()
study = convergence_study(100_000, seed=0)
elapsed = time.perf_counter() - t0

s = study.summary()
print(f"{s['count']} tuples in {elapsed:.1f} s")
for name, pct in s["percent"].items():
    print(f"  {name:<14} {pct:6.2f} %")
print("largest minimum term count:", s["max_min_terms"])
print("Doob reference censored:", s["doob_censored"])
