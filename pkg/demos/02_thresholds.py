"""Switching thresholds between the two series.

For each number of terms N the threshold tau_N is where the two remainder
bounds cross; below it the theta series is used, above it Doob's.  The
guaranteed error eps_N shrinks super-exponentially in N.
"""
import numpy as np

from wedge import bound_r1, bound_r2, threshold_table

print(" N      tau_N        eps_N")
for e in threshold_table():
    print(f"{e.n_terms:2d}  {e.tau:9.6f}  {e.epsilon:11.3e}")

print("\nremainder bounds at N = 3 across x = a+ b+")
for x in np.geomspace(0.05, 20, 9):
    print(f"x = {x:8.4f}   R1 = {bound_r1(x, 3):10.3e}   R2 = {bound_r2(x, 3):10.3e}")
