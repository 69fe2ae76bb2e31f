"""Batch evaluation throughput.

The batch path runs the same compiled kernel as the scalar API, split over
threads in fixed chunks, so results do not depend on the worker count.
"""
import os

import numpy as np

from wedge import Formula, batch_wedge, timing_harness
from wedge.batch import sample_table

table = sample_table(200_000, seed=1)
one = batch_wedge(table, workers=1)
many = batch_wedge(table, workers=4)
print("bit-identical across worker counts:", np.array_equal(one.value, many.value))

names = {f.code: f.value for f in Formula}
counts = np.bincount(one.formula, minlength=len(names))
print("rows per formula:", {names[c]: int(n) for c, n in enumerate(counts)})

workers = sorted({1, 2, os.cpu_count() or 1})
for row in timing_harness([100_000, 1_000_000], workers, seed=0):
    print(f"n = {row.n:>9,d}  workers = {row.workers}  {row.seconds:7.3f} s  ({row.seconds / row.n * 1e9:6.0f} ns/row)")
