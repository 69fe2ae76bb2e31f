"""Chunked, multi-threaded evaluation of wedge probabilities over arrays.

Rows are independent and each is evaluated by the same compiled scalar
kernel as :func:`wedge.core.wedge_prob`, so results are bit-identical to
the sequential path for any worker count.  The kernel releases the GIL;
parallelism comes from a plain thread pool over static chunks.
"""
from __future__ import annotations

import csv
import io
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .core import _CLAMP_SLACK, DEFAULT_TERMS, Formula, _tau

__all__ = [
    "ParamTable",
    "ResultTable",
    "TimingRow",
    "ResourceError",
    "resolve_workers",
    "batch_wedge",
    "timing_harness",
    "timing_csv",
    "sample_table",
]

MIN_CHUNK = 4096
WORKERS_ENV = "WEDGE_WORKERS"


class ResourceError(RuntimeError):
    """Raised when a batch cannot be allocated."""


def resolve_workers(workers: int | None = None) -> int:
    """Explicit argument, then ``$WEDGE_WORKERS``, then the logical core count."""
    if workers is None:
        env = os.environ.get(WORKERS_ENV)
        if env:
            try:
                workers = int(env)
            except ValueError:
                raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {env!r}") from None
        else:
            workers = os.cpu_count() or 1
    workers = int(workers)
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    return workers


def chunk_bounds(n: int, workers: int, min_chunk: int = MIN_CHUNK) -> list[tuple[int, int]]:
    """Static partition of ``range(n)`` into at most ``workers`` chunks of >= min_chunk rows."""
    if n == 0:
        return []
    size = max(min_chunk, -(-n // workers))
    return [(s, min(s + size, n)) for s in range(0, n, size)]


def run_chunked(fn, n: int, workers: int, min_chunk: int = MIN_CHUNK) -> None:
    """Call ``fn(start, stop)`` over a static partition, in parallel if useful."""
    bounds = chunk_bounds(n, workers, min_chunk)
    if workers == 1 or len(bounds) <= 1:
        for s, e in bounds:
            fn(s, e)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for f in [pool.submit(fn, s, e) for s, e in bounds]:
            f.result()


@dataclass(frozen=True)
class ParamTable:
    a1: np.ndarray
    b1: np.ndarray
    a2: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        cols = {}
        for name in ("a1", "b1", "a2", "b2"):
            col = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            if col.ndim != 1:
                raise ValueError(f"column {name} must be one-dimensional")
            cols[name] = col
        lengths = {len(c) for c in cols.values()}
        if len(lengths) > 1:
            raise ValueError(f"columns have unequal lengths: { {k: len(v) for k, v in cols.items()} }")
        for name, col in cols.items():
            bad = np.flatnonzero(~np.isfinite(col))
            if bad.size:
                raise ValueError(f"row {int(bad[0])}: column {name} is not finite ({col[bad[0]]!r})")
            object.__setattr__(self, name, col)

    @classmethod
    def from_array(cls, arr) -> "ParamTable":
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 4:
            raise ValueError(f"expected an (n, 4) array, got shape {arr.shape}")
        return cls(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3])

    def __len__(self) -> int:
        return len(self.a1)

    def to_array(self) -> np.ndarray:
        return np.column_stack([self.a1, self.b1, self.a2, self.b2])


@dataclass(frozen=True)
class ResultTable:
    value: np.ndarray
    formula: np.ndarray  # int8 codes, see Formula.code
    terms: np.ndarray
    remainder_bound: np.ndarray

    def __len__(self) -> int:
        return len(self.value)

    def formulas(self) -> list[Formula]:
        return [Formula.from_code(c) for c in self.formula]


def batch_wedge(table: ParamTable, n_terms: int = DEFAULT_TERMS, workers: int | None = None) -> ResultTable:
    """Evaluate :func:`wedge.core.wedge_prob` row-wise over ``table``."""
    if not isinstance(table, ParamTable):
        table = ParamTable.from_array(table)
    tau = _tau(n_terms)
    workers = resolve_workers(workers)
    n = len(table)
    try:
        value = np.empty(n)
        code = np.empty(n, dtype=np.int8)
        terms = np.empty(n, dtype=np.int32)
        bound = np.empty(n)
    except MemoryError:
        raise ResourceError(f"cannot allocate result arrays for {n} rows") from None

    a1, b1, a2, b2 = table.a1, table.b1, table.a2, table.b2
    nt = int(n_terms)

    def work(start, stop):
        K.wedge_many(a1, b1, a2, b2, nt, tau, value, code, terms, bound, start, stop)

    run_chunked(work, n, workers)

    if n:
        assert value.min() >= -_CLAMP_SLACK and value.max() <= 1.0 + _CLAMP_SLACK
    np.clip(value, 0.0, 1.0, out=value)
    return ResultTable(value, code, terms, bound)


def sample_table(n: int, seed: int = 0) -> ParamTable:
    """Random table with coordinates ``10 u**2``, ``u`` uniform on (0, 1)."""
    rng = np.random.default_rng(seed)
    try:
        arr = 10.0 * rng.random((n, 4)) ** 2
    except MemoryError:
        raise ResourceError(f"cannot allocate a parameter table of {n} rows") from None
    return ParamTable.from_array(arr)


@dataclass(frozen=True)
class TimingRow:
    n: int
    workers: int
    seconds: float


def timing_harness(
    sizes, workers_list, seed: int = 0, n_terms: int = DEFAULT_TERMS, repeats: int = 1
) -> list[TimingRow]:
    """Wall-clock time of :func:`batch_wedge` for each (size, workers) pair.

    The best of ``repeats`` runs is reported.  A warm-up call excludes JIT
    compilation from the measurements.
    """
    sizes = [int(s) for s in sizes]
    workers_list = [int(w) for w in workers_list]
    if not sizes or any(s < 1 for s in sizes):
        raise ValueError(f"sizes must be positive, got {sizes}")
    if not workers_list or any(w < 1 for w in workers_list):
        raise ValueError(f"workers must be positive, got {workers_list}")

    batch_wedge(sample_table(8, seed), n_terms, workers=1)
    rows = []
    for n in sizes:
        table = sample_table(n, seed)
        for w in workers_list:
            best = float("inf")
            for _ in range(max(1, repeats)):
                t0 = time.perf_counter()
                batch_wedge(table, n_terms, workers=w)
                best = min(best, time.perf_counter() - t0)
            rows.append(TimingRow(n, w, best))
        del table
    return rows


def timing_csv(rows: list[TimingRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "workers", "seconds"])
    for r in rows:
        w.writerow([r.n, r.workers, f"{r.seconds:.6f}"])
    return buf.getvalue()
