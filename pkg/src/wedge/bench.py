"""Convergence study: how many terms each series needs over random wedges.

Tuples are drawn with independent coordinates on ``[0, 10]`` having CDF
``(x / 10) ** 0.5``.  For each tuple the number of terms after which each
partial sum is within ``eps`` of its 200-term reference is recorded, and
tuples are binned by whether the 0/1 short-circuit fires and otherwise by
the smaller of the two counts.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .batch import ParamTable, resolve_workers, run_chunked
from .core import REFERENCE_TERMS, WedgeParams

__all__ = [
    "CATEGORIES",
    "ConvergenceRecord",
    "StudyResult",
    "sample_params",
    "convergence_study",
]

CATEGORIES = ("trivial", "n1", "n2", "n3", "more")
STUDY_COLUMNS = ("a1", "b1", "a2", "b2", "log_ab_plus", "n_doob", "n_theta", "trivial")


def sample_params(count: int, seed: int = 0) -> np.ndarray:
    """``(count, 4)`` array of coordinates ``10 u**2`` with ``u`` uniform on (0, 1)."""
    count = int(count)
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    u = rng.random((count, 4))
    # (0, 1) open: random() can return exactly 0
    while np.any(u == 0.0):
        u[u == 0.0] = rng.random(int(np.sum(u == 0.0)))
    return 10.0 * u * u


@dataclass(frozen=True)
class ConvergenceRecord:
    params: WedgeParams
    log_ab_plus: float
    n_doob: int
    n_theta: int
    trivial: bool


@dataclass
class StudyResult:
    params: np.ndarray
    log_ab_plus: np.ndarray
    n_doob: np.ndarray
    n_theta: np.ndarray
    trivial: np.ndarray
    eps: float
    max_terms: int
    seed: int

    def __len__(self) -> int:
        return len(self.n_doob)

    def record(self, i: int) -> ConvergenceRecord:
        return ConvergenceRecord(
            WedgeParams(*self.params[i]),
            float(self.log_ab_plus[i]),
            int(self.n_doob[i]),
            int(self.n_theta[i]),
            bool(self.trivial[i]),
        )

    @property
    def min_terms(self) -> np.ndarray:
        return np.minimum(self.n_doob, self.n_theta)

    def categories(self) -> np.ndarray:
        """Category index per tuple, into :data:`CATEGORIES`.

        A tuple the short-circuit does not catch is still summed at least
        once, so a minimum count of 0 falls in ``n1``.
        """
        m = np.clip(self.min_terms, 1, 4)
        return np.where(self.trivial, 0, m)

    def summary(self) -> dict:
        cat = self.categories()
        n = len(self)
        counts = {name: int(np.sum(cat == i)) for i, name in enumerate(CATEGORIES)}
        return {
            "count": n,
            "eps": self.eps,
            "seed": self.seed,
            "counts": counts,
            "percent": {k: 100.0 * v / n for k, v in counts.items()},
            "max_min_terms": int(self.min_terms.max()),
            "doob_over_50": int(np.sum(self.n_doob > 50)),
            "doob_over_100": int(np.sum(self.n_doob > 100)),
            "doob_censored": int(np.sum(self.n_doob > self.max_terms)),
        }

    def summary_text(self) -> str:
        return json.dumps(self.summary(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(STUDY_COLUMNS)
        for i in range(len(self)):
            a1, b1, a2, b2 = self.params[i]
            w.writerow(
                [repr(float(a1)), repr(float(b1)), repr(float(a2)), repr(float(b2)),
                 repr(float(self.log_ab_plus[i])), int(self.n_doob[i]), int(self.n_theta[i]),
                 int(bool(self.trivial[i]))]
            )
        return buf.getvalue()


def convergence_study(
    count: int = 100_000,
    eps: float = 1e-16,
    seed: int = 0,
    max_terms: int = REFERENCE_TERMS,
    workers: int | None = None,
    params=None,
) -> StudyResult:
    """Terms to convergence of both series over ``count`` random tuples.

    Pass ``params`` (an ``(n, 4)`` array of positive values) to study a
    given set instead of sampling.  A series whose ``max_terms`` reference
    is not certified by its remainder bound gets the censored count
    ``max_terms + 1``, meaning "more than ``max_terms``".
    """
    if params is None:
        p = sample_params(count, seed)
    else:
        p = ParamTable.from_array(params).to_array()
        if np.any(p <= 0):
            row = int(np.flatnonzero(np.any(p <= 0, axis=1))[0])
            raise ValueError(f"row {row}: parameters must be > 0, got {tuple(p[row])}")
    p = np.ascontiguousarray(p)
    if not eps > 0:
        raise ValueError("eps must be > 0")
    n = len(p)
    n_doob = np.empty(n, dtype=np.int32)
    n_theta = np.empty(n, dtype=np.int32)
    trivial = np.empty(n, dtype=np.bool_)
    log_x = np.empty(n)
    cert1 = np.empty(n, dtype=np.bool_)
    cert2 = np.empty(n, dtype=np.bool_)

    def work(s, e):
        K.study_many(p, float(eps), int(max_terms), n_doob, n_theta, trivial, log_x, cert1, cert2, s, e)

    run_chunked(work, n, resolve_workers(workers), min_chunk=1024)
    n_doob[~cert1] = max_terms + 1
    n_theta[~cert2] = max_terms + 1
    return StudyResult(p, log_x, n_doob, n_theta, trivial, float(eps), int(max_terms), int(seed))
