"""Boundary crossing for Brownian motion between piecewise-linear boundaries.

Given the Brownian values at the knots, the path on each interval is a
Brownian bridge, and the probability that a bridge stays between two
line segments is a wedge probability.  The probability of staying in the
band on ``[0, t_m]`` is therefore the expectation, over the Gaussian knot
values, of a product of wedge probabilities; it is estimated here by
plain Monte Carlo.

Random numbers come from a Philox (counter-based) generator.  Paths are
grouped in chunks of :data:`CHUNK_PATHS` and chunk ``j`` draws from the
stream keyed by ``SeedSequence([seed, j])``, so the estimate depends only
on ``(seed, samples)`` and not on the number of worker threads.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels as K
from .batch import resolve_workers, run_chunked
from .core import DEFAULT_TERMS, _tau

__all__ = [
    "CHUNK_PATHS",
    "BoundaryError",
    "PiecewiseBoundaryPair",
    "BcpEstimate",
    "BcpConfig",
    "bridge_band_prob",
    "bcp_path_products",
    "bcp_montecarlo",
    "load_config",
]

CHUNK_PATHS = 8192
_SEED_MASK = (1 << 64) - 1


class BoundaryError(ValueError):
    """Invalid boundary specification; ``knot`` is the offending index or None."""

    def __init__(self, message: str, knot: int | None = None):
        super().__init__(message)
        self.knot = knot


def _as_points(points, side: str) -> tuple[np.ndarray, np.ndarray]:
    try:
        arr = np.asarray(points, dtype=np.float64)
    except (TypeError, ValueError):
        raise BoundaryError(f"{side}: expected a list of [t, value] pairs") from None
    if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) < 2:
        raise BoundaryError(f"{side}: expected at least two [t, value] pairs, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.all(np.isfinite(arr), axis=1))[0])
        raise BoundaryError(f"{side}: knot {bad} is not finite", knot=bad)
    t = arr[:, 0]
    steps = np.diff(t)
    if np.any(steps <= 0):
        bad = int(np.flatnonzero(steps <= 0)[0]) + 1
        raise BoundaryError(f"{side}: knot times must be strictly increasing (knot {bad}, t={t[bad]!r})", knot=bad)
    if t[0] != 0.0:
        raise BoundaryError(f"{side}: first knot must be at t=0, got {t[0]!r}", knot=0)
    return t, arr[:, 1]


@dataclass(frozen=True)
class PiecewiseBoundaryPair:
    """Lower and upper piecewise-linear boundaries on a common knot grid."""

    knots: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        t = np.ascontiguousarray(self.knots, dtype=np.float64)
        lo = np.ascontiguousarray(self.lower, dtype=np.float64)
        up = np.ascontiguousarray(self.upper, dtype=np.float64)
        if not (t.ndim == lo.ndim == up.ndim == 1 and len(t) == len(lo) == len(up)):
            raise BoundaryError("knots, lower and upper must be 1-d arrays of equal length")
        if len(t) < 2:
            raise BoundaryError("at least two knots are required")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(lo)) and np.all(np.isfinite(up))):
            raise BoundaryError("knot times and boundary values must be finite")
        if t[0] != 0.0:
            raise BoundaryError(f"first knot must be at t=0, got {t[0]!r}", knot=0)
        steps = np.diff(t)
        if np.any(steps <= 0):
            bad = int(np.flatnonzero(steps <= 0)[0]) + 1
            raise BoundaryError(f"knot times must be strictly increasing (knot {bad})", knot=bad)
        crossed = np.flatnonzero(lo >= up)
        if crossed.size:
            i = int(crossed[0])
            raise BoundaryError(
                f"lower boundary {lo[i]!r} not below upper {up[i]!r} at knot {i} (t={t[i]!r})", knot=i
            )
        if not lo[0] < 0.0 < up[0]:
            raise BoundaryError(f"start point 0 must lie strictly inside ({lo[0]!r}, {up[0]!r})", knot=0)
        object.__setattr__(self, "knots", t)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @classmethod
    def from_points(cls, lower, upper) -> "PiecewiseBoundaryPair":
        """Build from ``[t, value]`` lists; knot sets are merged and both sides interpolated."""
        tl, vl = _as_points(lower, "lower")
        tu, vu = _as_points(upper, "upper")
        if tl[-1] != tu[-1]:
            raise BoundaryError(f"lower ends at t={tl[-1]!r} but upper ends at t={tu[-1]!r}")
        t = np.union1d(tl, tu)
        return cls(t, np.interp(t, tl, vl), np.interp(t, tu, vu))

    @classmethod
    def constant(cls, lower: float, upper: float, horizon: float = 1.0, intervals: int = 1):
        t = np.linspace(0.0, horizon, intervals + 1)
        return cls(t, np.full_like(t, lower), np.full_like(t, upper))

    @property
    def horizon(self) -> float:
        return float(self.knots[-1])

    @property
    def intervals(self) -> int:
        return len(self.knots) - 1

    def refined(self, factor: int = 2) -> "PiecewiseBoundaryPair":
        """Same boundaries with each interval split into ``factor`` equal parts."""
        factor = int(factor)
        if factor < 1:
            raise ValueError("factor must be >= 1")
        frac = np.arange(factor) / factor
        t0, t1 = self.knots[:-1], self.knots[1:]
        t = np.append((t0[:, None] + (t1 - t0)[:, None] * frac).ravel(), self.knots[-1])
        return PiecewiseBoundaryPair(t, np.interp(t, self.knots, self.lower), np.interp(t, self.knots, self.upper))


@dataclass(frozen=True)
class BcpEstimate:
    estimate: float
    std_error: float
    samples: int
    seed: int

    def as_dict(self) -> dict:
        return {"estimate": self.estimate, "std_error": self.std_error, "samples": self.samples, "seed": self.seed}


def bridge_band_prob(
    dt: float,
    x_start: float,
    x_end: float,
    lower: tuple[float, float],
    upper: tuple[float, float],
    n_terms: int = DEFAULT_TERMS,
) -> float:
    """Probability that a Brownian bridge from ``x_start`` to ``x_end`` over
    a time ``dt`` stays between two line segments.

    ``lower`` and ``upper`` are the ``(start, end)`` values of the segments.
    Centring the bridge, rescaling to unit time and inverting time turns
    the event into a wedge event with lower slope/intercept equal to the
    end/start gaps below the path, and likewise above::

        k(g1e / sqrt(dt), g1s / sqrt(dt); g2e / sqrt(dt), g2s / sqrt(dt))

    A gap that is not strictly positive gives 0.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    vals = (x_start, x_end, *lower, *upper)
    if not all(math.isfinite(v) for v in vals):
        raise ValueError("bridge endpoints and boundary values must be finite")
    g1s = x_start - lower[0]
    g1e = x_end - lower[1]
    g2s = upper[0] - x_start
    g2e = upper[1] - x_end
    return float(K.bridge_factor(math.sqrt(dt), g1s, g1e, g2s, g2e, int(n_terms), _tau(n_terms)))


def _chunk_normals(seed: int, chunk: int, count: int, m: int) -> np.ndarray:
    ss = np.random.SeedSequence([int(seed) & _SEED_MASK, chunk])
    return np.random.Generator(np.random.Philox(ss)).standard_normal((count, m))


def bcp_path_products(
    bounds: PiecewiseBoundaryPair,
    samples: int,
    seed: int,
    n_terms: int = DEFAULT_TERMS,
    workers: int | None = None,
) -> np.ndarray:
    """Per-path products of bridge probabilities, in path order.

    Identical seeds give identical knot values for any pair of boundaries
    sharing a knot grid, which makes paired comparisons path-wise exact.
    """
    samples = int(samples)
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    tau = _tau(n_terms)
    nt = int(n_terms)
    workers = resolve_workers(workers)
    sqrt_dt = np.sqrt(np.diff(bounds.knots))
    m = bounds.intervals
    out = np.empty(samples)
    n_chunks = -(-samples // CHUNK_PATHS)

    def work(c0, c1):
        for c in range(c0, c1):
            s = c * CHUNK_PATHS
            e = min(s + CHUNK_PATHS, samples)
            z = _chunk_normals(seed, c, e - s, m)
            K.path_products(z, sqrt_dt, bounds.lower, bounds.upper, nt, tau, out[s:e])

    run_chunked(work, n_chunks, workers, min_chunk=1)
    return out


def bcp_montecarlo(
    bounds: PiecewiseBoundaryPair,
    samples: int,
    seed: int,
    n_terms: int = DEFAULT_TERMS,
    workers: int | None = None,
) -> BcpEstimate:
    """Monte Carlo probability that W stays strictly inside the band on [0, t_m]."""
    prods = bcp_path_products(bounds, samples, seed, n_terms, workers)
    est = float(np.mean(prods))
    se = float(np.std(prods, ddof=1) / math.sqrt(len(prods))) if len(prods) > 1 else 0.0
    return BcpEstimate(min(max(est, 0.0), 1.0), se, int(samples), int(seed))


@dataclass(frozen=True)
class BcpConfig:
    bounds: PiecewiseBoundaryPair
    samples: int
    seed: int


def load_config(source) -> BcpConfig:
    """Read a boundary specification.

    The document is JSON with keys ``lower`` and ``upper`` (lists of
    ``[t, value]`` pairs), ``samples`` and ``seed``::

        {"lower": [[0, -1], [1, -1]], "upper": [[0, 1], [1, 1]],
         "samples": 100000, "seed": 7}

    ``source`` is a path or an already-parsed mapping.
    """
    if isinstance(source, dict):
        doc = source
    else:
        text = Path(source).read_text(encoding="utf-8")
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise BoundaryError(f"config is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise BoundaryError("config must be a JSON object")
    missing = [k for k in ("lower", "upper", "samples", "seed") if k not in doc]
    if missing:
        raise BoundaryError(f"config missing fields: {', '.join(missing)}")
    samples, seed = doc["samples"], doc["seed"]
    if not isinstance(samples, int) or isinstance(samples, bool) or samples < 1:
        raise BoundaryError(f"samples must be a positive integer, got {samples!r}")
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise BoundaryError(f"seed must be an integer, got {seed!r}")
    return BcpConfig(PiecewiseBoundaryPair.from_points(doc["lower"], doc["upper"]), samples, seed)
