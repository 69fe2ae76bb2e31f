"""Wedge probabilities: evaluation, remainder bounds and formula selection.

The wedge probability ``k(a1, b1; a2, b2)`` is the probability that a
standard Brownian motion satisfies ``-a1 t - b1 <= W_t <= a2 t + b2`` for
all ``t >= 0``.  Two series are available: Doob's exponential series,
fast when ``a+ b+`` is large, and a theta-dual series obtained by Poisson
summation, fast when ``a+ b+`` is small.  Computing ``N`` terms of the one
selected by the threshold ``tau_N`` guarantees an error below ``eps_N``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.optimize import bisect

from . import _kernels as K

__all__ = [
    "Formula",
    "WedgeParams",
    "DerivedParams",
    "WedgeResult",
    "ThresholdEntry",
    "ConvergenceError",
    "DEFAULT_TERMS",
    "REFERENCE_TERMS",
    "derive",
    "k1_partial",
    "k2_partial",
    "bound_r1",
    "bound_r2",
    "log_bound_r1",
    "log_bound_r2",
    "solve_threshold",
    "threshold_table",
    "wedge_prob",
    "kolmogorov_cdf",
    "wedge_equal_slopes",
    "wedge_equal_all",
    "terms_to_convergence",
]

DEFAULT_TERMS = 3
MIN_TERMS, MAX_TERMS = 2, 8
REFERENCE_TERMS = 200

# published thresholds and precisions, N = 2..8; used as a startup cross-check
PUBLISHED_TABLE = {
    2: (1.380, 2.9e-6),
    3: (1.136, 1.8e-17),
    4: (1.030, 5.1e-34),
    5: (0.973, 5.6e-56),
    6: (0.937, 2.3e-83),
    7: (0.912, 3.5e-116),
    8: (0.895, 1.9e-154),
}

_CLAMP_SLACK = 1e-15


class Formula(enum.Enum):
    DOOB = "doob"
    THETA = "theta"
    TRIVIAL_ZERO = "trivial_zero"
    TRIVIAL_ONE = "trivial_one"

    @property
    def code(self) -> int:
        return _FORMULA_CODES[self]

    @classmethod
    def from_code(cls, code: int) -> "Formula":
        return _CODE_FORMULAS[int(code)]


_FORMULA_CODES = {
    Formula.DOOB: K.DOOB,
    Formula.THETA: K.THETA,
    Formula.TRIVIAL_ZERO: K.TRIVIAL_ZERO,
    Formula.TRIVIAL_ONE: K.TRIVIAL_ONE,
}
_CODE_FORMULAS = {v: k for k, v in _FORMULA_CODES.items()}


class ConvergenceError(RuntimeError):
    """A partial-sum reference could not be certified within the term budget."""


@dataclass(frozen=True)
class WedgeParams:
    """Slopes and intercepts of the lower (a1, b1) and upper (a2, b2) lines."""

    a1: float
    b1: float
    a2: float
    b2: float

    def __post_init__(self):
        for name in ("a1", "b1", "a2", "b2"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"wedge parameter {name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)

    @property
    def positive(self) -> bool:
        return self.a1 > 0 and self.b1 > 0 and self.a2 > 0 and self.b2 > 0

    def astuple(self) -> tuple[float, float, float, float]:
        return (self.a1, self.b1, self.a2, self.b2)


ParamsLike = Union[WedgeParams, Sequence[float]]


def _as_params(params: ParamsLike) -> WedgeParams:
    if isinstance(params, WedgeParams):
        return params
    return WedgeParams(*params)


def _require_positive(p: WedgeParams) -> None:
    if not p.positive:
        raise ValueError(f"all wedge parameters must be > 0, got {p.astuple()}")


@dataclass(frozen=True)
class DerivedParams:
    a_plus: float
    a_minus: float
    b_plus: float
    b_minus: float
    c: float
    d: float

    @property
    def ab_plus(self) -> float:
        return self.a_plus * self.b_plus

    @property
    def ab_minus(self) -> float:
        return self.a_minus * self.b_minus


@dataclass(frozen=True)
class WedgeResult:
    value: float
    formula: Formula
    terms: int
    remainder_bound: float

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class ThresholdEntry:
    n_terms: int
    tau: float
    epsilon: float
    log_epsilon: float


def derive(params: ParamsLike) -> DerivedParams:
    p = _as_params(params)
    return DerivedParams(*K.derive(p.a1, p.b1, p.a2, p.b2))


def k1_partial(params: ParamsLike, n_terms: int) -> float:
    """Doob partial sum ``K_{1,N}``; ``n_terms=0`` gives 1."""
    p = _as_params(params)
    _require_positive(p)
    if n_terms < 0:
        raise ValueError("n_terms must be >= 0")
    return 1.0 - K.doob_sum(*K.products(p.a1, p.b1, p.a2, p.b2), int(n_terms))


def k2_partial(params: ParamsLike, n_terms: int) -> float:
    """Theta-dual partial sum ``K_{2,N}``; ``n_terms=0`` gives 0."""
    p = _as_params(params)
    _require_positive(p)
    if n_terms < 0:
        raise ValueError("n_terms must be >= 0")
    if n_terms == 0:
        return 0.0
    return K.theta_value(p.a1, p.b1, p.a2, p.b2, int(n_terms))


def log_bound_r1(ab_plus: float, n_terms: int) -> float:
    if n_terms < 2:
        raise ValueError("the Doob remainder bound needs n_terms >= 2")
    if not ab_plus > 0:
        raise ValueError("ab_plus must be > 0")
    return K.log_bound_r1(float(ab_plus), int(n_terms))


def log_bound_r2(ab_plus: float, n_terms: int) -> float:
    if n_terms < 1:
        raise ValueError("the theta-dual remainder bound needs n_terms >= 1")
    if not ab_plus > 0:
        raise ValueError("ab_plus must be > 0")
    return K.log_bound_r2(float(ab_plus), int(n_terms))


def bound_r1(ab_plus: float, n_terms: int) -> float:
    """Upper bound on the Doob remainder after ``n_terms`` terms."""
    return math.exp(log_bound_r1(ab_plus, n_terms))


def bound_r2(ab_plus: float, n_terms: int) -> float:
    """Upper bound on the theta-dual remainder after ``n_terms`` terms."""
    return math.exp(log_bound_r2(ab_plus, n_terms))


def solve_threshold(n_terms: int) -> ThresholdEntry:
    """Value of ``a+ b+`` where the two remainder bounds coincide.

    The log-difference of the bounds is strictly decreasing in ``a+ b+``
    so bisection on ``[1e-6, 16]`` is safe.
    """
    if not MIN_TERMS <= n_terms <= MAX_TERMS:
        raise ValueError(f"n_terms must be in {MIN_TERMS}..{MAX_TERMS}, got {n_terms}")
    n = int(n_terms)

    def gap(x):
        return K.log_bound_r1(x, n) - K.log_bound_r2(x, n)

    tau = bisect(gap, 1e-6, 16.0, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=200)
    log_eps = K.log_bound_r1(tau, n)
    return ThresholdEntry(n, tau, math.exp(log_eps), log_eps)


def _build_thresholds() -> dict[int, ThresholdEntry]:
    table = {}
    for n, (tau_ref, _) in PUBLISHED_TABLE.items():
        entry = solve_threshold(n)
        if abs(entry.tau - tau_ref) > 1e-3:
            raise RuntimeError(
                f"threshold for N={n} solved to {entry.tau:.6f}, published {tau_ref}; "
                "remainder bound formulas are inconsistent"
            )
        table[n] = entry
    return table


_THRESHOLDS = _build_thresholds()


def threshold_table() -> list[ThresholdEntry]:
    return [_THRESHOLDS[n] for n in sorted(_THRESHOLDS)]


def _tau(n_terms: int) -> float:
    try:
        return _THRESHOLDS[int(n_terms)].tau
    except KeyError:
        raise ValueError(f"n_terms must be in {MIN_TERMS}..{MAX_TERMS}, got {n_terms}") from None


def _clamp(v: float) -> float:
    assert -_CLAMP_SLACK <= v <= 1.0 + _CLAMP_SLACK, f"series value {v!r} far outside [0, 1]"
    return min(max(v, 0.0), 1.0)


def wedge_prob(params: ParamsLike, n_terms: int = DEFAULT_TERMS) -> WedgeResult:
    """Probability that Brownian motion stays forever inside the wedge.

    Doob's series is used when ``a+ b+ >= tau_N`` and the theta-dual series
    otherwise, which bounds the truncation error by ``eps_N`` for every
    positive parameter set.  Parameters that are not all positive give 0.

    Parameters
    ----------
    params : WedgeParams or sequence of 4 floats
        ``(a1, b1, a2, b2)``.
    n_terms : int
        Terms summed, 2..8.

    Returns
    -------
    WedgeResult
    """
    p = _as_params(params)
    tau = _tau(n_terms)
    value, code, terms, bound = K.wedge_one(p.a1, p.b1, p.a2, p.b2, int(n_terms), tau)
    return WedgeResult(_clamp(value), Formula.from_code(code), int(terms), float(bound))


def kolmogorov_cdf(a: float, n_terms: int = DEFAULT_TERMS) -> float:
    """Limiting distribution function of the two-sided Kolmogorov-Smirnov statistic.

    Equal to ``wedge_prob((a, a, a, a))``.
    """
    a = float(a)
    if math.isnan(a):
        raise ValueError("a must not be NaN")
    if math.isinf(a):
        return 1.0 if a > 0 else 0.0
    return _clamp(K.ks_one(a, int(n_terms), _tau(n_terms)))


def wedge_equal_slopes(a: float, b1: float, b2: float, n_terms: int = DEFAULT_TERMS) -> float:
    """``k(a, b1; a, b2)``: both boundaries share the slope ``a``."""
    p = WedgeParams(a, b1, a, b2)
    return _clamp(K.equal_slopes_one(p.a1, p.b1, p.b2, int(n_terms), _tau(n_terms)))


def wedge_equal_all(a1: float, a2: float, n_terms: int = DEFAULT_TERMS) -> float:
    """``k(a1, a1; a2, a2)``: each boundary has equal slope and intercept.

    This is the probability that a standard Brownian bridge stays in the
    band ``[-a1, a2]``.
    """
    p = WedgeParams(a1, a1, a2, a2)
    return _clamp(K.equal_all_one(p.a1, p.a2, int(n_terms), _tau(n_terms)))


def terms_to_convergence(
    params: ParamsLike,
    eps: float = 1e-16,
    which: Formula = Formula.DOOB,
    max_terms: int = REFERENCE_TERMS,
) -> int:
    """Smallest N with ``|K_inf - K_N| < eps`` for the chosen series.

    ``K_inf`` is approximated by the ``max_terms`` partial sum.  Raises
    :class:`ConvergenceError` when the remainder bound at ``max_terms``
    does not certify that reference to within ``eps``.
    """
    p = _as_params(params)
    _require_positive(p)
    if not eps > 0:
        raise ValueError("eps must be > 0")
    which = Formula(which)
    if which not in (Formula.DOOB, Formula.THETA):
        raise ValueError(f"which must be DOOB or THETA, got {which}")
    n_doob, n_theta, _, log_x, lr1, lr2 = K.first_converged(
        p.a1, p.b1, p.a2, p.b2, float(eps), int(max_terms)
    )
    log_cert = lr1 if which is Formula.DOOB else lr2
    if not log_cert < math.log(eps):
        raise ConvergenceError(
            f"{which.value} series not certified to {eps:g} after {max_terms} terms "
            f"for {p.astuple()} (a+b+ = {math.exp(log_x):.3g})"
        )
    return int(n_doob if which is Formula.DOOB else n_theta)
