"""Wedge probabilities for Brownian motion between two linear boundaries."""
from .core import (
    DerivedParams,
    Formula,
    ThresholdEntry,
    WedgeParams,
    WedgeResult,
    bound_r1,
    bound_r2,
    derive,
    k1_partial,
    k2_partial,
    kolmogorov_cdf,
    solve_threshold,
    terms_to_convergence,
    threshold_table,
    wedge_equal_all,
    wedge_equal_slopes,
    wedge_prob,
)
from .batch import ParamTable, ResultTable, batch_wedge, timing_harness
from .bcp import BcpEstimate, PiecewiseBoundaryPair, bcp_montecarlo, bridge_band_prob
from .bench import convergence_study, sample_params

__version__ = "0.1.0"
