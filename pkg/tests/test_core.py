import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_tuples
from wedge.core import (
    DEFAULT_TERMS,
    PUBLISHED_TABLE,
    ConvergenceError,
    Formula,
    WedgeParams,
    bound_r1,
    bound_r2,
    derive,
    k1_partial,
    k2_partial,
    kolmogorov_cdf,
    log_bound_r1,
    log_bound_r2,
    solve_threshold,
    terms_to_convergence,
    threshold_table,
    wedge_equal_all,
    wedge_equal_slopes,
    wedge_prob,
)

# Frozen from tests/oracles/mp_series.py at 60 digits; see that module.
ORACLE = {
    (1.0, 2.0, 3.0, 4.0): 0.9816843610735144743413284,
    (0.3, 0.7, 2.5, 0.1): 0.0900933105105117051845221,
    (5.0, 0.05, 0.2, 3.0): 0.2677955289921613710061118,
    (1.0, 1.0, 1.0, 3.0): 0.8621921108601343235266317,
    (1.0, 1.0, 2.0, 2.0): 0.864329284595431621526694,
    (1.0, 1.0, 1.0, 1.0): 0.7300003283226454787950994,
    (0.5, 0.5, 0.5, 0.5): 0.0360547563351249056140861,
}
KS_1 = 0.7300003283226454787950994
K1_2222_N3 = 0.9993290747442203046534554
K2_HALF_N3 = 0.0360547563351249056140861
BOUND_R2_1_1 = 0.026993039068932497531
EQUAL_ALL_02 = 5.050407338670087876507199e-13

positive = st.floats(min_value=1e-3, max_value=20.0, allow_nan=False, allow_infinity=False)
tuples = st.tuples(positive, positive, positive, positive)


class TestThresholds:
    @pytest.mark.parametrize("n", sorted(PUBLISHED_TABLE))
    def test_matches_published(self, n):
        tau, eps = PUBLISHED_TABLE[n]
        e = solve_threshold(n)
        assert abs(e.tau - tau) <= 1e-3
        assert abs(e.log_epsilon - math.log(eps)) <= math.log(1.05)

    @pytest.mark.parametrize("n", range(2, 9))
    def test_bounds_cross_at_tau(self, n):
        e = solve_threshold(n)
        assert log_bound_r1(e.tau, n) == pytest.approx(log_bound_r2(e.tau, n), abs=1e-9)
        # r1 decreases and r2 increases through the crossing
        assert log_bound_r1(e.tau * 1.01, n) < log_bound_r2(e.tau * 1.01, n)
        assert log_bound_r1(e.tau * 0.99, n) > log_bound_r2(e.tau * 0.99, n)

    def test_tau_decreases_with_terms(self):
        taus = [e.tau for e in threshold_table()]
        assert all(a > b for a, b in zip(taus, taus[1:]))

    def test_epsilon_n3_below_double_epsilon(self):
        assert solve_threshold(3).epsilon < np.finfo(float).eps

    @pytest.mark.parametrize("n", [0, 1, 9])
    def test_out_of_range(self, n):
        with pytest.raises(ValueError):
            solve_threshold(n)


class TestBounds:
    def test_r2_oracle(self):
        assert bound_r2(1.0, 1) == pytest.approx(BOUND_R2_1_1, rel=1e-14)

    def test_r1_closed_form(self):
        x, n = 0.7, 4
        expected = math.exp(-8 * x * 9) / (4 * x * 3)
        assert bound_r1(x, n) == pytest.approx(expected, rel=1e-14)

    def test_r1_needs_two_terms(self):
        with pytest.raises(ValueError):
            bound_r1(1.0, 1)

    def test_log_forms_survive_underflow(self):
        assert bound_r1(50.0, 8) == 0.0
        assert math.isfinite(log_bound_r1(50.0, 8))
        assert log_bound_r1(50.0, 8) < -19000

    @pytest.mark.parametrize("bad", [0.0, -1.0, float("nan")])
    def test_rejects_nonpositive(self, bad):
        with pytest.raises(ValueError):
            bound_r2(bad, 3)


class TestPartialSums:
    def test_doob_oracle(self):
        assert k1_partial((2, 2, 2, 2), 3) == pytest.approx(K1_2222_N3, abs=2e-16)

    def test_theta_oracle(self):
        assert k2_partial((0.5, 0.5, 0.5, 0.5), 3) == pytest.approx(K2_HALF_N3, abs=2e-17)

    def test_empty_sums(self):
        assert k1_partial((1, 2, 3, 4), 0) == 1.0
        assert k2_partial((1, 2, 3, 4), 0) == 0.0

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            k1_partial((1, 0, 1, 1), 3)
        with pytest.raises(ValueError):
            k2_partial((1, 1, -1, 1), 3)

    def test_series_agree_in_overlap(self):
        for p in random_tuples(300, seed=3):
            x = derive(p).ab_plus
            if 0.2 <= x <= 5:
                assert abs(k1_partial(p, 50) - k2_partial(p, 50)) < 1e-15


class TestWedgeProb:
    @pytest.mark.parametrize("params,expected", list(ORACLE.items()))
    def test_oracle_values(self, params, expected):
        assert wedge_prob(params).value == pytest.approx(expected, abs=1.2e-16)

    def test_accepts_dataclass(self):
        assert wedge_prob(WedgeParams(1, 2, 3, 4)) == wedge_prob((1, 2, 3, 4))

    def test_formula_follows_threshold(self):
        tau = solve_threshold(DEFAULT_TERMS).tau
        lo = wedge_prob((1.0, 1.0, 1.0, 1.0))
        hi = wedge_prob((1.2, 1.2, 1.2, 1.2))
        assert 1.0 < tau < 1.44
        assert lo.formula is Formula.THETA
        assert hi.formula is Formula.DOOB
        assert lo.terms == hi.terms == DEFAULT_TERMS
        assert lo.remainder_bound == bound_r2(1.0, 3)
        assert hi.remainder_bound == pytest.approx(bound_r1(1.44, 3), rel=1e-15)

    def test_trivial_endpoints(self):
        one = wedge_prob((9, 9, 9, 9))
        zero = wedge_prob((0.01, 0.01, 0.01, 0.01))
        assert (one.value, one.formula, one.terms) == (1.0, Formula.TRIVIAL_ONE, 0)
        assert (zero.value, zero.formula, zero.terms) == (0.0, Formula.TRIVIAL_ZERO, 0)

    @pytest.mark.parametrize("params", [(1, -1, 1, 1), (0, 1, 1, 1), (1, 1, 1, 0)])
    def test_nonpositive_gives_zero(self, params):
        r = wedge_prob(params)
        assert r.value == 0.0 and r.formula is Formula.TRIVIAL_ZERO

    @pytest.mark.parametrize("bad", [float("nan"), float("inf"), -float("inf")])
    def test_rejects_nonfinite(self, bad):
        with pytest.raises(ValueError, match="finite"):
            wedge_prob((1.0, bad, 1.0, 1.0))

    def test_one_sided_limit(self):
        # far upper line: only the lower one matters, k = 1 - exp(-2 a1 b1)
        assert wedge_prob((1, 1, 1, 50)).value == pytest.approx(1 - math.exp(-2), abs=2e-16)

    def test_matches_mp_truth(self):
        from mp_series import theta_mp

        errs = {Formula.DOOB: 0.0, Formula.THETA: 0.0}
        for p in random_tuples(300, seed=11):
            r = wedge_prob(p)
            if r.formula in errs:
                errs[r.formula] = max(errs[r.formula], abs(r.value - float(theta_mp(*p))))
        assert errs[Formula.DOOB] <= 2.5e-16
        # the theta branch is evaluated in double-double and rounded once
        assert errs[Formula.THETA] <= 1.2e-16

    @settings(max_examples=200, deadline=None)
    @given(tuples)
    def test_in_unit_interval(self, p):
        v = wedge_prob(p).value
        assert 0.0 <= v <= 1.0

    @settings(max_examples=300, deadline=None)
    @given(tuples)
    def test_symmetries_exact(self, p):
        a1, b1, a2, b2 = p
        v = wedge_prob(p).value
        assert wedge_prob((a2, b2, a1, b1)).value == v
        assert wedge_prob((b1, a1, b2, a2)).value == v
        assert wedge_prob((b2, a2, b1, a1)).value == v

    @settings(max_examples=300, deadline=None)
    @given(tuples, st.sampled_from([0.5, 2.0, 10.0]))
    def test_scaling(self, p, u):
        a1, b1, a2, b2 = p
        v = wedge_prob(p).value
        w = wedge_prob((a1 / u, u * b1, a2 / u, u * b2)).value
        assert abs(v - w) <= 4e-16

    @settings(max_examples=200, deadline=None)
    @given(tuples, st.integers(0, 3), st.floats(1.0, 3.0))
    def test_monotone_in_each_parameter(self, p, i, f):
        q = list(p)
        q[i] *= f
        # the function is monotone; rounding may dip by an ulp
        assert wedge_prob(q).value >= wedge_prob(p).value - 2.3e-16

    @pytest.mark.parametrize("n", range(2, 9))
    def test_terms_setting(self, n):
        for p in random_tuples(50, seed=n):
            r = wedge_prob(p, n)
            ref = wedge_prob(p, 8)
            if r.formula in (Formula.DOOB, Formula.THETA):
                assert r.terms == n
                assert abs(r.value - ref.value) <= r.remainder_bound + 4.5e-16

    def test_rejects_bad_terms(self):
        with pytest.raises(ValueError):
            wedge_prob((1, 1, 1, 1), 9)


class TestSpecialCases:
    def test_ks_oracle(self):
        assert kolmogorov_cdf(1.0) == pytest.approx(KS_1, abs=1e-16)

    @pytest.mark.parametrize("a,expected", [(0.0, 0.0), (-1.0, 0.0), (10.0, 1.0), (math.inf, 1.0)])
    def test_ks_endpoints(self, a, expected):
        assert kolmogorov_cdf(a) == expected

    def test_ks_mp_series(self):
        from mp_series import ks_doob_mp

        for a in (0.3, 0.6, 0.9, 1.2, 1.8, 2.5):
            assert kolmogorov_cdf(a) == pytest.approx(float(ks_doob_mp(a)), abs=2e-16)

    def test_ks_nan(self):
        with pytest.raises(ValueError):
            kolmogorov_cdf(float("nan"))

    def test_specialisations_exact(self, rng):
        for a, b1, b2 in rng.uniform(0.01, 3, size=(500, 3)):
            assert kolmogorov_cdf(a) == wedge_prob((a, a, a, a)).value
            assert wedge_equal_slopes(a, b1, b2) == wedge_prob((a, b1, a, b2)).value
            assert wedge_equal_all(a, b1) == wedge_prob((a, a, b1, b1)).value

    def test_equal_all_small(self):
        assert wedge_equal_all(0.2, 0.2) == pytest.approx(EQUAL_ALL_02, rel=1e-13)


class TestTermsToConvergence:
    def test_large_product_needs_few_doob_terms(self):
        assert terms_to_convergence((3, 3, 3, 3)) <= 1

    def test_small_product_needs_few_theta_terms(self):
        assert terms_to_convergence((0.3, 0.3, 0.3, 0.3), which=Formula.THETA) <= 2

    def test_doob_slows_as_product_shrinks(self):
        counts = [terms_to_convergence((a, a, a, a)) for a in (1.0, 0.5, 0.2, 0.1, 0.05, 0.03)]
        assert counts == sorted(counts)
        # a+ b+ ~ 1e-3: Doob needs ~ sqrt(log(1/eps) / (8x)) terms
        assert terms_to_convergence((0.03, 0.03, 0.03, 0.03)) > 50

    def test_uncertified_reference_raises(self):
        with pytest.raises(ConvergenceError):
            terms_to_convergence((0.005, 0.005, 0.005, 0.005))

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            terms_to_convergence((1, 1, 1, 1), eps=0)
        with pytest.raises(ValueError):
            terms_to_convergence((1, 1, 1, 1), which=Formula.TRIVIAL_ONE)
        with pytest.raises(ValueError):
            terms_to_convergence((1, 0, 1, 1))
