import json
import math
from pathlib import Path

import numpy as np
import pytest

from mp_series import bm_band_mp, bridge_band_mp
from wedge.bcp import (
    BoundaryError,
    PiecewiseBoundaryPair,
    bcp_montecarlo,
    bcp_path_products,
    bridge_band_prob,
    load_config,
)
from wedge.core import kolmogorov_cdf

ORACLE_PATH = Path(__file__).parent / "data" / "bcp_oracle.json"
# P(|W_s| < 1 for s <= 1), eigenfunction series at 60 digits
BM_BAND_1 = 0.3707774297995239054


def _within(est, se, ref, ref_se=0.0, k=3.0):
    return abs(est - ref) <= k * math.hypot(se, ref_se)


class TestBoundaryPair:
    def test_constant(self):
        b = PiecewiseBoundaryPair.constant(-1, 2, horizon=3.0, intervals=6)
        assert b.intervals == 6 and b.horizon == 3.0
        assert np.all(b.lower == -1) and np.all(b.upper == 2)

    def test_from_points_merges_knots(self):
        b = PiecewiseBoundaryPair.from_points([[0, -1], [1, -2]], [[0, 1], [0.5, 2], [1, 1]])
        assert list(b.knots) == [0, 0.5, 1]
        assert list(b.lower) == [-1, -1.5, -2]
        assert list(b.upper) == [1, 2, 1]

    def test_refined(self):
        b = PiecewiseBoundaryPair.from_points([[0, -1], [1, -2]], [[0, 1], [1, 3]]).refined(4)
        assert b.intervals == 4
        assert np.allclose(b.lower, [-1, -1.25, -1.5, -1.75, -2])
        assert np.allclose(b.upper, [1, 1.5, 2, 2.5, 3])

    def test_crossing_reports_knot(self):
        with pytest.raises(BoundaryError) as exc:
            PiecewiseBoundaryPair([0, 1, 2], [-1, 0.5, -1], [1, 0.5, 1])
        assert exc.value.knot == 1

    @pytest.mark.parametrize(
        "knots,lower,upper",
        [
            ([0, 1, 1], [-1, -1, -1], [1, 1, 1]),  # not increasing
            ([0.1, 1], [-1, -1], [1, 1]),  # does not start at 0
            ([0, 1], [0.5, -1], [1, 1]),  # start point outside
            ([0, 1], [-1, -1], [1, np.inf]),
            ([0], [-1], [1]),
        ],
    )
    def test_invalid(self, knots, lower, upper):
        with pytest.raises(BoundaryError):
            PiecewiseBoundaryPair(knots, lower, upper)

    def test_mismatched_horizons(self):
        with pytest.raises(BoundaryError, match="ends"):
            PiecewiseBoundaryPair.from_points([[0, -1], [1, -1]], [[0, 1], [2, 1]])


class TestBridgeBandProb:
    def test_centred_unit_bridge_is_ks(self):
        assert bridge_band_prob(1.0, 0.0, 0.0, (-1, -1), (1, 1)) == kolmogorov_cdf(1.0)

    def test_image_series(self, rng):
        for _ in range(200):
            lo, up = -rng.uniform(0.1, 2), rng.uniform(0.1, 2)
            x, y = rng.uniform(lo, up, size=2)
            t = rng.uniform(0.05, 3)
            ref = float(bridge_band_mp(t, x, y, lo, up))
            assert bridge_band_prob(t, x, y, (lo, lo), (up, up)) == pytest.approx(ref, abs=4e-16)

    def test_one_sided(self):
        # lower line far away: single-barrier bridge formula
        v = bridge_band_prob(0.5, 0.1, 0.3, (-40, -40), (1.0, 1.5))
        assert v == pytest.approx(1 - math.exp(-2 * 0.9 * 1.2 / 0.5), abs=2e-16)

    def test_endpoint_outside(self):
        assert bridge_band_prob(1.0, 0.0, 1.0, (-1, -1), (1, 1)) == 0.0
        assert bridge_band_prob(1.0, 0.0, 0.0, (0.0, -1), (1, 1)) == 0.0

    def test_bad_dt(self):
        with pytest.raises(ValueError):
            bridge_band_prob(0.0, 0.0, 0.0, (-1, -1), (1, 1))


class TestMonteCarlo:
    def test_reproducible_and_worker_invariant(self):
        b = PiecewiseBoundaryPair.constant(-1, 1, intervals=8)
        p1 = bcp_path_products(b, 20_000, seed=5, workers=1)
        p3 = bcp_path_products(b, 20_000, seed=5, workers=3)
        assert np.array_equal(p1, p3)
        assert not np.array_equal(p1, bcp_path_products(b, 20_000, seed=6, workers=1))

    def test_prefix_stable_in_samples(self):
        b = PiecewiseBoundaryPair.constant(-1, 1, intervals=4)
        small = bcp_path_products(b, 10_000, seed=1)
        big = bcp_path_products(b, 30_000, seed=1)
        assert np.array_equal(small, big[:10_000])

    def test_pathwise_monotone_in_band(self):
        narrow = PiecewiseBoundaryPair.constant(-1, 1, intervals=8)
        wide = PiecewiseBoundaryPair.constant(-1.2, 1.1, intervals=8)
        pn = bcp_path_products(narrow, 20_000, seed=2)
        pw = bcp_path_products(wide, 20_000, seed=2)
        assert np.all(pw >= pn)

    def test_wide_band_is_one(self):
        est = bcp_montecarlo(PiecewiseBoundaryPair.constant(-40, 40, intervals=4), 5000, seed=0)
        assert est.estimate == 1.0 and est.std_error == 0.0

    def test_brownian_band_closed_form(self):
        assert float(bm_band_mp(1, 1)) == pytest.approx(BM_BAND_1, abs=1e-18)
        est = bcp_montecarlo(PiecewiseBoundaryPair.constant(-1, 1, intervals=16), 100_000, seed=3)
        assert _within(est.estimate, est.std_error, BM_BAND_1)
        assert est.as_dict()["samples"] == 100_000

    def test_one_interval_is_exact_conditional(self):
        # a single interval: per-path factor is the bridge probability itself
        b = PiecewiseBoundaryPair.constant(-1, 1, intervals=1)
        prods = bcp_path_products(b, 50, seed=4)
        from wedge.bcp import _chunk_normals

        w1 = _chunk_normals(4, 0, 50, 1)[:, 0]
        for p, w in zip(prods, w1):
            expected = bridge_band_prob(1.0, 0.0, w, (-1, -1), (1, 1)) if abs(w) < 1 else 0.0
            assert p == expected

    def test_rejects_bad_samples(self):
        with pytest.raises(ValueError):
            bcp_montecarlo(PiecewiseBoundaryPair.constant(-1, 1), 0, seed=0)


@pytest.fixture(scope="module")
def oracle():
    return json.loads(ORACLE_PATH.read_text())


@pytest.mark.skipif(not ORACLE_PATH.exists(), reason="brute-force oracle not built")
class TestBruteForceOracle:
    def test_oracle_matches_closed_form(self, oracle):
        o = oracle["bm_band"]
        assert _within(o["estimate"], o["std_error"], BM_BAND_1)

    def test_raw_monitoring_is_biased(self, oracle):
        # discrete monitoring misses crossings between grid points
        o = oracle["bm_band"]
        assert o["raw_estimate"] - BM_BAND_1 > 5 * o["raw_std_error"]

    def test_bridge_band(self, oracle):
        o = oracle["bridge_band"]
        v = bridge_band_prob(1.0, 0.0, o["x_end"], (o["lower"], o["lower"]), (o["upper"], o["upper"]))
        assert _within(o["estimate"], o["std_error"], v)
        assert v == pytest.approx(float(bridge_band_mp(1, 0, o["x_end"], o["lower"], o["upper"])), abs=4e-16)

    def test_estimator_agrees(self, oracle):
        o = oracle["bm_band"]
        est = bcp_montecarlo(PiecewiseBoundaryPair.constant(o["lower"], o["upper"], intervals=16), 100_000, seed=8)
        assert _within(est.estimate, est.std_error, o["estimate"], o["std_error"])


class TestConfig:
    DOC = {"lower": [[0, -1], [1, -1]], "upper": [[0, 1], [0.5, 1.5], [1, 1]], "samples": 1000, "seed": 7}

    def test_dict(self):
        cfg = load_config(self.DOC)
        assert cfg.samples == 1000 and cfg.seed == 7 and cfg.bounds.intervals == 2

    def test_file(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps(self.DOC))
        assert load_config(p).bounds.horizon == 1.0

    @pytest.mark.parametrize(
        "patch",
        [{"samples": 0}, {"samples": 1.5}, {"seed": "x"}, {"seed": True}, {"lower": [[0, 2], [1, -1]]}],
    )
    def test_invalid_fields(self, patch):
        with pytest.raises(BoundaryError):
            load_config({**self.DOC, **patch})

    def test_missing_field(self):
        doc = dict(self.DOC)
        del doc["seed"]
        with pytest.raises(BoundaryError, match="seed"):
            load_config(doc)

    def test_bad_json(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text("{lower: 1")
        with pytest.raises(BoundaryError, match="JSON"):
            load_config(p)
