import math

import numpy as np
import pytest

from measurelab import (
    CovarianceParams,
    MeasureLabError,
    RngState,
    fit_log_slope,
    hs_scan,
    ir_scan,
    kernel_at_zero,
    make_lattice,
    signed_measure_probe,
    uv_scan,
)
from measurelab.scans import CONVERGENT, DIVERGENT, MARGINAL, classify, increment_slope

PARAMS = CovarianceParams(1.0)


class TestFitLogSlope:
    def test_exact_power_law(self):
        sizes = [10.0, 20.0, 40.0, 80.0]
        slope, err = fit_log_slope([(s, 2.5 * s ** 1.5) for s in sizes])
        assert slope == pytest.approx(1.5, abs=1e-10)
        assert err < 1e-10

    def test_constant_series(self):
        slope, _ = fit_log_slope([(s, 7.0) for s in (8, 16, 32)])
        assert slope == pytest.approx(0.0, abs=1e-12)

    def test_log_series_flagged_marginal(self):
        sizes = [16.0, 32.0, 64.0, 128.0, 256.0]
        vals = [3.0 * math.log(s) for s in sizes]
        slope, _ = fit_log_slope(zip(sizes, vals))
        inc = increment_slope(sizes, vals)
        assert 0.0 < slope < 0.5  # small positive, shrinking with the grid
        assert classify(slope, inc) == MARGINAL

    def test_too_few_points(self):
        with pytest.raises(MeasureLabError) as e:
            fit_log_slope([(1.0, 1.0), (2.0, 2.0)])
        assert e.value.code == "TOO_FEW_POINTS"

    def test_nonpositive_value(self):
        with pytest.raises(MeasureLabError) as e:
            fit_log_slope([(1.0, 1.0), (2.0, -2.0), (4.0, 3.0)])
        assert e.value.code == "NONPOSITIVE_VALUE"

    def test_unsorted_sizes(self):
        with pytest.raises(MeasureLabError) as e:
            fit_log_slope([(2.0, 1.0), (1.0, 2.0), (4.0, 3.0)])
        assert e.value.code == "BAD_GRID"


class TestUvScan:
    def test_divergent_slope_d2(self):
        res = uv_scan(PARAMS, make_lattice(2, 64, 16.0), [0.1], [64, 128, 256, 512])
        assert res.fits[0.1].slope == pytest.approx(0.6, abs=0.1)
        assert res.fits[0.1].verdict == DIVERGENT

    def test_convergent_slope_d1(self):
        res = uv_scan(PARAMS, make_lattice(1, 64, 16.0), [0.3], [64, 128, 256, 512, 1024])
        assert abs(res.fits[0.3].slope) < 0.05
        assert res.fits[0.3].verdict == CONVERGENT

    def test_d3_slopes_both_sides(self):
        res = uv_scan(PARAMS, make_lattice(3, 16, 8.0), [0.25, 0.75], [16, 32, 64, 128])
        assert res.fits[0.25].slope == pytest.approx(1.0, abs=0.15)
        assert abs(res.fits[0.75].slope) < 0.1

    def test_bad_grid(self):
        with pytest.raises(MeasureLabError) as e:
            uv_scan(PARAMS, make_lattice(1, 64, 16.0), [0.1], [64, 32, 128])
        assert e.value.code == "BAD_GRID"
        with pytest.raises(MeasureLabError) as e:
            uv_scan(PARAMS, make_lattice(1, 64, 16.0), [0.1], [64, 65, 128])
        assert e.value.code == "BAD_GRID"

    def test_monte_carlo_confirms_mode_sum(self):
        res = uv_scan(
            PARAMS, make_lattice(1, 16, 8.0), [0.2], [16, 32, 64],
            replicas=400, rng=RngState(2024),
        )
        exact = {size: stat for _, size, stat, err in res.rows if err == 0.0}
        mc_rows = [(size, stat, err) for _, size, stat, err in res.rows if err > 0.0]
        assert len(mc_rows) == 3
        for size, stat, err in mc_rows:
            assert abs(stat - exact[size]) <= 3.0 * err


class TestIrScan:
    def test_convergent_above_threshold_d1(self):
        res = ir_scan(PARAMS, 1, 0.25, [0.5], [16.0, 32.0, 64.0, 128.0, 256.0], 0.25)
        assert abs(res.fits[0.5].slope) < 0.05
        assert res.fits[0.5].verdict == CONVERGENT

    def test_divergent_below_threshold_d1(self):
        res = ir_scan(PARAMS, 1, 0.25, [0.1], [16.0, 32.0, 64.0, 128.0, 256.0], 0.25)
        assert res.fits[0.1].slope == pytest.approx(0.6, abs=0.1)
        assert res.fits[0.1].verdict == DIVERGENT

    def test_boundary_case_d2_marginal(self):
        res = ir_scan(PARAMS, 2, 0.25, [0.5], [16.0, 32.0, 64.0, 128.0], 0.3)
        assert res.fits[0.5].verdict == MARGINAL

    def test_beta_below_threshold_rejected(self):
        with pytest.raises(MeasureLabError) as e:
            ir_scan(PARAMS, 2, 0.25, [0.5], [16.0, 32.0, 64.0], 0.2)
        assert e.value.code == "BAD_GRID"

    def test_non_even_ratio_rejected(self):
        with pytest.raises(MeasureLabError) as e:
            ir_scan(PARAMS, 1, 0.3, [0.5], [16.0, 32.0, 64.0], 0.25)
        assert e.value.code == "BAD_GRID"


class TestHsScan:
    def test_bounded_d1(self):
        res = hs_scan(PARAMS, 1, [0.5], [256, 1024, 4096], [32.0, 64.0, 128.0])
        assert abs(res.fits[0.5].slope) < 0.05
        assert res.fits[0.5].verdict == CONVERGENT

    def test_unbounded_d1_with_rate_from_both_factors(self):
        res = hs_scan(PARAMS, 1, [0.125], [256, 1024, 4096], [32.0, 64.0, 128.0])
        fit = res.fits[0.125]
        assert fit.verdict == DIVERGENT
        # each factor contributes d - 4*alpha = 0.5 on this diagonal
        assert fit.slope == pytest.approx(2 * (1 - 4 * 0.125), abs=0.2)

    def test_bounded_d3(self):
        res = hs_scan(PARAMS, 3, [1.0], [16, 64, 256], [8.0, 16.0, 32.0])
        assert res.fits[1.0].verdict == CONVERGENT

    def test_mismatched_grids(self):
        with pytest.raises(MeasureLabError) as e:
            hs_scan(PARAMS, 1, [0.5], [64, 128], [8.0, 16.0, 32.0])
        assert e.value.code == "BAD_GRID"


class TestSignedMeasureProbe:
    def test_exact_curve_closed_form_and_monotone(self):
        spec = make_lattice(1, 64, 16.0)
        Ns = [64, 128, 256, 512]
        res = signed_measure_probe(PARAMS, spec, Ns, [(-1.0, 1.0)])
        exact = [stat for _, _, stat, err in res.rows if err == 0.0]
        for n, stat in zip(Ns, exact):
            c0 = kernel_at_zero(PARAMS, make_lattice(1, n, 16.0))
            assert stat == pytest.approx(2.0 * math.sqrt(2.0 * c0 / math.pi), rel=1e-12)
        assert all(b > a for a, b in zip(exact, exact[1:]))

    def test_doubling_never_decreases(self):
        spec = make_lattice(2, 16, 8.0)
        res = signed_measure_probe(PARAMS, spec, [16, 32, 64], [(-1.0, 1.0), (-1.0, 1.0)])
        exact = [stat for _, _, stat, err in res.rows if err == 0.0]
        assert all(b > a for a, b in zip(exact, exact[1:]))

    def test_monte_carlo_matches_exact(self):
        spec = make_lattice(1, 64, 16.0)
        res = signed_measure_probe(
            PARAMS, spec, [64, 128, 256], [(-1.0, 1.0)], replicas=1000, rng=RngState(515),
        )
        exact = {size: stat for _, size, stat, err in res.rows if err == 0.0}
        mc = [(size, stat, err) for _, size, stat, err in res.rows if err > 0.0]
        assert len(mc) == 3
        for size, stat, err in mc:
            assert abs(stat - exact[size]) <= 3.0 * err
        assert res.fits[1.0].verdict == DIVERGENT

    def test_empty_region(self):
        spec = make_lattice(1, 64, 16.0)
        with pytest.raises(MeasureLabError) as e:
            signed_measure_probe(PARAMS, spec, [64, 128, 256], [(100.0, 101.0)])
        assert e.value.code == "EMPTY_REGION"
