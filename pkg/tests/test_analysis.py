import numpy as np
import pytest
from scipy.stats import norm

from firmgrowth.analysis import (
    equal_count_bins,
    binned_volatility_moments,
    hill_estimator,
    hill_profile,
    kde_gaussian,
    ks_2sample,
    ks_distance,
    loglog_ols,
    mode_count,
    normal_reference_bandwidth,
    rescale_collapse,
    weighted_loglog_slope,
)
from firmgrowth.distributions import ParetoLaw, pareto_sample


class TestEqualCountBins:
    def test_two_bins_of_two(self):
        assign = equal_count_bins([3.0, 1.0, 4.0, 2.0], 2)
        assert assign.tolist() == [1, 0, 1, 0]

    def test_paper_sized_split(self):
        rng = np.random.default_rng(0)
        assign = equal_count_bins(rng.random(24233), 25)
        counts = np.bincount(assign, minlength=25)
        assert sorted(set(counts.tolist())) == [969, 970]

    def test_all_equal_keys_stable(self):
        assign = equal_count_bins(np.ones(10), 5)
        assert assign.tolist() == [0, 0, 1, 1, 2, 2, 3, 3, 4, 4]

    def test_partition(self):
        rng = np.random.default_rng(1)
        keys = rng.random(1000)
        assign = equal_count_bins(keys, 7)
        assert np.bincount(assign).sum() == 1000
        # bin boundaries are monotone in the key
        for b in range(6):
            assert keys[assign == b].max() <= keys[assign == b + 1].min() + 1e-15

    def test_too_many_bins(self):
        with pytest.raises(ValueError):
            equal_count_bins([1.0, 2.0], 3)


class TestBinnedMoments:
    def test_single_bin_second_moment(self):
        stats = binned_volatility_moments([1.0, 2.0], [1.0, 2.0], [2], n_bins=1)
        assert stats[0].moments[2] == pytest.approx(2.5)
        assert stats[0].n_firms == 2

    def test_deterministic_power_law_reproduced(self):
        # one firm per bin: the binned points sit exactly on the input curve
        sizes = np.logspace(0, 2, 12)
        vols = 3.0 * sizes**-0.2
        stats = binned_volatility_moments(sizes, vols, [1], n_bins=12)
        ms = np.array([b.mean_size for b in stats])
        mv = np.array([b.moments[1] for b in stats])
        assert mv == pytest.approx(3.0 * ms**-0.2, rel=1e-12)
        assert loglog_ols(ms, mv).slope == pytest.approx(-0.2, abs=1e-12)
        # with coarse bins over a light-tailed key the distortion stays mild
        rng = np.random.default_rng(2)
        big = np.sort(1.0 + 99.0 * rng.random(5000))
        stats = binned_volatility_moments(big, 3.0 * big**-0.2, [1], n_bins=25)
        fit = loglog_ols([b.mean_size for b in stats], [b.moments[1] for b in stats])
        assert fit.slope == pytest.approx(-0.2, abs=0.01)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            binned_volatility_moments([1.0], [1.0, 2.0], [1])

    def test_within_bin_permutation_invariance(self):
        sizes = np.array([1.0, 1.1, 5.0, 5.1])
        vols = np.array([0.2, 0.4, 0.6, 0.8])
        a = binned_volatility_moments(sizes, vols, [1, 2], n_bins=2)
        b = binned_volatility_moments(sizes[[1, 0, 3, 2]], vols[[1, 0, 3, 2]], [1, 2], n_bins=2)
        for x, y in zip(a, b):
            assert x.moments == pytest.approx(y.moments)


class TestLogLogOls:
    def test_exact_power_law(self):
        x = np.array([1.0, 2.0, 4.0, 8.0, 16.0])
        fit = loglog_ols(x, 10.0 * x**-0.5)
        assert fit.slope == pytest.approx(-0.5, abs=1e-12)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_two_points_rejected(self):
        with pytest.raises(ValueError):
            loglog_ols([1.0, 2.0], [1.0, 2.0])

    def test_nonpositive_rejected(self):
        with pytest.raises(ValueError):
            loglog_ols([1.0, 2.0, 3.0], [1.0, -2.0, 3.0])

    def test_slope_invariant_under_y_scaling(self):
        rng = np.random.default_rng(3)
        x = np.linspace(1, 50, 20)
        y = 2.0 * x**-0.7 * np.exp(0.05 * rng.standard_normal(20))
        a = loglog_ols(x, y)
        b = loglog_ols(x, 137.0 * y)
        assert a.slope == pytest.approx(b.slope, rel=1e-12)
        assert a.intercept != b.intercept

    def test_weighted_slope_matches_unweighted_for_equal_weights(self):
        x = np.array([1.0, 3.0, 9.0, 27.0])
        y = 5.0 * x**-0.3
        assert weighted_loglog_slope(x, y, np.ones(4)) == pytest.approx(
            loglog_ols(x, y).slope, rel=1e-12
        )


class TestKde:
    def test_single_sample_rejected(self):
        with pytest.raises(ValueError):
            kde_gaussian([1.0], np.linspace(0, 2, 10))

    def test_zero_dispersion_rejected(self):
        with pytest.raises(ValueError):
            kde_gaussian([1.0, 1.0, 1.0], np.linspace(0, 2, 10))

    def test_standard_normal_accuracy_large_sample(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal(10**6)
        grid = np.linspace(-3, 3, 1001)
        est = kde_gaussian(x, grid)
        assert np.max(np.abs(est.values - norm.pdf(grid))) < 0.01

    def test_integrates_to_one(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal(5000)
        h = normal_reference_bandwidth(x)
        grid = np.linspace(x.min() - 5 * h, x.max() + 5 * h, 2000)
        est = kde_gaussian(x, grid)
        assert np.trapezoid(est.values, grid) == pytest.approx(1.0, abs=0.01)

    def test_nonnegative_and_symmetric(self):
        rng = np.random.default_rng(6)
        half = rng.standard_normal(500)
        x = np.concatenate([half, -half])  # exactly symmetric about 0
        grid = np.linspace(-4, 4, 801)
        est = kde_gaussian(x, grid)
        assert np.all(est.values >= 0)
        assert np.max(np.abs(est.values - est.values[::-1])) < 1e-10

    def test_binned_path_matches_exact_path(self):
        rng = np.random.default_rng(7)
        x = rng.standard_normal(30_000)
        grid = np.linspace(-3, 3, 501)
        exact = kde_gaussian(x, grid, bandwidth=0.2)
        from firmgrowth.analysis import _kde_binned

        binned = _kde_binned(x, grid, 0.2)
        assert np.max(np.abs(exact.values - binned)) < 5e-5

    def test_bandwidth_matches_rule(self):
        rng = np.random.default_rng(8)
        x = rng.standard_normal(4096)
        sd = x.std(ddof=1)
        q75, q25 = np.percentile(x, [75, 25])
        expect = 1.06 * min(sd, (q75 - q25) / 1.34) * 4096**-0.2
        assert normal_reference_bandwidth(x) == pytest.approx(expect, rel=1e-12)


class TestRescaleCollapse:
    def test_simple_bin(self):
        out = rescale_collapse([[2.0, 4.0]])
        assert out[0] == pytest.approx([2 / 3, 4 / 3])

    def test_output_means_are_one(self):
        rng = np.random.default_rng(9)
        bins = [rng.random(50) + 0.1 for _ in range(4)]
        for r in rescale_collapse(bins):
            assert r.mean() == pytest.approx(1.0, rel=1e-12)

    def test_scale_invariance(self):
        rng = np.random.default_rng(10)
        bins = [rng.random(30) + 0.1]
        a = rescale_collapse(bins)[0]
        b = rescale_collapse([bins[0] * 7.3])[0]
        assert a == pytest.approx(b, rel=1e-12)

    def test_empty_bin_rejected(self):
        with pytest.raises(ValueError):
            rescale_collapse([np.array([])])


class TestHill:
    def test_known_pareto(self):
        rng = np.random.default_rng(11)
        draws = pareto_sample(ParetoLaw(1.0, 1.5), 1.0 - rng.random(10**6))
        index, se = hill_estimator(draws, 0.01)
        assert index == pytest.approx(1.5, abs=0.1)
        assert se == pytest.approx(index / 100, rel=1e-12)

    def test_thin_tail_has_no_plateau(self):
        rng = np.random.default_rng(12)
        draws = rng.exponential(size=10**5) + 1e-9
        prof = hill_profile(draws, fractions=(0.005, 0.05))
        # exponential tails: the apparent index grows as the fraction shrinks
        assert prof[0.005][0] > prof[0.05][0] * 1.3

    def test_all_equal_rejected(self):
        with pytest.raises(ValueError):
            hill_estimator(np.ones(10**4), 0.01)

    def test_too_few_tail_samples(self):
        with pytest.raises(ValueError):
            hill_estimator(np.arange(1, 101, dtype=float), 0.1)


class TestKs:
    def test_single_sample_at_median(self):
        assert ks_distance([0.0], lambda x: norm.cdf(x)) == pytest.approx(0.5)

    def test_uniform_large_sample(self):
        rng = np.random.default_rng(13)
        assert ks_distance(rng.random(10**5), lambda x: np.clip(x, 0, 1)) < 0.01

    def test_root_n_scaling(self):
        rng = np.random.default_rng(14)
        d_small = np.median(
            [ks_distance(rng.random(100), lambda x: np.clip(x, 0, 1)) for _ in range(30)]
        )
        d_big = np.median(
            [ks_distance(rng.random(10000), lambda x: np.clip(x, 0, 1)) for _ in range(30)]
        )
        assert d_big < d_small / 5

    def test_two_sample_identical(self):
        x = np.linspace(0, 1, 50)
        assert ks_2sample(x, x) == pytest.approx(0.0, abs=1e-12)

    def test_two_sample_disjoint(self):
        assert ks_2sample([0.0, 1.0], [5.0, 6.0]) == pytest.approx(1.0)


class TestModeCount:
    def test_standard_normal_unimodal(self):
        rng = np.random.default_rng(15)
        n_modes, p = mode_count(rng.standard_normal(600), 199, np.random.default_rng(16))
        assert n_modes == 1
        assert p > 0.1

    def test_separated_mixture_bimodal(self):
        rng = np.random.default_rng(17)
        x = np.concatenate([rng.normal(-3, 1, 400), rng.normal(3, 1, 400)])
        n_modes, p = mode_count(x, 199, np.random.default_rng(18))
        assert n_modes == 2
        assert p < 0.01

    def test_constant_plus_noise(self):
        rng = np.random.default_rng(19)
        x = 1.0 + 1e-6 * rng.standard_normal(300)
        n_modes, _ = mode_count(x, 49, np.random.default_rng(20))
        assert n_modes == 1

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            mode_count(np.arange(50, dtype=float), 10, np.random.default_rng(0))
