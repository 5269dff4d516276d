"""
Tests for ensemble sampling, moments, variance sums, KS distances and the
window sandwich.
"""

import math

import numpy as np
import pytest
from scipy import integrate

from src.models.counting import AnnulusParams
from src.models.lattice import EllipseLattice
from src.models.statistics import (
    WeightWindow,
    Which,
    WindowKind,
    asymptotic_sigma2,
    diagonal_D_sum,
    empirical_moment,
    gaussian_target,
    jackknife_stderr,
    ks_distance,
    mean_squared_difference,
    mean_with_stderr,
    resolve_sigma,
    sample_ensemble,
    sigma2_ratio_trend,
    theoretical_sigma2,
    unsmoothing_gap,
    window_sandwich,
)
from src.utils.errors import DomainError, UsageError

SMALL = AnnulusParams(T=2000.0, L=10.0, M=1000.0)


class TestWindows:
    @pytest.mark.parametrize("kind", list(WindowKind))
    def test_unit_mass(self, kind):
        assert WeightWindow(kind).mass() == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("epsilon", [0.05, 0.1])
    def test_envelope_masses(self, epsilon):
        upper = WeightWindow.upper_envelope(epsilon)
        lower = WeightWindow.lower_envelope(epsilon)
        mass_upper, _ = integrate.quad(lambda x: float(upper.raw_profile(x)), *upper.support, limit=200)
        mass_lower, _ = integrate.quad(lambda x: float(lower.raw_profile(x)), *lower.support, limit=200)
        assert mass_upper == pytest.approx(1.0 + epsilon, abs=1e-8)
        assert mass_lower == pytest.approx(1.0 - epsilon, abs=1e-8)

    def test_envelopes_bracket_indicator(self):
        x = np.linspace(0.8, 2.2, 1401)
        indicator = WeightWindow(WindowKind.INDICATOR_1_2).raw_profile(x)
        assert np.all(WeightWindow.lower_envelope(0.05).raw_profile(x) <= indicator)
        assert np.all(WeightWindow.upper_envelope(0.05).raw_profile(x) >= indicator)

    def test_gaussian_sample_mean(self):
        rng = np.random.default_rng(5)
        x = WeightWindow(WindowKind.SMOOTH_GAUSSIAN, center=1.5, width=0.25).sample(rng, 50_000)
        assert abs(x.mean() - 1.5) <= 3 * jackknife_stderr(x)
        assert np.all(x > 0)

    def test_plateau_samples_in_support(self):
        window = WeightWindow.upper_envelope(0.1)
        x = window.sample(np.random.default_rng(1), 5000)
        lo, hi = window.support
        assert len(x) == 5000
        assert np.all((x >= lo) & (x <= hi))

    def test_invalid(self):
        with pytest.raises(UsageError):
            WeightWindow(WindowKind.SMOOTH_GAUSSIAN, width=0.0)
        with pytest.raises(ValueError):
            WeightWindow("triangular")


class TestEnsemble:
    def test_constant_average(self, kernel, lattice_e):
        ens = sample_ensemble(lattice_e, SMALL, WeightWindow(), 500, seed=1, which=Which.SMOOTH, kernel=kernel)
        mean, stderr = ens.average(lambda t: 1.0)
        assert mean == 1.0
        assert stderr == 0.0

    def test_thread_count_does_not_change_samples(self, kernel, lattice_e):
        kwargs = dict(which=Which.BOTH, kernel=kernel, chunk_size=256)
        one = sample_ensemble(lattice_e, SMALL, WeightWindow(), 1500, 42, threads=1, **kwargs)
        four = sample_ensemble(lattice_e, SMALL, WeightWindow(), 1500, 42, threads=4, **kwargs)
        np.testing.assert_array_equal(one.t, four.t)
        np.testing.assert_array_equal(one.s_sharp, four.s_sharp)
        np.testing.assert_array_equal(one.s_smooth, four.s_smooth)

    def test_seed_changes_samples(self, kernel, lattice_e):
        a = sample_ensemble(lattice_e, SMALL, WeightWindow(), 100, 1, kernel=kernel)
        b = sample_ensemble(lattice_e, SMALL, WeightWindow(), 100, 2, kernel=kernel)
        assert not np.array_equal(a.t, b.t)

    def test_progress_callback_counts_samples(self, kernel, lattice_e):
        seen = []
        sample_ensemble(lattice_e, SMALL, WeightWindow(), 1000, 3, kernel=kernel, chunk_size=300,
                        threads=2, on_chunk=seen.append)
        assert sorted(seen) == [100, 300, 300, 300]

    def test_unrequested_kind(self, lattice_e):
        ens = sample_ensemble(lattice_e, SMALL, WeightWindow(), 50, 0, which=Which.SHARP)
        assert np.all(np.isnan(ens.s_smooth))
        with pytest.raises(UsageError):
            ens.values(Which.SMOOTH)
        assert list(ens.to_frame().columns) == ["t", "S_sharp", "S_smooth"]

    def test_invalid(self, kernel, lattice_e):
        with pytest.raises(DomainError):
            sample_ensemble(lattice_e, SMALL, WeightWindow(), 0, 0, kernel=kernel)
        with pytest.raises(UsageError):
            sample_ensemble(lattice_e, SMALL, WeightWindow(), 10, 0, which=Which.SMOOTH)

    def test_stderr_shrinks_with_sample_size(self, kernel, lattice_e):
        sigma = math.sqrt(asymptotic_sigma2(lattice_e, SMALL.L))
        small = sample_ensemble(lattice_e, SMALL, WeightWindow(), 4000, 9, kernel=kernel)
        large = sample_ensemble(lattice_e, SMALL, WeightWindow(), 8000, 9, kernel=kernel)
        ratio = empirical_moment(small, 2, sigma).stderr / empirical_moment(large, 2, sigma).stderr
        assert 1.2 <= ratio <= 1.7

    @pytest.mark.slow
    def test_smooth_mean_is_small(self, kernel, lattice_e):
        params = AnnulusParams(T=1e4, L=20.0, M=8000.0)
        ens = sample_ensemble(lattice_e, params, WeightWindow(), 200_000, 0, kernel=kernel)
        mean, stderr = mean_with_stderr(ens.values(Which.SMOOTH))
        assert abs(mean) <= 3 * stderr


class TestMoments:
    def test_gaussian_targets(self):
        assert [gaussian_target(m) for m in range(1, 7)] == [0.0, 1.0, 0.0, 3.0, 0.0, 15.0]

    def test_constant_samples(self):
        report = empirical_moment(np.full(100, 0.7), 2, 0.7)
        assert report.empirical == pytest.approx(1.0, abs=1e-15)
        assert report.stderr == pytest.approx(0.0, abs=1e-15)
        assert report.gaussian_target == 1.0

    def test_normal_samples(self):
        z = np.random.default_rng(2).standard_normal(200_000)
        for m in (2, 4):
            report = empirical_moment(z, m, 1.0)
            assert abs(report.empirical - gaussian_target(m)) <= 4 * report.stderr

    def test_jackknife_matches_closed_form(self):
        x = np.random.default_rng(4).normal(size=1000)
        assert jackknife_stderr(x) == pytest.approx(x.std(ddof=1) / math.sqrt(len(x)), rel=1e-10)

    def test_invalid(self):
        with pytest.raises(DomainError):
            empirical_moment(np.ones(10), 0, 1.0)
        with pytest.raises(DomainError):
            empirical_moment(np.ones(10), 2, 0.0)
        with pytest.raises(DomainError):
            empirical_moment(np.array([]), 2, 1.0)

    @pytest.mark.slow
    def test_gaussian_moments_of_smoothed_remainder(self, kernel, lattice_e):
        params = AnnulusParams(T=1e4, L=30.0)
        sigma = resolve_sigma(lattice_e, kernel, params.L, params.M, "theoretical")
        ens = sample_ensemble(lattice_e, params, WeightWindow(), 100_000, 0, kernel=kernel)
        assert 0.85 <= empirical_moment(ens, 2, sigma).empirical <= 1.15
        m3 = empirical_moment(ens, 3, sigma)
        d3 = diagonal_D_sum(lattice_e, kernel, params.L, params.M, 3, sigma)
        assert abs(abs(m3.empirical) - d3) <= 3 * m3.stderr + math.log(params.L) / params.L
        assert 2.6 <= empirical_moment(ens, 4, sigma).empirical <= 3.4
        assert ks_distance(ens, sigma) <= 0.02


class TestVarianceSums:
    def test_empty_truncation(self, kernel):
        assert theoretical_sigma2(EllipseLattice(1.0), kernel, 10.0, 0.25) == 0.0

    def test_near_leading_term(self, kernel, lattice_e):
        L = 30.0
        value = theoretical_sigma2(lattice_e, kernel, L, L ** 3)
        leading = asymptotic_sigma2(lattice_e, L)
        assert leading == pytest.approx(8 * math.pi / (math.e * 30), rel=1e-12)
        # finite-L damping leaves the sum near 0.77 of the leading term
        assert 0.7 <= value / leading <= 0.85

    def test_ratio_rises_toward_leading_term(self, kernel, lattice_e):
        ratios = list(sigma2_ratio_trend(lattice_e, kernel, [30.0, 60.0, 100.0]).values())
        assert all(b > a for a, b in zip(ratios, ratios[1:]))
        assert ratios[-1] < 1.0
        assert ratios[-1] - ratios[0] >= 0.05

    def test_inverse_width_law(self, kernel, lattice_e):
        ratio = theoretical_sigma2(lattice_e, kernel, 30.0, 30.0 ** 3) / theoretical_sigma2(lattice_e, kernel, 60.0, 60.0 ** 3)
        assert 1.7 <= ratio <= 2.3

    def test_resolve_sigma(self, kernel, lattice_e):
        assert resolve_sigma(lattice_e, kernel, 30.0, 27000.0) == pytest.approx(math.sqrt(asymptotic_sigma2(lattice_e, 30.0)))
        with pytest.raises(UsageError):
            resolve_sigma(lattice_e, kernel, 30.0, 27000.0, "empirical")

    def test_single_frequency_sum_vanishes(self, kernel, lattice_e):
        assert diagonal_D_sum(lattice_e, kernel, 10.0, 1000.0, 1, 1.0) == 0.0

    @pytest.mark.parametrize("L", [10.0, 30.0])
    def test_pair_sum_reproduces_variance(self, kernel, lattice_e, L):
        M = L ** 3
        sigma2 = theoretical_sigma2(lattice_e, kernel, L, M)
        value = diagonal_D_sum(lattice_e, kernel, L, M, 2, math.sqrt(sigma2))
        assert value == pytest.approx(1.0, rel=1e-6)

    def test_pair_sum_kernel_readings(self, kernel, lattice_e):
        L = 30.0
        M = L ** 3
        sigma = math.sqrt(theoretical_sigma2(lattice_e, kernel, L, M))
        scaled = diagonal_D_sum(lattice_e, kernel, L, M, 2, sigma)
        literal = diagonal_D_sum(lattice_e, kernel, L, M, 2, sigma, kernel_reading="literal")
        assert scaled == pytest.approx(1.0, rel=1e-6)
        # the literal reading undamps the higher harmonics and overshoots by a few percent
        assert 1.0 + 1e-3 < literal < 1.2

    def test_triple_sum_is_small(self, kernel, lattice_e):
        L = 30.0
        sigma = math.sqrt(theoretical_sigma2(lattice_e, kernel, L, L ** 3))
        assert diagonal_D_sum(lattice_e, kernel, L, L ** 3, 3, sigma) <= 10 * math.log(L) / L

    def test_invalid_order(self, kernel, lattice_e):
        with pytest.raises(DomainError):
            diagonal_D_sum(lattice_e, kernel, 10.0, 1000.0, 7, 1.0)
        with pytest.raises(UsageError):
            diagonal_D_sum(lattice_e, kernel, 10.0, 1000.0, 2, 1.0, kernel_reading="other")


class TestKolmogorovSmirnov:
    def test_normal_calibration(self):
        z = np.random.default_rng(8).standard_normal(100_000)
        assert ks_distance(z, 1.0) <= 0.01

    def test_constant_sample(self):
        assert ks_distance(np.zeros(500), 1.0) >= 0.5

    def test_too_few_samples(self):
        with pytest.raises(DomainError):
            ks_distance(np.zeros(50), 1.0)


class TestUnsmoothing:
    def test_self_difference(self):
        x = np.random.default_rng(0).normal(size=100)
        assert mean_squared_difference(x, x) == (0.0, 0.0)

    def test_gap_is_positive(self, kernel, lattice_sqrt2):
        params = AnnulusParams(T=2000.0, L=10.0, M=1000.0)
        gap, stderr = unsmoothing_gap(lattice_sqrt2, kernel, params, WeightWindow(), 1000, 0, return_stderr=True)
        assert gap > 0
        assert stderr > 0

    @pytest.mark.slow
    def test_gap_decays_with_M_and_constant_is_stable(self, kernel, lattice_sqrt2):
        window = WeightWindow()
        low = unsmoothing_gap(lattice_sqrt2, kernel, AnnulusParams(T=5000.0, L=20.0, M=1e3), window, 20_000, 0)
        high = unsmoothing_gap(lattice_sqrt2, kernel, AnnulusParams(T=5000.0, L=20.0, M=1e4), window, 20_000, 0)
        doubled = unsmoothing_gap(lattice_sqrt2, kernel, AnnulusParams(T=10000.0, L=20.0, M=1e4), window, 20_000, 0)
        assert low / high >= 2.0
        # C = gap·√M at fixed M stays put when T doubles
        assert 0.7 <= doubled / high <= 1.4


class TestWindowSandwich:
    def test_sandwich_holds(self, kernel, lattice_e):
        sigma = math.sqrt(asymptotic_sigma2(lattice_e, SMALL.L))
        result = window_sandwich(lattice_e, kernel, SMALL, sigma, n_samples=3000, seed=5, epsilon=0.1)
        assert result["passed"]
        assert 0.0 < result["p_indicator"] < 1.0
        assert set(result["stderr"]) == {"indicator", "lower", "upper"}
