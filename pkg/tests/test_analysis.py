"""Decay fits, Gevrey monitoring and the analyticity-radius tracker."""
import math

import numpy as np
import pytest

from gevrey_lab.analysis import (
    FourierDecayTracker,
    GevreyMonitor,
    NormRecorder,
    NormSeries,
    fit_power_law,
    valid_window_end,
    verify_decay,
    wraparound_fraction,
)
from gevrey_lab.equations import burgers, fractional_heat, predicted_decay_exponent
from gevrey_lab.norms import GevreyParams, lp_norm, sobolev_norm
from gevrey_lab.spectral_core import (
    Grid,
    SpectralField,
    apply_multiplier,
    forward_transform,
    inverse_transform,
    semigroup_multiplier,
)
from gevrey_lab.timestepping import IntegratorConfig, integrate


def series(t, v, label="s"):
    return NormSeries(np.asarray(t, float), np.asarray(v, float), label)


class TestNormSeries:
    def test_rejects_nan_and_unsorted(self):
        with pytest.raises(ValueError, match="NaN"):
            series([1, 2], [1, math.nan])
        with pytest.raises(ValueError, match="increasing"):
            series([2, 1], [1, 1])
        with pytest.raises(ValueError, match="negative"):
            series([1, 2], [1, -1])
        with pytest.raises(ValueError):
            series([1, 2, 3], [1, 2])

    def test_window_is_inclusive(self):
        s = series(np.arange(10), np.ones(10))
        assert list(s.window((2, 5)).times) == [2, 3, 4, 5]


class TestPowerLawFit:
    def test_exact_power_law(self):
        t = np.geomspace(0.1, 100, 40)
        fit = fit_power_law(series(t, 3 * t ** -0.75))
        assert fit.fitted_exponent == pytest.approx(0.75, abs=1e-12)
        assert fit.intercept == pytest.approx(math.log(3), abs=1e-12)
        assert fit.r_squared == pytest.approx(1.0)

    def test_constant_series(self):
        t = np.linspace(1, 10, 20)
        fit = fit_power_law(series(t, np.full(20, 2.0)))
        assert fit.fitted_exponent == pytest.approx(0.0, abs=1e-12)
        assert fit.r_squared == 1.0

    def test_perturbed_series(self, rng):
        t = np.geomspace(1, 100, 60)
        v = t ** -1.25 * (1 + 0.01 * rng.standard_normal(60))
        fit = fit_power_law(series(t, v))
        assert fit.fitted_exponent == pytest.approx(1.25, abs=0.02)
        assert fit.r_squared > 0.99

    def test_window_restricts_samples(self):
        t = np.geomspace(0.01, 100, 50)
        v = np.where(t < 1, 1.0, t ** -2.0)
        assert fit_power_law(series(t, v), (1.0, 100.0)).fitted_exponent == pytest.approx(2.0)

    def test_needs_five_positive_samples(self):
        with pytest.raises(ValueError, match="5 samples"):
            fit_power_law(series([1, 2, 3, 4], [1, 1, 1, 1]))
        with pytest.raises(ValueError, match="positive"):
            fit_power_law(series([0, 1, 2, 3, 4], [1, 1, 1, 1, 1]))
        with pytest.raises(ValueError, match="positive"):
            fit_power_law(series([1, 2, 3, 4, 5], [1, 1, 0, 1, 1]))


class TestVerifyDecay:
    spec = fractional_heat(dim=1, kappa=2.0, n=3)

    def test_power_law_verdict(self):
        predicted = predicted_decay_exponent(self.spec, 0.5, 2.0)
        assert predicted == pytest.approx(0.5)
        t = np.geomspace(1, 100, 30)
        good = verify_decay(series(t, 2 * t ** -0.52), self.spec, 0.5, 2.0, 0.05)
        bad = verify_decay(series(t, 2 * t ** -0.6), self.spec, 0.5, 2.0, 0.05)
        assert good.verdict and not bad.verdict
        assert good.details["beta_c"] == pytest.approx(-0.5)

    def test_zeta_at_or_below_critical(self):
        t = np.geomspace(1, 100, 30)
        with pytest.raises(ValueError, match="beta_c"):
            verify_decay(series(t, t ** -1.0), self.spec, -0.5, 2.0, 0.05)

    def test_unknown_mode(self):
        t = np.geomspace(1, 100, 30)
        with pytest.raises(ValueError, match="mode"):
            verify_decay(series(t, t ** -1.0), self.spec, 0.5, 2.0, 0.05, mode="two_sided")

    def test_one_sided_accepts_exponential_decay(self, make_field):
        g = Grid(1, 64)
        u0 = make_field(g, 10)
        times = np.linspace(0.01, 5, 60)
        vals = [sobolev_norm(apply_multiplier(u0, semigroup_multiplier(t, 2.0)), 0.5)
                for t in times]
        fit = verify_decay(series(times, vals), self.spec, 0.5, 2.0, 0.05, mode="one_sided")
        assert fit.verdict
        assert fit.details["overall_max"] <= fit.details["initial_max"] * (1 + 1e-12)

    def test_one_sided_rejects_growth(self):
        t = np.geomspace(0.1, 100, 40)
        fit = verify_decay(series(t, t ** 0.1), self.spec, 0.5, 2.0, 0.05, mode="one_sided")
        assert not fit.verdict


class TestGevreyMonitor:
    def test_zero_field(self):
        g = Grid(1, 32)
        mon = GevreyMonitor(GevreyParams(kappa=2.0))
        for t in (0.0, 0.5, 1.0):
            mon(t, SpectralField.zeros(g))
        rep = mon.report()
        assert rep.supremum == 0.0 and rep.reference == 0.0 and rep.bounded

    def test_linear_flow_stays_below_twice_initial(self, make_field):
        g = Grid(1, 64)
        u0 = make_field(g, 20)
        mon = GevreyMonitor(GevreyParams(kappa=2.0, weight_constant=0.5))
        for t in np.linspace(0, 5, 26):
            mon(t, apply_multiplier(u0, semigroup_multiplier(t, 2.0)))
        rep = mon.report()
        assert rep.bounded and rep.supremum <= rep.reference * 1.0000001
        assert rep.truncated_at is None

    def test_overflow_truncates(self, make_field):
        g = Grid(1, 2048)
        u0 = make_field(g, 10)
        mon = GevreyMonitor(GevreyParams(kappa=1.0, weight_constant=1.0))
        for t in (0.0, 0.1, 10.0, 20.0):
            mon(t, u0)
        assert mon.truncated_at == 10.0
        assert len(mon.values) == 2


class TestFourierTracker:
    def test_kappa_one_control(self):
        g = Grid(1, 64)
        u0 = SpectralField(g, np.ones(64, dtype=complex))
        tr = FourierDecayTracker(noise_floor=1e-24)
        times = [0.1, 0.2, 0.4, 0.8]
        for t in times:
            tr(t, apply_multiplier(u0, semigroup_multiplier(t, 1.0)))
        t, rho = tr.pre_saturation()
        assert len(t) == 4
        np.testing.assert_allclose(rho, times, rtol=1e-10)
        v = tr.verdict(1.0)
        assert v["positive"] and v["nondecreasing"] and v["c"] == pytest.approx(1.0)

    def test_saturation_is_sticky(self):
        g = Grid(1, 64)
        u0 = SpectralField(g, np.ones(64, dtype=complex))
        tr = FourierDecayTracker(noise_floor=1e-6)
        for t in (0.1, 0.2, 1.0, 0.2):
            tr(t, apply_multiplier(u0, semigroup_multiplier(t, 1.0)))
        # at t = 1 the line reaches the floor near |k| = 14, short of the top shell
        assert tr.saturated == [False, False, True, True]
        assert tr.saturation_time == 1.0

    def test_too_few_shells_counts_as_saturated(self):
        g = Grid(1, 32)
        c = np.zeros(32, dtype=complex)
        c[1] = c[-1] = 1.0
        tr = FourierDecayTracker()
        tr(0.0, SpectralField(g, c))
        assert tr.saturated == [True] and math.isnan(tr.rho[0])
        assert tr.verdict(2.0)["samples"] == 0


class TestWraparound:
    def test_centered_gaussian_then_spread(self):
        g = Grid(1, 512, 100.0)
        x = g.coordinates()[0]
        narrow = forward_transform(np.exp(-((x - 50) ** 2)), g)
        wide = forward_transform(np.exp(-((x - 50) ** 2) / 800), g)
        assert wraparound_fraction(narrow) < 1e-12
        assert wraparound_fraction(wide) > 0.01

    def test_valid_window_end(self):
        t = [0, 1, 2, 3, 4]
        assert valid_window_end(t, [0, 0, 0.005, 0.02, 0.5]) == 2
        assert valid_window_end(t, [0] * 5) == 4
        assert valid_window_end(t, [0.5] * 5) == 0


class TestLinearFlowMonotone:
    @pytest.mark.parametrize("kappa", [1.5, 2.0, 4.0])
    def test_norms_nonincreasing_without_nonlinearity(self, make_field, kappa):
        g = Grid(1, 64)
        spec = fractional_heat(1, kappa).replace(nonlinear=False)
        u0 = make_field(g, 20)
        recs = [NormRecorder(lambda f, b=b: sobolev_norm(f, b), f"H{b}") for b in (0.0, 1.0, 2.0)]
        recs.append(NormRecorder(lambda f: lp_norm(inverse_transform(f), math.inf, g), "Linf"))
        integrate(spec, u0, IntegratorConfig(dt=0.01, t_end=1.0), recs)
        for r in recs[:3]:
            assert np.all(np.diff(r.values) <= 1e-14 * r.values[0]), r.label
        if kappa == 2.0:
            # the heat kernel is positive, so sup norms cannot grow either
            assert np.all(np.diff(recs[3].values) <= 1e-12)

    def test_burgers_energy_decreases(self, make_field):
        g = Grid(1, 64)
        u0 = make_field(g, 8)
        u0 = u0 * (0.1 / sobolev_norm(u0, 0.0))
        rec = NormRecorder(lambda f: sobolev_norm(f, 0.0))
        integrate(burgers(), u0, IntegratorConfig(dt=1e-3, t_end=0.5, diagnostic_stride=10), [rec])
        assert np.all(np.diff(rec.values) < 0)
