"""Exponential integrators, trajectory driver and the Picard oracle."""
import numpy as np
import pytest

from gevrey_lab import equations as eq
from gevrey_lab.norms import sobolev_norm
from gevrey_lab.spectral_core import Grid, SpectralField, forward_transform
from gevrey_lab.timestepping import (
    ContractionError,
    ExponentialStepper,
    IntegratorConfig,
    PicardConfig,
    Scheme,
    etdrk2_step,
    exponential_euler_step,
    integrate,
    phi1,
    phi2,
    picard_solve,
)


def sine(grid, amplitude=1.0):
    x = grid.coordinates()[0]
    return forward_transform(amplitude * np.sin(x), grid)


def reference(spec, u0, t, dt):
    return integrate(spec, u0, IntegratorConfig("ETDRK2", dt=dt, t_end=t)).field


def l2(a, b):
    return sobolev_norm(a - b, 0.0, 2.0)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            IntegratorConfig(dt=0.0)
        with pytest.raises(ValueError):
            IntegratorConfig(dt=0.5, t_end=0.1)
        with pytest.raises(ValueError):
            IntegratorConfig(blowup_threshold=0.0)
        with pytest.raises(ValueError):
            IntegratorConfig(diagnostic_stride=0)
        with pytest.raises(ValueError):
            IntegratorConfig(scheme="RK4")
        with pytest.raises(ValueError):
            PicardConfig(horizon_T=0.0)
        with pytest.raises(ValueError):
            PicardConfig(0.1, quadrature_nodes=1)
        assert IntegratorConfig(scheme="ExponentialEuler").scheme is Scheme.ExponentialEuler


class TestPhiFunctions:
    def test_limits(self):
        assert phi1(0.1, np.array([0.0]))[0] == 0.1
        assert phi2(0.1, np.array([0.0]))[0] == pytest.approx(0.05)

    def test_series_branch_is_continuous(self):
        dt = 0.01
        lam = np.array([0.0999, 0.1001])  # dt * lam straddles 1e-3
        exact = dt * (np.expm1(-dt * lam) + dt * lam) / (dt * lam) ** 2
        assert np.allclose(phi2(dt, lam), exact, rtol=1e-9)

    def test_phi1_matches_formula(self):
        lam = np.array([0.5, 3.0, 100.0])
        assert np.allclose(phi1(0.2, lam), (1 - np.exp(-0.2 * lam)) / lam, rtol=1e-14)


class TestSteps:
    @pytest.mark.parametrize("scheme", ["ExponentialEuler", "ETDRK2"])
    def test_linear_mode_is_exact(self, make_field, scheme):
        g = Grid(1, 64)
        spec = eq.fractional_heat(1, 1.5).replace(nonlinear=False)
        u0 = make_field(g, 20)
        dt, n = 0.013, 25
        st = ExponentialStepper(spec, g, dt, scheme)
        c = u0.coeffs
        for _ in range(n):
            c = st.step(c)
        exact = np.exp(-n * dt * g.wavenumber_magnitude ** 1.5) * u0.coeffs
        nz = np.abs(exact) > 1e-300
        assert np.max(np.abs(c[nz] - exact[nz]) / np.abs(exact[nz])) < 1e-13

    def test_zero_mode_forcing(self):
        g = Grid(1, 16)
        st = ExponentialStepper(eq.fractional_heat(1, 2.0), g, 0.05, "ExponentialEuler")
        forcing = np.zeros(16, dtype=complex)
        forcing[0] = 0.7
        st.nonlinear = lambda c: forcing
        c0 = np.zeros(16, dtype=complex)
        c0[0] = 1.5
        assert st.step(c0)[0] == pytest.approx(1.5 + 0.05 * 0.7)

    def test_zero_field_stays_zero(self):
        g = Grid(1, 32)
        out = etdrk2_step(eq.burgers(3), SpectralField.zeros(g), 0.01)
        assert not np.any(out.coeffs)

    def test_zero_corrector_is_exponential_euler(self):
        g = Grid(1, 32)
        u = sine(g, 0.5)
        a = etdrk2_step(eq.burgers(2), u, 0.01, corrector_weight=0.0)
        b = exponential_euler_step(eq.burgers(2), u, 0.01)
        assert np.array_equal(a.coeffs, b.coeffs)

    def test_exponential_euler_local_error_is_second_order(self):
        g = Grid(1, 32)
        spec, u = eq.burgers(2), sine(g)
        errs = []
        for dt in (0.02, 0.01, 0.005):
            errs.append(l2(exponential_euler_step(spec, u, dt), reference(spec, u, dt, dt / 64)))
        ratios = np.array(errs[:-1]) / np.array(errs[1:])
        assert np.all(np.abs(ratios - 4) < 0.5)

    def test_etdrk2_defect_ratio_is_eight(self):
        g = Grid(1, 32)
        spec, u = eq.burgers(3), sine(g)
        errs = []
        for dt in (0.02, 0.01, 0.005):
            errs.append(l2(etdrk2_step(spec, u, dt), reference(spec, u, dt, dt / 64)))
        ratios = np.array(errs[:-1]) / np.array(errs[1:])
        assert np.all(np.abs(ratios - 8) < 1.0)

    @pytest.mark.parametrize("scheme,order", [("ExponentialEuler", 1), ("ETDRK2", 2)])
    def test_global_order(self, scheme, order):
        g = Grid(1, 32)
        spec, u = eq.burgers(3), sine(g)
        dts = np.array([0.02, 0.01, 0.005, 0.0025])
        errs = []
        for dt in dts:
            approx = integrate(spec, u, IntegratorConfig(scheme, dt=dt, t_end=0.4)).field
            errs.append(l2(approx, reference(spec, u, 0.4, dt / 32)))
        slope = np.polyfit(np.log(dts), np.log(errs), 1)[0]
        assert abs(slope - order) <= 0.2


class TestIntegrate:
    def test_t_end_zero(self, make_field):
        g = Grid(1, 32)
        u0 = make_field(g, 5)
        calls = []
        out = integrate(eq.burgers(3), u0, IntegratorConfig(dt=0.1, t_end=0.0),
                        [lambda t, f: calls.append(t)])
        assert out.completed and out.field is u0 and calls == [0.0]

    def test_linear_heat_matches_semigroup(self, make_field):
        g = Grid(2, 32)
        spec = eq.fractional_heat(2, 1.5).replace(nonlinear=False)
        u0 = make_field(g, 10)
        out = integrate(spec, u0, IntegratorConfig(dt=0.01, t_end=0.37))
        exact = np.exp(-0.37 * g.wavenumber_magnitude ** 1.5) * u0.coeffs
        assert out.t == pytest.approx(0.37)
        assert np.max(np.abs(out.field.coeffs - exact)) < 1e-12 * np.max(np.abs(exact))

    def test_hook_schedule(self):
        g = Grid(1, 16)
        times = []
        integrate(eq.burgers(3), sine(g, 0.1), IntegratorConfig(dt=0.1, t_end=0.95,
                                                               diagnostic_stride=3),
                  [lambda t, f: times.append(round(t, 12))])
        assert times == [0.0, 0.3, 0.6, 0.9, 0.95]

    def test_cahn_hilliard_energy_decreases(self, make_field):
        g = Grid(1, 64)
        u0 = make_field(g, 6) * 0.1
        norms = []
        out = integrate(eq.cahn_hilliard_cubic(1), u0, IntegratorConfig(dt=1e-3, t_end=0.5),
                        [lambda t, f: norms.append(sobolev_norm(f, 0.0) ** 2)])
        assert out.completed
        assert np.max(np.diff(norms)) <= 1e-8 * norms[0]

    def test_blowup_is_reported(self):
        g = Grid(1, 32)
        u0 = forward_transform(np.full(32, 5.0), g)
        out = integrate(eq.fractional_heat(1, 2.0, 3), u0, IntegratorConfig(dt=1e-3, t_end=1.0))
        assert out.status == "blowup"
        # u' = u^3 from u = 5 blows up at t = 1/(2 * 25) = 0.02
        assert 0.01 < out.blowup_time < 0.03

    @pytest.mark.parametrize("spec,grid", [(eq.burgers(3), Grid(1, 32)),
                                           (eq.sqg(1.5), Grid(2, 32)),
                                           (eq.cahn_hilliard_cubic(1), Grid(1, 32))])
    def test_zero_mean_preserved(self, make_field, spec, grid):
        u0 = make_field(grid, 5) * 0.3
        means = []
        integrate(spec, u0, IntegratorConfig(dt=1e-3, t_end=0.05),
                  [lambda t, f: means.append(f.mean)])
        assert all(m == 0 for m in means)

    def test_transport_energy_drift_shrinks_with_dt(self, make_field):
        g = Grid(2, 32)
        spec = eq.sqg(1.5).replace(dissipation=False)
        u0 = make_field(g, 5) * 0.2
        e0 = sobolev_norm(u0, 0.0)
        drift = [abs(sobolev_norm(etdrk2_step(spec, u0, dt), 0.0) - e0) for dt in (0.02, 0.01)]
        assert drift[1] < drift[0] / 3.5


class TestPicard:
    def test_linear_converges_in_one_iteration(self, make_field):
        g = Grid(1, 32)
        spec = eq.burgers(3).replace(nonlinear=False)
        u0 = make_field(g, 5)
        res = picard_solve(spec, u0, PicardConfig(0.1, 16))
        assert res.iterations == 1
        exact = np.exp(-0.1 * g.wavenumber_magnitude ** 2) * u0.coeffs
        assert np.allclose(res.final.coeffs, exact, atol=1e-15)

    def test_zero_data(self):
        g = Grid(1, 32)
        res = picard_solve(eq.burgers(3), SpectralField.zeros(g), PicardConfig(0.1, 16))
        assert all(not np.any(f.coeffs) for f in res.fields)

    def test_agrees_with_etdrk2(self):
        g = Grid(1, 64)
        u0 = sine(g, 0.1)
        res = picard_solve(eq.burgers(3), u0, PicardConfig(0.1, 64))
        ref = reference(eq.burgers(3), u0, 0.1, 1e-4)
        assert l2(res.final, ref) < 1e-5

    def test_contraction_ratios(self):
        g = Grid(1, 32)
        res = picard_solve(eq.burgers(3), sine(g, 0.5), PicardConfig(0.2, 32, fp_tolerance=1e-13))
        r = res.contraction_ratios
        assert len(r) >= 2 and np.all(r < 1)

    def test_weighted_stopping_norm(self):
        g = Grid(1, 32)
        res = picard_solve(eq.burgers(3), sine(g, 0.1), PicardConfig(0.1, 32), weighted_beta=0.5)
        plain = picard_solve(eq.burgers(3), sine(g, 0.1), PicardConfig(0.1, 32))
        assert l2(res.final, plain.final) < 1e-10

    def test_large_data_fails_to_contract(self):
        g = Grid(1, 32)
        u0 = forward_transform(np.full(32, 3.0), g)
        with pytest.raises(ContractionError, match="ratio|tolerance"):
            picard_solve(eq.fractional_heat(1, 2.0, 3), u0, PicardConfig(1.0, 32, max_iters=40))
