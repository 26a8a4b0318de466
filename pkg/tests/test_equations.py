"""Equation registry, nonlinear terms and critical exponents."""
import math

import numpy as np
import pytest

from gevrey_lab import equations as eq
from gevrey_lab.equations import (
    EquationName,
    EquationSpec,
    check_admissibility,
    compute_beta_c,
    evaluate_nonlinearity,
    predicted_decay_exponent,
)
from gevrey_lab.oracles import brute_force_nonlinearity
from gevrey_lab.spectral_core import Grid, SpectralField, forward_transform

INSTANCES = [
    (eq.fractional_heat(1, 2.0, 3, alpha=0.7), Grid(1, 32), 3),
    (eq.fractional_heat(2, 1.5, 3), Grid(2, 32), 3),
    (eq.burgers(3), Grid(1, 32), 3),
    (eq.burgers(2), Grid(1, 32), 5),
    (eq.sqg(1.5), Grid(2, 32), 5),
    (eq.nse2d_vorticity(), Grid(2, 32), 5),
    (eq.cahn_hilliard_cubic(1, 1.3), Grid(1, 32), 3),
    (eq.cahn_hilliard_cubic(2, 0.5), Grid(2, 32), 3),
    (eq.cahn_hilliard_general(1, (0.2, -0.1, 1.0, 0.0, 0.5)), Grid(1, 32), 2),
]
IDS = [f"{s.name.value}-d{g.dim}-n{s.degree_n}" for s, g, _ in INSTANCES]


class TestSpec:
    def test_alpha_length_must_match_degree(self):
        with pytest.raises(ValueError):
            EquationSpec(EquationName.BurgersN, 2.0, 1, 3, (1.0, 0.0))

    def test_negative_orders_rejected(self):
        with pytest.raises(ValueError):
            EquationSpec(EquationName.BurgersN, 2.0, 1, 2, (1.0, -1.0, 0.0))

    def test_kappa_one_is_calculator_only(self):
        spec = eq.fractional_heat(1, 1.0)
        assert not spec.simulable
        assert compute_beta_c(spec, 2.0) == pytest.approx(0.5 - 0.5)

    def test_cahn_hilliard_general_validation(self):
        with pytest.raises(ValueError):
            eq.cahn_hilliard_general(1, (0.0, 1.0))
        with pytest.raises(ValueError):
            eq.cahn_hilliard_general(1, (0.0, 0.0, -1.0))
        spec = eq.cahn_hilliard_general(1, (0.1, 0.0, 1.0))
        assert spec.degree_n == 3 and spec.kappa == 4.0

    def test_nse3d_is_not_simulated(self):
        g = Grid(2, 16)
        with pytest.raises(NotImplementedError):
            evaluate_nonlinearity(eq.nse3d(), SpectralField.zeros(g))


class TestNonlinearity:
    @pytest.mark.parametrize("spec,grid,band", INSTANCES, ids=IDS)
    def test_zero_field(self, spec, grid, band):
        out = evaluate_nonlinearity(spec, SpectralField.zeros(grid))
        assert not np.any(out.coeffs)

    @pytest.mark.parametrize("spec,grid,band", INSTANCES, ids=IDS)
    def test_matches_brute_force_convolution(self, spec, grid, band, make_field):
        u = make_field(grid, band)
        fast = evaluate_nonlinearity(spec, u).coeffs
        slow = brute_force_nonlinearity(spec, u).coeffs
        assert np.max(np.abs(fast - slow)) <= 1e-10 * np.max(np.abs(slow))

    @pytest.mark.parametrize("spec,grid,band",
                             [i for i in INSTANCES if i[0].name is not EquationName.FractionalHeat],
                             ids=[i for i in IDS if not i.startswith("FractionalHeat")])
    def test_mean_is_exactly_zero(self, spec, grid, band, make_field):
        u = make_field(grid, band) + SpectralField(grid, np.where(
            grid.wavenumber_magnitude == 0, 0.3, 0).astype(complex))
        assert evaluate_nonlinearity(spec, u).mean == 0

    def test_burgers_square_of_sine(self):
        g = Grid(1, 32)
        x = g.coordinates()[0]
        out = evaluate_nonlinearity(eq.burgers(2), forward_transform(np.sin(x), g))
        # d/dx sin^2 x = sin 2x
        assert out.coeffs[2] == pytest.approx(-0.5j, abs=1e-15)
        assert out.coeffs[-2] == pytest.approx(0.5j, abs=1e-15)
        rest = np.delete(out.coeffs, [2, 30])
        assert np.max(np.abs(rest)) < 1e-15

    def test_sqg_plane_wave_is_stationary(self):
        g = Grid(2, 32)
        c = np.zeros(g.shape, dtype=complex)
        c[1, 0] = c[-1, 0] = 0.5
        eta = SpectralField(g, c)
        spec = eq.sqg(1.5)
        assert np.max(np.abs(evaluate_nonlinearity(spec, eta).coeffs)) < 1e-15
        assert np.max(np.abs(brute_force_nonlinearity(spec, eta).coeffs)) < 1e-15

    @pytest.mark.parametrize("spec", [eq.sqg(1.5), eq.nse2d_vorticity()], ids=["SQG", "NSE2D"])
    def test_transport_is_skew(self, spec, make_field):
        g = Grid(2, 32)
        u = make_field(g, 10)
        G = evaluate_nonlinearity(spec, u)
        pairing = g.volume * np.sum(np.conj(G.coeffs) * u.coeffs).real
        scale = g.volume * np.sum(np.abs(G.coeffs) * np.abs(u.coeffs))
        assert abs(pairing) < 1e-10 * scale

    def test_even_degree_heat_uses_pointwise_modulus(self, make_field):
        g = Grid(1, 64)
        u = make_field(g, 4)
        out = evaluate_nonlinearity(eq.fractional_heat(1, 2.0, 2, alpha=2.0), u)
        phys = np.fft.ifft(u.coeffs).real * 64
        want = forward_transform(2.0 * np.abs(phys) * phys, g).coeffs
        kept = np.abs(g.integer_frequencies[0]) <= 64 / 3
        assert np.allclose(out.coeffs[kept], want[kept], atol=1e-15)
        assert not np.any(out.coeffs[~kept])

    def test_blowup_on_non_finite(self):
        g = Grid(1, 16)
        c = np.zeros(16, dtype=complex)
        c[1] = c[-1] = 1e200
        with pytest.raises(eq.BlowupError):
            evaluate_nonlinearity(eq.burgers(3), SpectralField(g, c))


class TestCriticalExponent:
    @pytest.mark.parametrize("spec,p,expected", [
        (eq.nse3d(), 2.0, 0.5),
        (eq.burgers(3), 2.0, 0.0),
        (eq.cahn_hilliard_cubic(3), 2.0, 0.5),
        (eq.sqg(1.5), 4.0, 0.0),
        (eq.fractional_heat(2, 2.0, 3), 2.0, 0.0),
    ], ids=["nse3d", "burgers3", "ch3d", "sqg", "heat2d"])
    def test_published_values(self, spec, p, expected):
        assert abs(compute_beta_c(spec, p) - expected) <= 1e-14

    def test_burgers_general_n(self):
        for n in range(2, 7):
            assert compute_beta_c(eq.burgers(n), 2.0) == pytest.approx(0.5 - 1 / (n - 1))

    def test_scaling_identity(self):
        base = eq.sqg(1.5)
        for lam in (1.0, 2.0, 3.0):
            scaled = base.replace(kappa=lam * base.kappa,
                                  alpha_T=tuple(lam * a for a in base.alpha_T))
            want = 2 / 4 - lam * (base.kappa - sum(base.alpha_T)) / (base.degree_n - 1)
            assert compute_beta_c(scaled, 4.0) == pytest.approx(want, abs=1e-14)

    def test_p_must_exceed_one(self):
        with pytest.raises(ValueError):
            compute_beta_c(eq.burgers(3), 1.0)


class TestAdmissibility:
    def test_nse3d(self):
        rep = check_admissibility(eq.nse3d(), 2.0)
        assert rep.condition_sum and rep.condition_min and rep.admissible
        assert rep.beta_c == compute_beta_c(eq.nse3d(), 2.0)

    def test_sum_violation(self):
        spec = eq.fractional_heat(1, 2.0, 2).replace(alpha_T=(3.0, 0.0, 0.0))
        assert not check_admissibility(spec, 2.0).condition_sum

    def test_burgers_beta0_range(self):
        lo, hi = check_admissibility(eq.burgers(3), 2.0).beta0_range
        assert lo == pytest.approx(0.0) and hi == pytest.approx(0.5)

    def test_cahn_hilliard_smallness_excludes_leading_term(self):
        spec = eq.cahn_hilliard_general(1, (0.1, -0.2, 0.3, 0.0, 1.0))
        assert check_admissibility(spec, 2.0).smallness_sum == pytest.approx(0.1 + 0.4 + 0.9)
        assert check_admissibility(eq.burgers(3), 2.0).smallness_sum is None


class TestPredictedExponent:
    def test_nse3d(self):
        assert predicted_decay_exponent(eq.nse3d(), 1.0, 2.0) == pytest.approx(0.25)

    @pytest.mark.parametrize("kappa", [1.25, 1.5, 2.0])
    def test_sqg_at_critical_p(self, kappa):
        p0 = 2 / (kappa - 1)
        for a in (0.5, 1.0):
            assert predicted_decay_exponent(eq.sqg(kappa), a, p0) == pytest.approx(a / kappa)

    def test_boundary_is_error(self):
        with pytest.raises(ValueError):
            predicted_decay_exponent(eq.burgers(3), 0.0, 2.0)
        assert math.isfinite(predicted_decay_exponent(eq.burgers(3), 1e-9, 2.0))
