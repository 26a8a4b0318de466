"""Reference computations that avoid the FFT path.

These are deliberately slow and are meant for small grids: nonlinear terms
are formed by explicit summation over pairs of active modes, and the
whole-space heat flow of a Gaussian is evaluated in closed form.
"""
from __future__ import annotations

import math
from collections import defaultdict

import numpy as np

from .equations import EquationName, EquationSpec
from .spectral_core import Grid, SpectralField

__all__ = [
    "modes_of",
    "convolve_modes",
    "brute_force_nonlinearity",
    "gaussian_heat_sobolev_norm",
]

Modes = dict  # integer frequency tuple -> complex coefficient


def modes_of(field: SpectralField, threshold: float = 0.0) -> Modes:
    """Active modes keyed by signed integer frequency."""
    grid = field.grid
    m = grid.integer_frequencies
    out = {}
    for idx in zip(*np.nonzero(np.abs(field.coeffs) > threshold)):
        key = tuple(int(m[(a,) + idx]) for a in range(grid.dim))
        out[key] = complex(field.coeffs[idx])
    return out


def convolve_modes(a: Modes, b: Modes) -> Modes:
    """Coefficients of the product: ``c(m) = sum_{m1 + m2 = m} a(m1) b(m2)``."""
    out: Modes = defaultdict(complex)
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            out[tuple(x + y for x, y in zip(m1, m2))] += c1 * c2
    return dict(out)


def _scale(a: Modes, symbol) -> Modes:
    return {m: c * symbol(m) for m, c in a.items()}


def _add(*terms: Modes) -> Modes:
    out: Modes = defaultdict(complex)
    for t in terms:
        for m, c in t.items():
            out[m] += c
    return dict(out)


def _to_field(modes: Modes, grid: Grid) -> SpectralField:
    n = grid.points_per_dim
    coeffs = np.zeros(grid.shape, dtype=complex)
    for m, c in modes.items():
        if any(abs(x) > n // 2 for x in m):
            raise ValueError(f"mode {m} not representable on an N = {n} grid")
        coeffs[tuple(x % n for x in m)] += c
    return SpectralField(grid, coeffs)


def brute_force_nonlinearity(spec: EquationSpec, field: SpectralField) -> SpectralField:
    """``G(u)`` by direct mode-pair convolution, with symbols evaluated per mode."""
    grid = field.grid
    k0 = grid.fundamental_wavenumber
    u = modes_of(field)

    def k(m):
        return [k0 * x for x in m]

    def knorm(m):
        return math.sqrt(sum(x * x for x in k(m)))

    def power(n):
        p = u
        for _ in range(n - 1):
            p = convolve_modes(p, u)
        return p

    name = spec.name
    if name is EquationName.FractionalHeat:
        if spec.degree_n % 2 == 0:
            raise ValueError("|u|^(n-1) u with even n has no finite convolution form")
        alpha = float(spec.params.get("alpha", 1.0))
        out = _scale(power(spec.degree_n), lambda m: alpha)
    elif name is EquationName.BurgersN:
        out = _scale(power(spec.degree_n), lambda m: 1j * k(m)[0])
    elif name in (EquationName.SQG, EquationName.NSE2DVorticity):
        if name is EquationName.SQG:
            def vel(axis):
                # (-R_2, R_1) with R_j = i k_j / |k|
                other = 1 - axis
                sign = -1.0 if axis == 0 else 1.0
                return lambda m: 0.0 if knorm(m) == 0 else sign * 1j * k(m)[other] / knorm(m)
        else:
            def vel(axis):
                # psi = -omega/|k|^2; u = (-i k_2 psi, i k_1 psi)
                other = 1 - axis
                sign = -1.0 if axis == 0 else 1.0
                return lambda m: 0.0 if knorm(m) == 0 else -sign * 1j * k(m)[other] / knorm(m) ** 2
        fluxes = [convolve_modes(_scale(u, vel(a)), u) for a in range(2)]
        out = _add(*[_scale(fluxes[a], lambda m, a=a: -1j * k(m)[a]) for a in range(2)])
    elif name is EquationName.CahnHilliardCubic:
        beta = float(spec.params.get("beta", 1.0))
        out = _scale(power(3), lambda m: -beta * knorm(m) ** 2)
    elif name is EquationName.CahnHilliardGeneral:
        terms = [_scale(power(j), lambda m, a=a: a) for j, a in enumerate(spec.params["coeffs"], 1)
                 if a != 0]
        out = _scale(_add(*terms), lambda m: -knorm(m) ** 2)
    else:
        raise NotImplementedError(name)
    return _to_field(out, grid)


def gaussian_heat_sobolev_norm(t: float, zeta: float, amplitude: float = 1.0,
                               width: float = 1.0) -> float:
    """``||Lambda^zeta e^{t Delta} u0||_{L^2(R)}`` for ``u0 = A exp(-x^2 / (2 w^2))``.

    The Fourier transform of ``u0`` is ``A w sqrt(2 pi) exp(-w^2 xi^2 / 2)``, so

        ||.||^2 = A^2 w^2 Gamma(zeta + 1/2) (w^2 + 2t)^-(zeta + 1/2).
    """
    a = width ** 2 + 2 * t
    return float(amplitude * width * math.sqrt(math.gamma(zeta + 0.5)) * a ** (-(zeta + 0.5) / 2))
