"""Equation instances ``u_t + Lambda^kappa u = G(u)`` and their critical exponents.

Every instance writes its nonlinearity as ``T_0 F(T_1 u, ..., T_n u)`` with
Fourier multipliers ``T_i`` of homogeneity ``alpha_T[i]``. Products are
formed pseudo-spectrally with successive dealiased binary products.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .spectral_core import (
    Grid,
    SpectralField,
    dealias_mask,
    derivative_symbol,
    riesz_vector_symbols,
)

__all__ = [
    "EquationName",
    "EquationSpec",
    "AdmissibilityReport",
    "BlowupError",
    "NonlinearTerm",
    "fractional_heat",
    "burgers",
    "sqg",
    "nse2d_vorticity",
    "nse3d",
    "cahn_hilliard_cubic",
    "cahn_hilliard_general",
    "evaluate_nonlinearity",
    "compute_beta_c",
    "check_admissibility",
    "predicted_decay_exponent",
]


class BlowupError(FloatingPointError):
    """Non-finite or runaway values met while advancing a solution."""

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


class EquationName(str, enum.Enum):
    FractionalHeat = "FractionalHeat"
    BurgersN = "BurgersN"
    SQG = "SQG"
    NSE2DVorticity = "NSE2DVorticity"
    CahnHilliardCubic = "CahnHilliardCubic"
    CahnHilliardGeneral = "CahnHilliardGeneral"
    # Exponent arithmetic only; never simulated.
    NSE3D = "NSE3D"


SIMULABLE = frozenset(EquationName) - {EquationName.NSE3D}


@dataclass(frozen=True)
class EquationSpec:
    """One instance of the dissipative equation class.

    ``dissipation`` and ``nonlinear`` switch the two sides of the equation
    off for test runs (pure transport, linear flow).
    """

    name: EquationName
    kappa: float
    dim: int
    degree_n: int
    alpha_T: tuple[float, ...]
    params: Mapping[str, object] = field(default_factory=dict)
    dissipation: bool = True
    nonlinear: bool = True
    dealias_rule: float = 2 / 3

    def __post_init__(self):
        object.__setattr__(self, "name", EquationName(self.name))
        object.__setattr__(self, "alpha_T", tuple(float(a) for a in self.alpha_T))
        if self.kappa < 1:
            raise ValueError(f"kappa must be >= 1, got {self.kappa}")
        if self.degree_n < 2:
            raise ValueError(f"degree_n must be >= 2, got {self.degree_n}")
        if len(self.alpha_T) != self.degree_n + 1:
            raise ValueError(
                f"alpha_T needs degree_n + 1 = {self.degree_n + 1} entries, got {len(self.alpha_T)}"
            )
        if any(a < 0 for a in self.alpha_T):
            raise ValueError("operator orders alpha_T must be non-negative")

    @property
    def simulable(self) -> bool:
        return self.name in SIMULABLE and self.kappa > 1

    def replace(self, **changes) -> "EquationSpec":
        from dataclasses import replace
        return replace(self, **changes)


def fractional_heat(dim: int = 1, kappa: float = 2.0, n: int = 3, alpha: float = 1.0) -> EquationSpec:
    """``u_t + Lambda^kappa u = alpha |u|^(n-1) u``."""
    return EquationSpec(EquationName.FractionalHeat, kappa, dim, n, (0.0,) * (n + 1),
                        {"alpha": float(alpha)})


def burgers(n: int = 3) -> EquationSpec:
    """``u_t - u_xx = (u^n)_x`` on the line/circle."""
    return EquationSpec(EquationName.BurgersN, 2.0, 1, n, (1.0,) + (0.0,) * n)


def sqg(kappa: float = 1.5) -> EquationSpec:
    """Dissipative SQG, velocity ``(-R_2 eta, R_1 eta)`` in divergence form."""
    return EquationSpec(EquationName.SQG, kappa, 2, 2, (1.0, 0.0, 0.0))


def nse2d_vorticity() -> EquationSpec:
    """2D vorticity equation, velocity ``grad^perp Delta^-1 omega``.

    ``alpha_T`` counts the orders of the velocity form (``T_0 = div``), so the
    exponents agree with those of the Navier-Stokes velocity equation.
    """
    return EquationSpec(EquationName.NSE2DVorticity, 2.0, 2, 2, (1.0, 0.0, 0.0))


def nse3d() -> EquationSpec:
    return EquationSpec(EquationName.NSE3D, 2.0, 3, 2, (1.0, 0.0, 0.0))


def cahn_hilliard_cubic(dim: int = 1, beta: float = 1.0) -> EquationSpec:
    """``u_t = -Delta^2 u + beta Delta(u^3)``."""
    if not beta > 0:
        raise ValueError("Cahn-Hilliard coefficient beta must be positive")
    return EquationSpec(EquationName.CahnHilliardCubic, 4.0, dim, 3, (2.0, 0.0, 0.0, 0.0),
                        {"beta": float(beta)})


def cahn_hilliard_general(dim: int = 1, coeffs=(0.0, 0.0, 1.0)) -> EquationSpec:
    """``u_t = -Delta^2 u + Delta f(u)``, ``f(u) = sum_j a_j u^j`` for ``j = 1..2N-1``."""
    coeffs = tuple(float(a) for a in coeffs)
    degree = len(coeffs)
    if degree < 3 or degree % 2 == 0:
        raise ValueError("need coefficients a_1..a_{2N-1} with N >= 2 (odd count >= 3)")
    if not coeffs[-1] > 0:
        raise ValueError("leading coefficient a_{2N-1} must be positive")
    return EquationSpec(EquationName.CahnHilliardGeneral, 4.0, dim, degree,
                        (2.0,) + (0.0,) * degree, {"coeffs": coeffs})


class NonlinearTerm:
    """Pseudo-spectral evaluator of ``G(u)`` bound to one grid.

    Symbol arrays are computed once, so repeated calls inside a time loop
    only pay for the transforms.
    """

    def __init__(self, spec: EquationSpec, grid: Grid):
        if spec.name not in SIMULABLE:
            raise NotImplementedError(f"{spec.name.value} is not simulated")
        if grid.dim != spec.dim:
            raise ValueError(f"{spec.name.value} needs a {spec.dim}D grid, got {grid.dim}D")
        self.spec = spec
        self.grid = grid
        self.mask = dealias_mask(grid, spec.dealias_rule)
        self._n = grid.size
        self.ik = [derivative_symbol(a).on_grid(grid) for a in range(grid.dim)]
        k2 = grid.wavenumber_magnitude ** 2
        self.minus_k2 = -k2
        if spec.name is EquationName.SQG:
            self.velocity = [s.on_grid(grid) for s in riesz_vector_symbols(2)]
        elif spec.name is EquationName.NSE2DVorticity:
            inv = np.zeros_like(k2)
            inv[k2 > 0] = -1.0 / k2[k2 > 0]
            # psi = Delta^-1 omega; u = (-d_y psi, d_x psi)
            self.velocity = [-self.ik[1] * inv, self.ik[0] * inv]

    def _phys(self, coeffs: np.ndarray) -> np.ndarray:
        return np.fft.ifftn(coeffs).real * self._n

    def _spec(self, values: np.ndarray) -> np.ndarray:
        if not np.all(np.isfinite(values)):
            raise BlowupError("non-finite values in physical-space product")
        return np.where(self.mask, np.fft.fftn(values) / self._n, 0)

    def _powers(self, coeffs: np.ndarray, n: int) -> list[np.ndarray]:
        """Dealiased ``u^1 .. u^n`` by successive binary products."""
        u = self._phys(np.where(self.mask, coeffs, 0))
        out = [coeffs]
        current = coeffs
        for _ in range(n - 1):
            current = self._spec(self._phys(np.where(self.mask, current, 0)) * u)
            out.append(current)
        return out

    def __call__(self, coeffs: np.ndarray) -> np.ndarray:
        # overflow surfaces as BlowupError from _spec
        with np.errstate(over="ignore", invalid="ignore"):
            return self._evaluate(coeffs)

    def _evaluate(self, coeffs: np.ndarray) -> np.ndarray:
        spec = self.spec
        name = spec.name
        if not spec.nonlinear:
            return np.zeros_like(coeffs)
        if name is EquationName.FractionalHeat:
            alpha = float(spec.params.get("alpha", 1.0))
            n = spec.degree_n
            if n % 2 == 1:
                return alpha * self._powers(coeffs, n)[-1]
            # even n: |u|^(n-1) u pointwise; aliasing is only approximately removed
            u = self._phys(np.where(self.mask, coeffs, 0))
            return alpha * self._spec(np.abs(u) ** (n - 1) * u)
        if name is EquationName.BurgersN:
            return self.ik[0] * self._powers(coeffs, spec.degree_n)[-1]
        if name in (EquationName.SQG, EquationName.NSE2DVorticity):
            theta = self._phys(np.where(self.mask, coeffs, 0))
            flux = [self._spec(self._phys(np.where(self.mask, v * coeffs, 0)) * theta)
                    for v in self.velocity]
            return -(self.ik[0] * flux[0] + self.ik[1] * flux[1])
        if name is EquationName.CahnHilliardCubic:
            beta = float(spec.params.get("beta", 1.0))
            return beta * self.minus_k2 * self._powers(coeffs, 3)[-1]
        if name is EquationName.CahnHilliardGeneral:
            a = spec.params["coeffs"]
            powers = self._powers(coeffs, len(a))
            f = sum(aj * pj for aj, pj in zip(a, powers) if aj != 0)
            return self.minus_k2 * f
        raise NotImplementedError(name)


def evaluate_nonlinearity(spec: EquationSpec, field: SpectralField) -> SpectralField:
    """Fourier coefficients of ``G(u)`` for the instance ``spec``."""
    term = NonlinearTerm(spec, field.grid)
    return SpectralField(field.grid, term(field.coeffs))


@dataclass(frozen=True)
class AdmissibilityReport:
    condition_sum: bool
    condition_min: bool
    beta_c: float
    beta0_range: tuple[float, float]
    smallness_sum: float | None = None

    @property
    def admissible(self) -> bool:
        return self.condition_sum and self.condition_min


def compute_beta_c(spec: EquationSpec, p: float) -> float:
    """Critical Sobolev index ``d/p - (kappa - sum alpha_T)/(n - 1)``."""
    if spec.degree_n < 2:
        raise ValueError("critical exponent needs degree n >= 2")
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    return spec.dim / p - (spec.kappa - sum(spec.alpha_T)) / (spec.degree_n - 1)


def check_admissibility(spec: EquationSpec, p: float) -> AdmissibilityReport:
    n, d, kappa = spec.degree_n, spec.dim, spec.kappa
    total = sum(spec.alpha_T)
    inner = spec.alpha_T[1:]
    condition_sum = total <= kappa
    bound = max(sum(inner) / n - d / (n * p), (total - kappa) / (n - 1))
    condition_min = min(inner) > bound
    beta_c = compute_beta_c(spec, p)
    upper = min(d / p, d / p + min(inner))
    smallness = None
    if spec.name is EquationName.CahnHilliardGeneral:
        a = spec.params["coeffs"]
        smallness = float(sum(j * abs(aj) for j, aj in enumerate(a[:-1], start=1)))
    return AdmissibilityReport(condition_sum, condition_min, beta_c, (beta_c, upper), smallness)


def predicted_decay_exponent(spec: EquationSpec, zeta: float, p: float) -> float:
    """Power-law rate ``(zeta - beta_c)/kappa`` of ``||Lambda^zeta u||_p``."""
    beta_c = compute_beta_c(spec, p)
    if zeta <= beta_c:
        raise ValueError(f"zeta = {zeta} must exceed beta_c = {beta_c}")
    return (zeta - beta_c) / spec.kappa
