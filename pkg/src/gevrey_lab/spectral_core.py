"""Periodic grids, Fourier transforms and Fourier multipliers.

Fields live on the box ``[0, L)^d`` sampled at ``N`` points per axis. The
spectral representation stores the Fourier-series coefficients, so that

    f(x) = sum_k  u_hat(k) exp(i k.x),     k = (2 pi / L) m,

with integer frequencies ``m`` in ``{-N/2+1, ..., N/2}`` along each axis.
Coefficients are kept in numpy's FFT ordering; the Nyquist index carries the
positive frequency ``+N/2``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Grid",
    "SpectralField",
    "MultiplierSymbol",
    "HermitianSymmetryError",
    "forward_transform",
    "inverse_transform",
    "apply_multiplier",
    "fractional_laplacian_symbol",
    "lambda_power_symbol",
    "semigroup_multiplier",
    "riesz_vector_symbols",
    "derivative_symbol",
    "laplacian_symbol",
    "dealias",
    "dealias_mask",
    "dealiased_product",
    "hermitian_mirror",
    "smoothing_maximum",
]


class HermitianSymmetryError(ValueError):
    """Raised when spectral data does not describe a real-valued field."""


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[0, box_length)^dim``."""

    dim: int
    points_per_dim: int
    box_length: float = 2 * np.pi

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        n = self.points_per_dim
        if n < 8 or n & (n - 1):
            raise ValueError(f"points_per_dim must be a power of two >= 8, got {n}")
        if not self.box_length > 0:
            raise ValueError(f"box_length must be positive, got {self.box_length}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_dim,) * self.dim

    @property
    def size(self) -> int:
        return self.points_per_dim ** self.dim

    @property
    def volume(self) -> float:
        return self.box_length ** self.dim

    @property
    def cell_volume(self) -> float:
        return (self.box_length / self.points_per_dim) ** self.dim

    @property
    def fundamental_wavenumber(self) -> float:
        return 2 * np.pi / self.box_length

    @cached_property
    def integer_frequencies(self) -> np.ndarray:
        """Integer frequencies ``m``, shape ``(dim, *shape)``; Nyquist is ``+N/2``."""
        n = self.points_per_dim
        m = np.fft.fftfreq(n, d=1.0 / n)
        m[n // 2] = n // 2
        axes = np.meshgrid(*([m] * self.dim), indexing="ij")
        out = np.stack(axes)
        out.setflags(write=False)
        return out

    @cached_property
    def wavevectors(self) -> np.ndarray:
        """Physical wavevectors ``(2 pi / L) m``, shape ``(dim, *shape)``."""
        k = self.fundamental_wavenumber * self.integer_frequencies
        k.setflags(write=False)
        return k

    @cached_property
    def wavenumber_magnitude(self) -> np.ndarray:
        """Euclidean ``|k|`` on the grid."""
        kk = np.sqrt(np.sum(self.wavevectors ** 2, axis=0))
        kk.setflags(write=False)
        return kk

    @cached_property
    def wavenumber_l1(self) -> np.ndarray:
        """``|k|_1`` on the grid."""
        kk = np.sum(np.abs(self.wavevectors), axis=0)
        kk.setflags(write=False)
        return kk

    @property
    def k_max(self) -> float:
        return float(self.wavenumber_magnitude.max())

    def coordinates(self) -> tuple[np.ndarray, ...]:
        """Physical sample points, one array per axis (``ij`` indexing)."""
        x = np.arange(self.points_per_dim) * (self.box_length / self.points_per_dim)
        return tuple(np.meshgrid(*([x] * self.dim), indexing="ij"))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier-series coefficients of a real field on ``grid``."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != self.grid.shape:
            raise ValueError(
                f"coefficient shape {self.coeffs.shape} does not match grid {self.grid.shape}"
            )

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralField":
        return cls(grid, np.zeros(grid.shape, dtype=complex))

    def with_coeffs(self, coeffs: np.ndarray) -> "SpectralField":
        return SpectralField(self.grid, coeffs)

    @property
    def mean(self) -> complex:
        return self.coeffs[(0,) * self.grid.dim]

    def hermitian_defect(self) -> float:
        """``max |u(-k) - conj(u(k))|`` relative to ``max |u|``."""
        scale = np.max(np.abs(self.coeffs))
        if scale == 0:
            return 0.0
        return float(np.max(np.abs(hermitian_mirror(self.coeffs) - np.conj(self.coeffs))) / scale)

    def symmetrized(self) -> "SpectralField":
        """Project onto the Hermitian-symmetric (real-field) subspace."""
        c = 0.5 * (self.coeffs + np.conj(hermitian_mirror(self.coeffs)))
        return SpectralField(self.grid, c)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__


def hermitian_mirror(a: np.ndarray) -> np.ndarray:
    """Return ``b`` with ``b[idx] = a[-idx mod N]`` along every axis."""
    b = a
    for axis in range(a.ndim):
        b = np.roll(np.flip(b, axis=axis), 1, axis=axis)
    return b


def forward_transform(physical_values: np.ndarray, grid: Grid) -> SpectralField:
    """Normalized DFT of real samples (``u_hat(0)`` is the mean)."""
    values = np.asarray(physical_values)
    if values.shape != grid.shape:
        raise ValueError(f"array shape {values.shape} does not match grid {grid.shape}")
    if np.iscomplexobj(values):
        if np.any(values.imag != 0):
            raise ValueError("forward_transform expects real physical values")
        values = values.real
    return SpectralField(grid, np.fft.fftn(values) / grid.size)


def inverse_transform(field: SpectralField, tolerance: float = 1e-10) -> np.ndarray:
    """Real physical samples of ``field``.

    The imaginary residue left by the inverse FFT is checked against
    ``tolerance`` (relative to the largest sample) and then discarded.
    """
    values = np.fft.ifftn(field.coeffs) * field.grid.size
    scale = np.max(np.abs(values.real)) if values.size else 0.0
    residue = np.max(np.abs(values.imag)) if values.size else 0.0
    if residue > tolerance * max(scale, np.finfo(float).tiny):
        raise HermitianSymmetryError(
            f"imaginary residue {residue:.3e} exceeds {tolerance:g} relative to {scale:.3e}"
        )
    return values.real


@dataclass(frozen=True, eq=False)
class MultiplierSymbol:
    """A Fourier multiplier ``k -> m(k)``.

    ``evaluator`` receives the wavevector array of shape ``(dim, ...)`` and
    returns an array of the trailing shape. ``order`` is the homogeneity
    degree and ``bound`` the constant ``C`` in ``|m(k)| <= C |k|^order``.

    When ``real_valued`` is set the evaluated symbol is projected onto
    ``m(-k) = conj(m(k))`` over the grid. This only changes odd symbols on
    the Nyquist planes, where ``+N/2`` and ``-N/2`` are the same grid index;
    there they vanish, as for spectral derivatives.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    order: float = 0.0
    bound: float = 1.0
    name: str = "m"
    real_valued: bool = True

    def __call__(self, k) -> np.ndarray:
        return self.evaluator(np.asarray(k, dtype=float))

    def on_grid(self, grid: Grid) -> np.ndarray:
        m = np.asarray(self.evaluator(grid.wavevectors))
        m = np.broadcast_to(m, grid.shape)
        if self.real_valued and np.iscomplexobj(m):
            m = 0.5 * (m + np.conj(hermitian_mirror(m)))
        return m

    def __mul__(self, other: "MultiplierSymbol") -> "MultiplierSymbol":
        f, g = self.evaluator, other.evaluator
        return MultiplierSymbol(
            lambda k: f(k) * g(k),
            order=self.order + other.order,
            bound=self.bound * other.bound,
            name=f"{self.name}*{other.name}",
            real_valued=self.real_valued and other.real_valued,
        )


def apply_multiplier(field: SpectralField, m: MultiplierSymbol) -> SpectralField:
    values = m.on_grid(field.grid)
    if np.any(np.isnan(values)):
        raise ValueError(f"symbol {m.name} produced NaN on the grid")
    return SpectralField(field.grid, field.coeffs * values)


def _norm(k: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(k ** 2, axis=0))


def _power(kk: np.ndarray, beta: float) -> np.ndarray:
    # |0|^0 = 1; for beta < 0 the zero mode is annihilated.
    if beta == 0:
        return np.ones_like(kk)
    out = np.zeros_like(kk)
    nz = kk > 0
    out[nz] = kk[nz] ** beta
    return out


def lambda_power_symbol(beta: float) -> MultiplierSymbol:
    """Symbol of ``Lambda^beta``: ``|k|^beta`` (zero at ``k = 0`` unless ``beta = 0``)."""
    return MultiplierSymbol(lambda k: _power(_norm(k), beta), order=max(beta, 0.0),
                            name=f"Lambda^{beta:g}")


def fractional_laplacian_symbol(kappa: float) -> MultiplierSymbol:
    """Symbol ``|k|^kappa`` of ``Lambda^kappa``."""
    if not kappa > 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    return MultiplierSymbol(lambda k: _power(_norm(k), kappa), order=kappa,
                            name=f"Lambda^{kappa:g}")


def semigroup_multiplier(t: float, kappa: float) -> MultiplierSymbol:
    """Symbol ``exp(-t |k|^kappa)`` of the dissipative semigroup."""
    if t < 0:
        raise ValueError(f"semigroup time must be non-negative, got {t}")
    if not kappa > 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    return MultiplierSymbol(lambda k: np.exp(-t * _norm(k) ** kappa), order=0.0,
                            name=f"exp(-{t:g} Lambda^{kappa:g})")


def riesz_vector_symbols(dim: int = 2) -> tuple[MultiplierSymbol, MultiplierSymbol]:
    """Symbols of ``(-R_2, R_1)``: ``(-i k_2/|k|, i k_1/|k|)``, zero at ``k = 0``."""
    if dim != 2:
        raise ValueError("Riesz velocity symbols are defined for dim = 2 only")

    def component(axis, sign):
        def ev(k):
            kk = _norm(k)
            out = np.zeros(kk.shape, dtype=complex)
            nz = kk > 0
            out[nz] = sign * 1j * k[axis][nz] / kk[nz]
            return out
        return ev

    return (
        MultiplierSymbol(component(1, -1.0), order=0.0, name="-R_2"),
        MultiplierSymbol(component(0, 1.0), order=0.0, name="R_1"),
    )


def derivative_symbol(axis: int) -> MultiplierSymbol:
    """Symbol ``i k_axis`` of the partial derivative along ``axis``."""
    return MultiplierSymbol(lambda k: 1j * k[axis], order=1.0, name=f"d/dx{axis}")


def laplacian_symbol() -> MultiplierSymbol:
    return MultiplierSymbol(lambda k: -np.sum(k ** 2, axis=0), order=2.0, name="Laplacian")


def dealias_mask(grid: Grid, rule: float = 2 / 3) -> np.ndarray:
    """Boolean mask keeping modes with every ``|m_axis| <= rule * N/2``."""
    if not 0 < rule <= 1:
        raise ValueError(f"dealiasing rule must lie in (0, 1], got {rule}")
    cutoff = rule * grid.points_per_dim / 2
    return np.all(np.abs(grid.integer_frequencies) <= cutoff, axis=0)


def dealias(field: SpectralField, rule: float = 2 / 3) -> SpectralField:
    return SpectralField(field.grid, np.where(dealias_mask(field.grid, rule), field.coeffs, 0))


def dealiased_product(a: SpectralField, b: SpectralField, rule: float = 2 / 3) -> SpectralField:
    """Pseudo-spectral product with the inputs and output truncated by ``rule``."""
    grid = a.grid
    mask = dealias_mask(grid, rule)
    n = grid.size
    fa = np.fft.ifftn(np.where(mask, a.coeffs, 0)).real * n
    fb = np.fft.ifftn(np.where(mask, b.coeffs, 0)).real * n
    return SpectralField(grid, np.where(mask, np.fft.fftn(fa * fb) / n, 0))


def smoothing_maximum(alpha: float, t: float, kappa: float) -> float:
    """Exact ``max_{x >= 0} x^alpha exp(-t x^kappa)``.

    Equals ``(alpha / (t kappa))^(alpha/kappa) * exp(-alpha/kappa)``.
    """
    if alpha < 0 or t <= 0 or kappa <= 0:
        raise ValueError("need alpha >= 0, t > 0, kappa > 0")
    if alpha == 0:
        return 1.0
    r = alpha / kappa
    return float((alpha / (t * kappa)) ** r * np.exp(-r))


def as_spectral(values: Sequence | np.ndarray, grid: Grid) -> SpectralField:
    """Convenience wrapper accepting physical samples or an existing field."""
    if isinstance(values, SpectralField):
        return values
    return forward_transform(np.asarray(values, dtype=float), grid)
