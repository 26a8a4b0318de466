"""Sobolev, Gevrey and Littlewood-Paley norms on the periodic grid.

``p = 2`` norms are evaluated exactly through Plancherel. Other exponents
use a Riemann sum over the physical samples, which is exact only for
trigonometric polynomials of low enough degree.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .spectral_core import Grid, SpectralField, inverse_transform

__all__ = [
    "WeightNorm",
    "GevreyParams",
    "GevreyOverflowError",
    "LPBank",
    "lp_norm",
    "sobolev_norm",
    "gevrey_norm",
    "gevrey_semigroup_bound",
    "lp_build",
    "lp_block",
    "triebel_lizorkin_norm",
    "analyticity_radius",
    "shell_maxima",
    "kato_ponce_ratio",
    "bony_decomposition",
    "smooth_step",
]

GEVREY_EXPONENT_LIMIT = 700.0


class GevreyOverflowError(OverflowError):
    """The exponential Gevrey weight would overflow double precision."""


class WeightNorm(str, enum.Enum):
    L1 = "L1"
    Euclidean = "Euclidean"


@dataclass(frozen=True)
class GevreyParams:
    """Parameters of ``|| exp(c s^{1/kappa} |k|_w) Lambda^beta v ||``.

    ``flavor="lp"`` takes the ``L^p`` norm in physical space;
    ``flavor="fourier_l1"`` sums weighted coefficient moduli instead.
    """

    s: float = 0.0
    beta: float = 0.0
    kappa: float = 2.0
    p: float = 2.0
    weight_constant: float = 0.5
    weight_norm: WeightNorm = WeightNorm.Euclidean
    flavor: str = "lp"

    def __post_init__(self):
        object.__setattr__(self, "weight_norm", WeightNorm(self.weight_norm))
        if self.s < 0:
            raise ValueError(f"Gevrey parameter s must be non-negative, got {self.s}")
        if not 0 < self.weight_constant <= 1:
            raise ValueError("weight_constant must lie in (0, 1]")
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if not self.p >= 1:
            raise ValueError("p must be >= 1")
        if self.flavor not in ("lp", "fourier_l1"):
            raise ValueError(f"unknown Gevrey flavor {self.flavor!r}")

    def at(self, s: float) -> "GevreyParams":
        from dataclasses import replace
        return replace(self, s=s)


def lp_norm(values: np.ndarray, p: float, grid: Grid) -> float:
    """Grid quadrature of ``(int |f|^p dx)^{1/p}``; ``p = inf`` is the max."""
    a = np.abs(values)
    if math.isinf(p):
        return float(a.max())
    if p == 2:
        return float(np.sqrt(np.sum(a * a) * grid.cell_volume))
    return float((np.sum(a ** p) * grid.cell_volume) ** (1.0 / p))


def _power_array(kk: np.ndarray, beta: float) -> np.ndarray:
    if beta == 0:
        return np.ones_like(kk)
    out = np.zeros_like(kk)
    nz = kk > 0
    out[nz] = kk[nz] ** beta
    return out


def _require_mean_zero(field: SpectralField, beta: float) -> None:
    if beta < 0:
        c = field.coeffs
        scale = np.max(np.abs(c))
        if abs(field.mean) > 1e-13 * max(scale, np.finfo(float).tiny):
            raise ValueError(
                f"negative-order norm (beta = {beta}) needs a mean-zero field; "
                f"u_hat(0) = {field.mean:.3e}"
            )


def _weighted_norm(field: SpectralField, multiplier: np.ndarray, p: float) -> float:
    grid = field.grid
    c = field.coeffs * multiplier
    if p == 2:
        return float(np.sqrt(grid.volume * np.sum(np.abs(c) ** 2)))
    return lp_norm(inverse_transform(SpectralField(grid, c), tolerance=1e-8), p, grid)


def sobolev_norm(field: SpectralField, beta: float, p: float = 2.0) -> float:
    """Homogeneous ``|| Lambda^beta f ||_{L^p}`` over the periodic box."""
    _require_mean_zero(field, beta)
    return _weighted_norm(field, _power_array(field.grid.wavenumber_magnitude, beta), p)


def _gevrey_exponent(grid: Grid, gp: GevreyParams) -> np.ndarray:
    w = grid.wavenumber_l1 if gp.weight_norm is WeightNorm.L1 else grid.wavenumber_magnitude
    return gp.weight_constant * gp.s ** (1.0 / gp.kappa) * w


def gevrey_norm(field: SpectralField, gp: GevreyParams) -> float:
    """Gevrey norm with weight ``exp(c s^{1/kappa} |k|)``.

    Raises :class:`GevreyOverflowError` when the largest exponent on the
    grid exceeds 700.
    """
    _require_mean_zero(field, gp.beta)
    grid = field.grid
    expo = _gevrey_exponent(grid, gp)
    top = float(expo.max())
    if top > GEVREY_EXPONENT_LIMIT:
        raise GevreyOverflowError(
            f"Gevrey exponent c s^(1/kappa) k_max = {top:.1f} exceeds {GEVREY_EXPONENT_LIMIT:g}"
        )
    power = _power_array(grid.wavenumber_magnitude, gp.beta)
    if gp.flavor == "fourier_l1":
        return float(np.sum(np.exp(expo) * power * np.abs(field.coeffs)))
    if gp.p == 2:
        # factor out exp(top) so the squared weights cannot overflow
        scaled = np.exp(expo - top) * power * np.abs(field.coeffs)
        return float(math.exp(top) * np.sqrt(grid.volume * np.sum(scaled ** 2)))
    return _weighted_norm(field, np.exp(expo) * power, gp.p)


def gevrey_semigroup_bound(weight_constant: float, kappa: float) -> float:
    """``sup_{t, x >= 0} exp(c t^{1/kappa} x - t x^kappa)`` for ``kappa > 1``.

    With ``y = t^{1/kappa} x`` the exponent is ``c y - y^kappa``, maximal at
    ``y* = (c/kappa)^{1/(kappa-1)}``, independently of ``t``.
    """
    if not kappa > 1:
        raise ValueError("the Gevrey weight is dominated by the semigroup only for kappa > 1")
    c = weight_constant
    y = (c / kappa) ** (1.0 / (kappa - 1))
    return float(math.exp(c * y - y ** kappa))


# Littlewood-Paley decomposition ------------------------------------------------

def smooth_step(x: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for ``x <= 0``, 1 for ``x >= 1``."""
    x = np.asarray(x, dtype=float)

    def f(y):
        out = np.zeros_like(y)
        pos = y > 0
        out[pos] = np.exp(-1.0 / y[pos])
        return out

    a = f(x)
    b = f(1.0 - x)
    return a / (a + b)


def _phi(r: np.ndarray) -> np.ndarray:
    # 1 on [0, 1/2], 0 on [1, inf)
    return 1.0 - smooth_step(2.0 * np.asarray(r) - 1.0)


@dataclass(frozen=True, eq=False)
class LPBank:
    """Dyadic filters ``psi(2^-j |k|)`` for ``j_min <= j <= j_max`` and the low part ``chi``.

    Block ``j`` is supported on ``2^{j-1} < |k| < 2^{j+1}`` and equals one at
    ``|k| = 2^j``.
    """

    grid: Grid
    j_min: int
    j_max: int
    block_filters: dict
    low_filter: np.ndarray

    @property
    def indices(self) -> range:
        return range(self.j_min, self.j_max + 1)

    def partition_defect(self) -> float:
        total = self.low_filter + sum(self.block_filters.values())
        return float(np.max(np.abs(total - 1.0)))


def lp_build(grid: Grid) -> LPBank:
    kk = grid.wavenumber_magnitude
    k_min = grid.fundamental_wavenumber
    # chi = phi(2^-j_min |k|) vanishes on every nonzero mode
    j_min = int(math.floor(math.log2(k_min)))
    j_max = int(math.ceil(math.log2(grid.k_max)))
    low = _phi(kk / 2.0 ** j_min)
    blocks = {j: _phi(kk / 2.0 ** (j + 1)) - _phi(kk / 2.0 ** j) for j in range(j_min, j_max + 1)}
    total = low + sum(blocks.values())
    blocks = {j: b / total for j, b in blocks.items()}
    low = low / total
    for arr in list(blocks.values()) + [low]:
        arr.setflags(write=False)
    return LPBank(grid, j_min, j_max, blocks, low)


def lp_block(field: SpectralField, bank: LPBank, j: int) -> SpectralField:
    """``Delta_j f``."""
    if j not in bank.block_filters:
        raise ValueError(f"block {j} outside bank range [{bank.j_min}, {bank.j_max}]")
    return SpectralField(field.grid, field.coeffs * bank.block_filters[j])


def lp_low(field: SpectralField, bank: LPBank) -> SpectralField:
    """The low-frequency remainder ``S_{j_min} f`` (only the mean on a periodic box)."""
    return SpectralField(field.grid, field.coeffs * bank.low_filter)


def triebel_lizorkin_norm(field: SpectralField, alpha: float, p: float, bank: LPBank) -> float:
    """``|| (sum_j 2^{2 j alpha} |Delta_j f|^2)^{1/2} ||_{L^p}``."""
    _require_mean_zero(field, -1.0)
    square = np.zeros(field.grid.shape)
    for j in bank.indices:
        block = inverse_transform(lp_block(field, bank, j), tolerance=1e-8)
        square += 4.0 ** (j * alpha) * block ** 2
    return lp_norm(np.sqrt(square), p, field.grid)


def bony_decomposition(u: SpectralField, v: SpectralField, bank: LPBank):
    """Physical-space ``(T_u v, T_v u, R(u, v))`` with ``uv`` = their sum.

    The low part ``S_{j_min}`` is folded in as the block ``j_min - 1``.
    """
    grid = u.grid
    idx = [bank.j_min - 1] + list(bank.indices)

    def blocks(f):
        out = {bank.j_min - 1: inverse_transform(lp_low(f, bank), tolerance=1e-8)}
        for j in bank.indices:
            out[j] = inverse_transform(lp_block(f, bank, j), tolerance=1e-8)
        return out

    bu, bv = blocks(u), blocks(v)
    t_uv = np.zeros(grid.shape)
    t_vu = np.zeros(grid.shape)
    rem = np.zeros(grid.shape)
    for j in idx:
        low_u = sum((bu[i] for i in idx if i <= j - 2), np.zeros(grid.shape))
        low_v = sum((bv[i] for i in idx if i <= j - 2), np.zeros(grid.shape))
        t_uv += low_u * bv[j]
        t_vu += low_v * bu[j]
        for jp in idx:
            if abs(j - jp) <= 1:
                rem += bu[j] * bv[jp]
    return t_uv, t_vu, rem


# Analyticity radius -----------------------------------------------------------

def shell_maxima(field: SpectralField) -> tuple[np.ndarray, np.ndarray]:
    """Per unit-width shell in ``|k|``: ``(|k| of the largest coefficient, its modulus)``.

    The zero mode is skipped; empty shells are dropped.
    """
    kk = field.grid.wavenumber_magnitude.ravel()
    amp = np.abs(field.coeffs).ravel()
    nz = kk > 0
    kk, amp = kk[nz], amp[nz]
    shell = np.floor(kk).astype(int)
    order = np.lexsort((-amp, shell))
    shell_sorted = shell[order]
    first = np.ones(len(order), dtype=bool)
    first[1:] = shell_sorted[1:] != shell_sorted[:-1]
    pick = order[first]
    return kk[pick], amp[pick]


def analyticity_radius(field: SpectralField, noise_floor: float = 1e-13,
                       return_fit: bool = False):
    """Exponential decay rate ``rho`` of the shell maxima, ``|u_hat| ~ C exp(-rho |k|)``.

    Fits ``log M = log C - rho |k|`` by least squares over shells whose maximum
    exceeds ``noise_floor``; ``rho`` is clamped at zero.
    """
    k, m = shell_maxima(field)
    use = m > noise_floor
    if np.count_nonzero(use) < 4:
        raise ValueError(
            f"only {np.count_nonzero(use)} shells above noise floor {noise_floor:g}; need 4"
        )
    slope, intercept = np.polyfit(k[use], np.log(m[use]), 1)
    rho = max(0.0, -float(slope))
    if return_fit:
        return rho, float(intercept), float(k[use].max())
    return rho


# Kato-Ponce ratio harness -----------------------------------------------------

def kato_ponce_ratio(f: SpectralField, g: SpectralField, s: float, p: float,
                     p1: float, q1: float, p2: float, q2: float) -> float:
    """``||Lambda^s(fg)||_p / (||Lambda^s f||_p1 ||g||_q1 + ||f||_p2 ||Lambda^s g||_q2)``."""
    if s < 0:
        raise ValueError("s must be non-negative")
    inv = lambda x: 0.0 if math.isinf(x) else 1.0 / x  # noqa: E731
    if not (math.isclose(inv(p), inv(p1) + inv(q1), abs_tol=1e-12)
            and math.isclose(inv(p), inv(p2) + inv(q2), abs_tol=1e-12)):
        raise ValueError("Hoelder exponents must satisfy 1/p = 1/p1 + 1/q1 = 1/p2 + 1/q2")
    grid = f.grid
    fv = inverse_transform(f)
    gv = inverse_transform(g)
    fg = SpectralField(grid, np.fft.fftn(fv * gv) / grid.size)
    num = sobolev_norm(fg, s, p)
    den = (sobolev_norm(f, s, p1) * lp_norm(gv, q1, grid)
           + lp_norm(fv, p2, grid) * sobolev_norm(g, s, q2))
    if den == 0:
        raise ZeroDivisionError("Kato-Ponce denominator vanishes")
    return num / den
