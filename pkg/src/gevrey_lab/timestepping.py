"""Exponential time integrators and the Picard mild-solution oracle.

The linear part ``-Lambda^kappa`` is diagonal in Fourier space and is
always propagated exactly by ``exp(-dt |k|^kappa)``; only the nonlinear
term is approximated.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .equations import BlowupError, EquationSpec, NonlinearTerm
from .spectral_core import Grid, SpectralField

__all__ = [
    "Scheme",
    "IntegratorConfig",
    "PicardConfig",
    "TrajectorySummary",
    "PicardResult",
    "ContractionError",
    "ExponentialStepper",
    "exponential_euler_step",
    "etdrk2_step",
    "integrate",
    "picard_solve",
    "phi1",
    "phi2",
]

log = logging.getLogger(__name__)

Hook = Callable[[float, SpectralField], None]


class Scheme(str, enum.Enum):
    ExponentialEuler = "ExponentialEuler"
    ETDRK2 = "ETDRK2"


class ContractionError(RuntimeError):
    """The Picard iteration failed to contract."""


@dataclass(frozen=True)
class IntegratorConfig:
    scheme: Scheme = Scheme.ETDRK2
    dt: float = 1e-3
    t_end: float = 1.0
    blowup_threshold: float = 1e8
    diagnostic_stride: int = 1

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_end < 0:
            raise ValueError(f"t_end must be non-negative, got {self.t_end}")
        if self.t_end > 0 and self.dt > self.t_end:
            raise ValueError(f"dt = {self.dt} exceeds t_end = {self.t_end}")
        if not self.blowup_threshold > 0:
            raise ValueError("blowup_threshold must be positive")
        if self.diagnostic_stride < 1:
            raise ValueError("diagnostic_stride must be >= 1")


@dataclass(frozen=True)
class PicardConfig:
    horizon_T: float
    quadrature_nodes: int = 64
    max_iters: int = 50
    fp_tolerance: float = 1e-12

    def __post_init__(self):
        if not self.horizon_T > 0:
            raise ValueError("horizon_T must be positive")
        if self.quadrature_nodes < 2:
            raise ValueError("need at least 2 quadrature nodes")
        if self.max_iters < 1 or not self.fp_tolerance > 0:
            raise ValueError("max_iters and fp_tolerance must be positive")


def phi1(dt: float, lam: np.ndarray) -> np.ndarray:
    """``(1 - exp(-dt lam)) / lam`` with the limit ``dt`` at ``lam = 0``."""
    lam = np.asarray(lam, dtype=float)
    out = np.full(lam.shape, float(dt))
    nz = lam != 0
    out[nz] = -np.expm1(-dt * lam[nz]) / lam[nz]
    return out


def phi2(dt: float, lam: np.ndarray) -> np.ndarray:
    """``(exp(-dt lam) - 1 + dt lam) / (dt lam^2)``, limit ``dt/2``."""
    lam = np.asarray(lam, dtype=float)
    x = dt * lam
    out = np.empty(lam.shape)
    small = np.abs(x) < 1e-3
    xs = x[small]
    out[small] = dt * (0.5 - xs / 6 + xs ** 2 / 24 - xs ** 3 / 120)
    xl = x[~small]
    out[~small] = dt * (np.expm1(-xl) + xl) / xl ** 2
    return out


class ExponentialStepper:
    """Precomputed exponential integrator for one equation on one grid."""

    def __init__(self, spec: EquationSpec, grid: Grid, dt: float,
                 scheme: Scheme | str = Scheme.ETDRK2, corrector_weight: float = 1.0):
        if not dt > 0:
            raise ValueError(f"dt must be positive, got {dt}")
        self.spec = spec
        self.grid = grid
        self.dt = dt
        self.scheme = Scheme(scheme)
        self.corrector_weight = corrector_weight
        self.nonlinear = NonlinearTerm(spec, grid)
        if spec.dissipation:
            self.lam = grid.wavenumber_magnitude ** spec.kappa
        else:
            self.lam = np.zeros(grid.shape)
        self.decay = np.exp(-dt * self.lam)
        self.phi1 = phi1(dt, self.lam)
        self.phi2 = phi2(dt, self.lam)

    def step(self, coeffs: np.ndarray) -> np.ndarray:
        if not self.spec.nonlinear:
            return self.decay * coeffs
        n0 = self.nonlinear(coeffs)
        a = self.decay * coeffs + self.phi1 * n0
        if self.scheme is Scheme.ExponentialEuler or self.corrector_weight == 0:
            return a
        n1 = self.nonlinear(a)
        return a + self.corrector_weight * self.phi2 * (n1 - n0)


def _check_finite(coeffs: np.ndarray, threshold: float, grid: Grid, t: float) -> None:
    if not np.all(np.isfinite(coeffs)):
        raise BlowupError(f"non-finite Fourier coefficients at t = {t:g}", time=t)
    # sum |u_hat| bounds max |u|; only transform when the cheap bound trips
    if np.sum(np.abs(coeffs)) > threshold:
        peak = np.max(np.abs(np.fft.ifftn(coeffs).real * grid.size))
        if peak > threshold:
            raise BlowupError(f"max |u| = {peak:.3e} exceeds {threshold:g} at t = {t:g}", time=t)


def exponential_euler_step(spec: EquationSpec, field: SpectralField, dt: float,
                           blowup_threshold: float = 1e8) -> SpectralField:
    """``u+ = exp(-dt L) u + phi_1(dt, L) G(u)``."""
    stepper = ExponentialStepper(spec, field.grid, dt, Scheme.ExponentialEuler)
    out = stepper.step(field.coeffs)
    _check_finite(out, blowup_threshold, field.grid, dt)
    return SpectralField(field.grid, out)


def etdrk2_step(spec: EquationSpec, field: SpectralField, dt: float,
                blowup_threshold: float = 1e8, corrector_weight: float = 1.0) -> SpectralField:
    """Second-order exponential Runge-Kutta (Cox-Matthews ETD2RK) step."""
    stepper = ExponentialStepper(spec, field.grid, dt, Scheme.ETDRK2, corrector_weight)
    out = stepper.step(field.coeffs)
    _check_finite(out, blowup_threshold, field.grid, dt)
    return SpectralField(field.grid, out)


@dataclass
class TrajectorySummary:
    field: SpectralField
    status: str  # "completed" | "blowup"
    t: float
    steps: int
    blowup_time: float | None = None
    message: str = ""

    @property
    def completed(self) -> bool:
        return self.status == "completed"


def integrate(spec: EquationSpec, u0: SpectralField, cfg: IntegratorConfig,
              hooks: Iterable[Hook] = ()) -> TrajectorySummary:
    """Advance ``u0`` to ``cfg.t_end``.

    Hooks get ``(t, field)`` at ``t = 0``, every ``diagnostic_stride`` steps
    and at the final time. A blow-up stops the run and is reported in the
    summary rather than raised.
    """
    hooks = list(hooks)
    grid = u0.grid
    if u0.grid.dim != spec.dim:
        raise ValueError(f"{spec.name.value} needs a {spec.dim}D grid")
    if spec.nonlinear and not spec.simulable:
        raise ValueError(f"{spec.name.value} with kappa = {spec.kappa} is not simulable")
    for h in hooks:
        h(0.0, u0)
    if cfg.t_end == 0:
        return TrajectorySummary(u0, "completed", 0.0, 0)

    n_full = int(np.floor(cfg.t_end / cfg.dt + 1e-9))
    remainder = cfg.t_end - n_full * cfg.dt
    if remainder <= 1e-12 * cfg.t_end:
        remainder = 0.0
    stepper = ExponentialStepper(spec, grid, cfg.dt, cfg.scheme)
    last = ExponentialStepper(spec, grid, remainder, cfg.scheme) if remainder > 0 else None
    total = n_full + (1 if last else 0)

    if spec.nonlinear:
        u_max = np.max(np.abs(np.fft.ifftn(u0.coeffs).real * grid.size))
        log.info("CFL estimate max|u| k_max dt = %.3g", u_max * grid.k_max * cfg.dt)

    coeffs = u0.coeffs.copy()
    t = 0.0
    for i in range(1, total + 1):
        is_last = i == total
        st = last if (is_last and last is not None) else stepper
        try:
            coeffs = st.step(coeffs)
            t = cfg.t_end if is_last else i * cfg.dt
            _check_finite(coeffs, cfg.blowup_threshold, grid, t)
        except BlowupError as exc:
            t_fail = exc.time if exc.time is not None else t + st.dt
            log.warning("blow-up at t = %g: %s", t_fail, exc)
            return TrajectorySummary(SpectralField(grid, coeffs), "blowup", t_fail, i,
                                     blowup_time=t_fail, message=str(exc))
        if i % cfg.diagnostic_stride == 0 or is_last:
            current = SpectralField(grid, coeffs)
            for h in hooks:
                h(t, current)
    return TrajectorySummary(SpectralField(grid, coeffs), "completed", t, total)


@dataclass
class PicardResult:
    times: np.ndarray
    fields: list[SpectralField]
    iterations: int
    distances: list[float] = field(default_factory=list)

    @property
    def contraction_ratios(self) -> np.ndarray:
        d = np.asarray(self.distances)
        if len(d) < 2:
            return np.array([])
        return d[1:] / d[:-1]

    @property
    def final(self) -> SpectralField:
        return self.fields[-1]


def picard_solve(spec: EquationSpec, u0: SpectralField, cfg: PicardConfig,
                 weighted_beta: float | None = None) -> PicardResult:
    """Fixed point of the Duhamel map on uniform trapezoid nodes over ``[0, T]``.

    Successive iterates are compared in ``sup_t ||.||_{L^2}``; when
    ``weighted_beta`` is given the distance uses ``t^{beta/kappa}``-weighted
    ``Lambda^beta`` norms instead.
    """
    grid = u0.grid
    term = NonlinearTerm(spec, grid)
    lam = grid.wavenumber_magnitude ** spec.kappa if spec.dissipation else np.zeros(grid.shape)
    times = np.linspace(0.0, cfg.horizon_T, cfg.quadrature_nodes)
    h = times[1] - times[0]
    m = len(times)

    # E[j] = exp(-t_j L); the kernel exp(-(t_j - s_i) L) = E[j - i] on uniform nodes
    E = np.exp(-times.reshape((-1,) + (1,) * grid.dim) * lam)
    linear = E * u0.coeffs

    if weighted_beta is None:
        weight = np.ones(m)
        symbol = np.ones(grid.shape)
    else:
        weight = times ** (weighted_beta / spec.kappa)
        kk = grid.wavenumber_magnitude
        symbol = np.where(kk > 0, kk ** weighted_beta, 0.0) if weighted_beta else np.ones(grid.shape)

    def distance(a, b):
        diff = np.abs(a - b) ** 2 * np.abs(symbol) ** 2
        per_time = np.sqrt(grid.volume * diff.reshape(m, -1).sum(axis=1))
        return float(np.max(weight * per_time))

    current = linear.copy()
    distances: list[float] = []
    growth = 0
    for it in range(1, cfg.max_iters + 1):
        g = np.stack([term(c) for c in current]) if spec.nonlinear else np.zeros_like(current)
        if not np.all(np.isfinite(g)):
            raise BlowupError("non-finite nonlinearity in Picard iteration")
        new = linear.copy()
        for j in range(1, m):
            # trapezoid over s_0..s_j of E[j-i] g[i]
            w = np.full(j + 1, h)
            w[0] = w[-1] = h / 2
            kern = E[j::-1]
            new[j] = new[j] + np.tensordot(w, kern * g[: j + 1], axes=1)
        d = distance(new, current)
        distances.append(d)
        current = new
        if d < cfg.fp_tolerance:
            return PicardResult(times, [SpectralField(grid, c) for c in current], it, distances)
        if len(distances) >= 2 and distances[-1] > distances[-2]:
            growth += 1
            if growth >= 3:
                ratio = distances[-1] / distances[-2]
                raise ContractionError(
                    f"Picard iteration expanding: successive-distance ratio {ratio:.3g} "
                    f"after {it} iterations"
                )
        else:
            growth = 0
    raise ContractionError(
        f"Picard iteration did not reach tolerance {cfg.fp_tolerance:g} in {cfg.max_iters} "
        f"iterations (last distance {distances[-1]:.3e})"
    )
