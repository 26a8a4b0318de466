"""Decay fitting and trajectory monitors.

Monitors are plain callables ``hook(t, field)`` that can be handed to
:func:`gevrey_lab.timestepping.integrate`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .equations import EquationSpec, compute_beta_c, predicted_decay_exponent
from .norms import (
    GevreyOverflowError,
    GevreyParams,
    analyticity_radius,
    gevrey_norm,
    sobolev_norm,
)
from .spectral_core import SpectralField, dealias_mask, inverse_transform

__all__ = [
    "NormSeries",
    "DecayFit",
    "GevreyReport",
    "fit_power_law",
    "verify_decay",
    "NormRecorder",
    "GevreyMonitor",
    "FourierDecayTracker",
    "gevrey_bound_monitor",
    "fourier_decay_tracker",
    "wraparound_fraction",
    "valid_window_end",
    "sobolev_recorder",
]


@dataclass
class NormSeries:
    times: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape or self.times.ndim != 1:
            raise ValueError("times and values must be 1-D arrays of equal length")
        if np.any(np.isnan(self.values)) or np.any(np.isnan(self.times)):
            raise ValueError(f"series {self.label!r} contains NaN")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError(f"series {self.label!r} times must be strictly increasing")
        if np.any(self.values < 0):
            raise ValueError(f"series {self.label!r} has negative values")

    def __len__(self):
        return len(self.times)

    def window(self, window: tuple[float, float]) -> "NormSeries":
        lo, hi = window
        sel = (self.times >= lo) & (self.times <= hi)
        return NormSeries(self.times[sel], self.values[sel], self.label)


@dataclass
class DecayFit:
    fitted_exponent: float
    intercept: float
    r_squared: float
    window: tuple[float, float]
    predicted_exponent: float | None = None
    verdict: bool | None = None
    mode: str = "power_law"
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "fitted_exponent": self.fitted_exponent,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "window": list(self.window),
            "predicted_exponent": self.predicted_exponent,
            "verdict": self.verdict,
            "mode": self.mode,
            **self.details,
        }


def fit_power_law(series: NormSeries, window: tuple[float, float] | None = None) -> DecayFit:
    """OLS fit of ``log v = intercept - exponent * log t``."""
    if window is None:
        window = (float(series.times[0]), float(series.times[-1]))
    sub = series.window(window)
    if len(sub) < 5:
        raise ValueError(f"need at least 5 samples in window {window}, got {len(sub)}")
    if np.any(sub.values <= 0) or np.any(sub.times <= 0):
        raise ValueError("power-law fit needs positive times and values in the window")
    x = np.log(sub.times)
    y = np.log(sub.values)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot <= 1e-300 * len(y):
        r2 = 1.0 if ss_res <= 1e-24 * len(y) else 0.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return DecayFit(-float(slope), float(intercept), r2,
                    (float(sub.times[0]), float(sub.times[-1])))


def verify_decay(series: NormSeries, spec: EquationSpec, zeta: float, p: float,
                 tolerance: float, window: tuple[float, float] | None = None,
                 mode: str = "power_law", min_r_squared: float = 0.95) -> DecayFit:
    """Compare a measured decay with the rate ``(zeta - beta_c)/kappa``.

    ``mode="power_law"`` checks the fitted exponent against the prediction.
    ``mode="one_sided"`` is for periodic mean-zero runs, whose decay is
    exponential: it checks that ``t^rate * v(t)`` never exceeds its maximum
    over the first decade of the window.
    """
    predicted = predicted_decay_exponent(spec, zeta, p)
    fit = fit_power_law(series, window)
    fit.predicted_exponent = predicted
    fit.mode = mode
    fit.details["beta_c"] = compute_beta_c(spec, p)
    fit.details["zeta"] = zeta
    if mode == "power_law":
        fit.verdict = bool(abs(fit.fitted_exponent - predicted) <= tolerance
                           and fit.r_squared >= min_r_squared)
    elif mode == "one_sided":
        sub = series.window(fit.window)
        scaled = sub.times ** predicted * sub.values
        first = sub.times <= 10 * sub.times[0]
        initial_max = float(scaled[first].max())
        overall = float(scaled.max())
        fit.details["initial_max"] = initial_max
        fit.details["overall_max"] = overall
        fit.verdict = bool(overall <= initial_max * (1 + 1e-12))
    else:
        raise ValueError(f"unknown decay mode {mode!r}")
    return fit


class NormRecorder:
    """Records ``norm(field)`` at every hook call."""

    def __init__(self, norm: Callable[[SpectralField], float], label: str = ""):
        self.norm = norm
        self.label = label
        self.times: list[float] = []
        self.values: list[float] = []

    def __call__(self, t: float, field: SpectralField) -> None:
        self.times.append(t)
        self.values.append(self.norm(field))

    def series(self) -> NormSeries:
        return NormSeries(np.array(self.times), np.array(self.values), self.label)


@dataclass
class GevreyReport:
    supremum: float
    reference: float
    bounded: bool
    truncated_at: float | None = None

    def as_dict(self) -> dict:
        return {"supremum": self.supremum, "reference": self.reference,
                "ratio": self.supremum / self.reference if self.reference else math.inf,
                "bounded_by_twice_initial": self.bounded, "truncated_at": self.truncated_at}


class GevreyMonitor:
    """Tracks ``||u(t)||_{Gv(t)}``, the Gevrey norm with ``s`` equal to elapsed time.

    The reference is the same norm of the initial data (``s = 0``). An
    overflowing weight ends monitoring and is kept as a truncation marker.
    """

    def __init__(self, gp_base: GevreyParams, label: str = "gevrey"):
        self.gp_base = gp_base
        self.label = label
        self.times: list[float] = []
        self.values: list[float] = []
        self.reference: float | None = None
        self.truncated_at: float | None = None

    def __call__(self, t: float, field: SpectralField) -> None:
        if self.truncated_at is not None:
            return
        try:
            value = gevrey_norm(field, self.gp_base.at(t))
        except GevreyOverflowError:
            self.truncated_at = t
            return
        if self.reference is None:
            self.reference = gevrey_norm(field, self.gp_base.at(0.0))
        self.times.append(t)
        self.values.append(value)

    def series(self) -> NormSeries:
        return NormSeries(np.array(self.times), np.array(self.values), self.label)

    def report(self) -> GevreyReport:
        sup = float(max(self.values)) if self.values else 0.0
        ref = float(self.reference or 0.0)
        return GevreyReport(sup, ref, sup <= 2 * ref, self.truncated_at)


def gevrey_bound_monitor(gp_base: GevreyParams) -> GevreyMonitor:
    return GevreyMonitor(gp_base)


class FourierDecayTracker:
    """Records the analyticity radius ``rho(t)`` along a trajectory.

    A sample is flagged saturated once the spectrum no longer reaches the
    top resolved shell: either the fitted line ``log C - rho |k|`` drops
    below the noise floor before ``resolved_k``, or the largest shell above
    the floor recedes from the largest one seen so far. Fewer than four
    shells above the floor also counts. Saturation is sticky.
    """

    def __init__(self, noise_floor: float = 1e-13, resolved_k: float | None = None):
        self.noise_floor = noise_floor
        self.resolved_k = resolved_k
        self.times: list[float] = []
        self.rho: list[float] = []
        self.saturated: list[bool] = []
        self._reach = 0.0

    def __call__(self, t: float, field: SpectralField) -> None:
        if self.resolved_k is None:
            grid = field.grid
            mask = dealias_mask(grid)
            self.resolved_k = float(grid.wavenumber_magnitude[mask].max())
        already = bool(self.saturated and self.saturated[-1])
        try:
            rho, intercept, reach = analyticity_radius(field, self.noise_floor, return_fit=True)
        except ValueError:
            self.times.append(t)
            self.rho.append(math.nan)
            self.saturated.append(True)
            return
        crossed = (intercept - rho * self.resolved_k < math.log(self.noise_floor)
                   or reach < self._reach)
        self._reach = max(self._reach, reach)
        self.times.append(t)
        self.rho.append(rho)
        self.saturated.append(already or crossed)

    def pre_saturation(self) -> tuple[np.ndarray, np.ndarray]:
        t = np.asarray(self.times)
        r = np.asarray(self.rho)
        s = np.asarray(self.saturated, dtype=bool)
        return t[~s], r[~s]

    @property
    def saturation_time(self) -> float | None:
        for t, s in zip(self.times, self.saturated):
            if s:
                return t
        return None

    def verdict(self, kappa: float) -> dict:
        """Positivity, monotonicity and the ``rho >= c t^{1/kappa}`` constant on the pre-saturation window."""
        t, r = self.pre_saturation()
        pos = t > 0
        if not np.any(pos):
            return {"positive": False, "nondecreasing": False, "c": 0.0, "samples": 0,
                    "saturation_time": self.saturation_time}
        c = float(np.min(r[pos] / t[pos] ** (1.0 / kappa)))
        return {
            "positive": bool(np.all(r[pos] > 0)),
            "nondecreasing": bool(np.all(np.diff(r) >= 0)),
            "c": c,
            "samples": int(pos.sum()),
            "saturation_time": self.saturation_time,
        }


def fourier_decay_tracker(noise_floor: float = 1e-13, resolved_k: float | None = None
                          ) -> FourierDecayTracker:
    return FourierDecayTracker(noise_floor, resolved_k)


def wraparound_fraction(field: SpectralField, edge: float = 0.1) -> float:
    """Share of ``int |u|`` lying within ``edge * L`` of the box boundary.

    Used to end whole-space surrogate fits before the periodic images interact.
    """
    grid = field.grid
    values = np.abs(inverse_transform(field, tolerance=1e-8))
    near = np.zeros(grid.shape, dtype=bool)
    for x in grid.coordinates():
        near |= (x < edge * grid.box_length) | (x > (1 - edge) * grid.box_length)
    total = values.sum()
    return float(values[near].sum() / total) if total > 0 else 0.0


def valid_window_end(times: Sequence[float], fractions: Sequence[float],
                     threshold: float = 0.01) -> float:
    """Last time before the wrap-around fraction first exceeds ``threshold``."""
    times = list(times)
    for t, f in zip(times, fractions):
        if f > threshold:
            earlier = [s for s in times if s < t]
            return earlier[-1] if earlier else times[0]
    return times[-1]


def sobolev_recorder(beta: float, p: float = 2.0) -> NormRecorder:
    return NormRecorder(lambda f: sobolev_norm(f, beta, p), f"sobolev:beta={beta:g}:p={p:g}")
