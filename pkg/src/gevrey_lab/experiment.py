"""Run one configured experiment and write its CSV/JSON/figure artifacts."""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analysis import (
    FourierDecayTracker,
    GevreyMonitor,
    NormSeries,
    valid_window_end,
    verify_decay,
    wraparound_fraction,
)
from .config import ExperimentConfig, build_initial
from .equations import check_admissibility, compute_beta_c, predicted_decay_exponent
from .norms import GevreyOverflowError, GevreyParams, gevrey_norm, sobolev_norm
from .timestepping import TrajectorySummary, integrate

__all__ = ["SCHEMA_VERSION", "ExperimentResult", "run_experiment", "fit_decays",
           "write_csv", "write_json", "sanitize"]

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    times: list[float]
    columns: dict[str, list[float]]
    trajectory: TrajectorySummary
    gevrey: GevreyMonitor | None = None
    tracker: FourierDecayTracker | None = None
    fits: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return 0 if self.trajectory.completed else 2

    def series(self, label: str) -> NormSeries:
        t = np.asarray(self.times)
        v = np.asarray(self.columns[label])
        keep = np.isfinite(v)
        return NormSeries(t[keep], v[keep], label)


def _number(text: str) -> float:
    return math.inf if text in ("inf", "infinity") else float(text)


def _column_fn(item: str, cfg: ExperimentConfig):
    parts = item.split(":")
    kind = parts[0]
    if kind == "sobolev":
        beta, p = _number(parts[1]), _number(parts[2])
        return lambda t, f: sobolev_norm(f, beta, p)
    if kind == "gevrey":
        beta, p = _number(parts[1]), _number(parts[2])
        base = cfg.diagnostics.gevrey or GevreyParams(kappa=cfg.spec.kappa)
        gp = GevreyParams(0.0, beta, cfg.spec.kappa, p, base.weight_constant, base.weight_norm,
                          base.flavor)

        def gev(t, f):
            try:
                return gevrey_norm(f, gp.at(t))
            except GevreyOverflowError:
                return math.nan
        return gev
    if kind == "mode":
        m = tuple(int(x) for x in parts[1:])
        n = cfg.grid.points_per_dim
        idx = tuple(x % n for x in m)
        # amplitude of the real mode a cos(k.x + phase)
        return lambda t, f: 2.0 * abs(f.coeffs[idx])
    if kind == "wraparound":
        return lambda t, f: wraparound_fraction(f)
    raise ValueError(f"unknown diagnostic {item!r}")


def _labels(cfg: ExperimentConfig) -> list[str]:
    d = cfg.diagnostics
    labels = [n for n in d.norms if n != "rho"]
    for z in d.zeta:
        label = f"sobolev:{z:g}:{d.p:g}"
        if label not in labels:
            labels.append(label)
    if d.wraparound and "wraparound" not in labels:
        labels.append("wraparound")
    return labels


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    u0 = build_initial(cfg.initial, cfg.grid)
    labels = _labels(cfg)
    fns = {label: _column_fn(label, cfg) for label in labels}
    times: list[float] = []
    columns: dict[str, list[float]] = {label: [] for label in labels}
    hooks = []

    def record(t, f):
        times.append(t)
        for label, fn in fns.items():
            columns[label].append(float(fn(t, f)))
    hooks.append(record)

    gevrey = None
    if cfg.diagnostics.gevrey is not None:
        gevrey = GevreyMonitor(cfg.diagnostics.gevrey)
        gev_label = f"gevrey_monitor:{cfg.diagnostics.gevrey.beta:g}:{cfg.diagnostics.gevrey.p:g}"
        columns[gev_label] = []

        def gev_hook(t, f):
            before = len(gevrey.values)
            gevrey(t, f)
            columns[gev_label].append(gevrey.values[-1] if len(gevrey.values) > before else math.nan)
        hooks.append(gev_hook)

    tracker = None
    if cfg.diagnostics.fourier_tracker or "rho" in cfg.diagnostics.norms:
        tracker = FourierDecayTracker(cfg.diagnostics.noise_floor)
        columns["rho"] = []
        columns["rho_saturated"] = []

        def rho_hook(t, f):
            tracker(t, f)
            columns["rho"].append(tracker.rho[-1])
            columns["rho_saturated"].append(float(tracker.saturated[-1]))
        hooks.append(rho_hook)

    trajectory = integrate(cfg.spec, u0, cfg.integrator, hooks)
    result = ExperimentResult(cfg, times, columns, trajectory, gevrey, tracker)
    result.fits = fit_decays(result, cfg.diagnostics.zeta)
    result.summary = _summary(result)
    return result


def fit_decays(result: ExperimentResult, zetas) -> list[dict]:
    cfg = result.config
    d = cfg.diagnostics
    fits = []
    times = np.asarray(result.times)
    positive = times[times > 0]
    for z in zetas:
        label = f"sobolev:{z:g}:{d.p:g}"
        entry = {"zeta": z, "p": d.p, "label": label, "mode": d.decay_mode}
        try:
            if label not in result.columns:
                raise ValueError(f"no recorded series {label}")
            if len(positive) == 0:
                raise ValueError("no samples at positive times")
            window = d.fit_window or (float(positive[0]), float(positive[-1]))
            if d.wraparound:
                end = valid_window_end(result.times, result.columns["wraparound"])
                window = (window[0], min(window[1], end))
                entry["wraparound_window_end"] = end
            fit = verify_decay(result.series(label), cfg.spec, z, d.p, d.tolerance,
                               window=window, mode=d.decay_mode)
            entry.update(fit.as_dict())
        except ValueError as exc:
            entry.update({"verdict": False, "error": str(exc)})
        fits.append(entry)
    return fits


def _summary(result: ExperimentResult) -> dict:
    cfg = result.config
    spec = cfg.spec
    d = cfg.diagnostics
    adm = check_admissibility(spec, d.p)
    predicted = {}
    for z in d.zeta:
        try:
            predicted[f"{z:g}"] = predicted_decay_exponent(spec, z, d.p)
        except ValueError:
            predicted[f"{z:g}"] = math.nan
    verdicts = {}
    if result.fits:
        verdicts["decay"] = all(bool(f.get("verdict")) for f in result.fits)
    gevrey_report = None
    if result.gevrey is not None:
        gevrey_report = result.gevrey.report().as_dict()
        verdicts["gevrey_bound"] = gevrey_report["bounded_by_twice_initial"]
    fourier = None
    if result.tracker is not None:
        fourier = result.tracker.verdict(spec.kappa)
        verdicts["fourier_decay"] = bool(fourier["positive"] and fourier["nondecreasing"])
    traj = result.trajectory
    return {
        "schema_version": SCHEMA_VERSION,
        "config": str(cfg.source) if cfg.source else None,
        "equation": {
            "name": spec.name.value, "kappa": spec.kappa, "dim": spec.dim,
            "degree_n": spec.degree_n, "alpha_T": list(spec.alpha_T),
            "params": {k: list(v) if isinstance(v, tuple) else v for k, v in spec.params.items()},
            "nonlinear": spec.nonlinear, "dissipation": spec.dissipation,
        },
        "grid": {"dim": cfg.grid.dim, "points_per_dim": cfg.grid.points_per_dim,
                 "box_length": cfg.grid.box_length},
        "p": d.p,
        "beta_c": compute_beta_c(spec, d.p),
        "admissibility": {"condition_sum": adm.condition_sum, "condition_min": adm.condition_min,
                          "beta0_range": list(adm.beta0_range),
                          "smallness_sum": adm.smallness_sum},
        "predicted_exponents": predicted,
        "decay_fits": result.fits,
        "gevrey": gevrey_report,
        "fourier_decay": fourier,
        "status": traj.status,
        "final_time": traj.t,
        "steps": traj.steps,
        "blowup_time": traj.blowup_time,
        "verdicts": verdicts,
        "all_verdicts_true": all(verdicts.values()) if verdicts else None,
    }


def sanitize(obj):
    """Replace non-finite floats by strings; returns ``(clean, replaced)``."""
    replaced = False

    def walk(x):
        nonlocal replaced
        if isinstance(x, dict):
            return {str(k): walk(v) for k, v in x.items()}
        if isinstance(x, (list, tuple)):
            return [walk(v) for v in x]
        if isinstance(x, (np.floating, np.integer, np.bool_)):
            x = x.item()
        if isinstance(x, float) and not math.isfinite(x):
            replaced = True
            return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
        return x

    return walk(obj), replaced


def write_csv(result: ExperimentResult, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    labels = list(result.columns)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + labels)
        for i, t in enumerate(result.times):
            w.writerow([f"{t:.16e}"] + [f"{result.columns[c][i]:.16e}" for c in labels])


def write_json(data: dict | list, path: Path | None) -> str:
    if isinstance(data, list):
        clean = []
        for entry in data:
            c, replaced = sanitize(entry)
            clean.append({**c, "nan_replaced": replaced} if isinstance(c, dict) else c)
    else:
        clean, replaced = sanitize(data)
        if isinstance(clean, dict):
            clean["nan_replaced"] = replaced
    text = json.dumps(clean, indent=2, allow_nan=False)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + "\n", encoding="utf-8")
    return text
