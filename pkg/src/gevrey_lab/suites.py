"""Built-in acceptance suites run by ``gevrey-lab check <suite>``.

Each suite returns a list of :class:`Check` rows. Suites that share the
small-data Burgers trajectory reuse one cached run.
"""
from __future__ import annotations

import csv
import functools
import math
import tempfile
import textwrap
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import equations as eq
from .analysis import FourierDecayTracker, NormRecorder
from .config import build_initial, load_config
from .experiment import run_experiment
from .norms import (
    GevreyParams,
    bony_decomposition,
    gevrey_norm,
    kato_ponce_ratio,
    lp_block,
    lp_build,
    lp_low,
    sobolev_norm,
    triebel_lizorkin_norm,
)
from .oracles import brute_force_nonlinearity
from .spectral_core import Grid, SpectralField, inverse_transform, smoothing_maximum
from .timestepping import IntegratorConfig, PicardConfig, integrate, picard_solve

__all__ = ["Check", "SUITES", "run_suite", "format_table", "random_field", "EXPERIMENTS_DIR",
           "TL_RATIO_BOUNDS", "KATO_PONCE_BOUND"]

EXPERIMENTS_DIR = Path(__file__).resolve().parents[2] / "experiments"

# Empirical regression values, measured once on 100 (TL) and 1000 (Kato-Ponce)
# seeded random fields and widened by a safety margin. They are not
# theoretical constants.
TL_RATIO_BOUNDS = (0.6, 1.2)
KATO_PONCE_BOUND = 2.0


@dataclass
class Check:
    name: str
    passed: bool
    measured: float
    threshold: str
    detail: str = ""


def format_table(rows: list[Check]) -> str:
    width = max([len(r.name) for r in rows] + [5])
    lines = [f"{'check':<{width}}  result  {'measured':>12}  threshold"]
    for r in rows:
        lines.append(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL':<6}  "
                     f"{r.measured:>12.4g}  {r.threshold}" + (f"  ({r.detail})" if r.detail else ""))
    verdict = "PASS" if all(r.passed for r in rows) else "FAIL"
    lines.append(f"overall: {verdict}")
    return "\n".join(lines)


def random_field(grid: Grid, band: int, rng: np.random.Generator, slope: float = 0.0
                 ) -> SpectralField:
    """Mean-zero real field with modes ``|m_i| <= band`` and spectrum ``~ |k|^-slope``."""
    keep = np.all(np.abs(grid.integer_frequencies) <= band, axis=0) & (grid.wavenumber_magnitude > 0)
    c = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    c = c * keep * np.where(keep, grid.wavenumber_magnitude, 1.0) ** (-slope)
    return SpectralField(grid, c).symmetrized()


def _rel(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


# 1 ----------------------------------------------------------------------------

BETA_C_TABLE = [
    ("3D NSE, p=2", eq.nse3d(), 2.0, 0.5),
    ("Burgers n=3, p=2", eq.burgers(3), 2.0, 0.0),
    ("Cahn-Hilliard d=3, p=2", eq.cahn_hilliard_cubic(3), 2.0, 0.5),
    ("SQG kappa=1.5, p=4", eq.sqg(1.5), 4.0, 0.0),
    ("heat d=2 kappa=2 n=3, p=2", eq.fractional_heat(2, 2.0, 3), 2.0, 0.0),
]


def suite_beta_c_table() -> list[Check]:
    rows = []
    for label, spec, p, expected in BETA_C_TABLE:
        got = eq.compute_beta_c(spec, p)
        err = abs(got - expected)
        rows.append(Check(f"beta_c {label}", err <= 1e-14, got, f"= {expected:g} +- 1e-14"))
    return rows


# 2 ----------------------------------------------------------------------------

_LINEAR_TEMPLATE = """
[equation]
name = FractionalHeat
kappa = {kappa}
nonlinear = false
[grid]
points = 64
[integrator]
dt = 0.01
t_end = 0.1
[initial]
kind = single_mode
k = {k}
amplitude = {amplitude}
[diagnostics]
norms = mode:{k}
[output]
csv = linear.csv
figures = false
"""


def linear_exactness_error(kappa: float, k: int = 3, amplitude: float = 1.0) -> float:
    """Max relative error of the CSV mode column against ``A exp(-t k^kappa)``."""
    from .cli import run
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "linear.ini"
        path.write_text(textwrap.dedent(_LINEAR_TEMPLATE.format(kappa=kappa, k=k,
                                                                amplitude=amplitude)))
        run(path)
        with open(Path(tmp) / "linear.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
    t = np.array([float(r["t"]) for r in rows])
    v = np.array([float(r[f"mode:{k}"]) for r in rows])
    exact = amplitude * np.exp(-t * float(k) ** kappa)
    return float(np.max(np.abs(v - exact) / exact))


def suite_linear_exactness() -> list[Check]:
    rows = []
    for kappa in (1.5, 2.0, 4.0):
        err = linear_exactness_error(kappa)
        rows.append(Check(f"linear heat kappa={kappa:g}", err <= 1e-12, err, "<= 1e-12 rel"))
    return rows


# 3 ----------------------------------------------------------------------------

def oracle_discrepancy(n_points: int = 64, horizon: float = 0.1, amplitude: float = 0.1):
    grid = Grid(1, n_points)
    x = grid.coordinates()[0]
    u0 = SpectralField(grid, np.fft.fft(amplitude * np.sin(x)) / n_points)
    spec = eq.burgers(3)
    pic = picard_solve(spec, u0, PicardConfig(horizon, quadrature_nodes=64))
    traj = integrate(spec, u0, IntegratorConfig("ETDRK2", dt=1e-4, t_end=horizon))
    diff = sobolev_norm(pic.final - traj.field, 0.0, 2.0)
    return diff, pic


def suite_oracle_equivalence() -> list[Check]:
    diff, pic = oracle_discrepancy()
    return [Check("Picard vs ETDRK2, Burgers n=3", diff < 1e-5, diff, "< 1e-5 (L2)",
                  f"{pic.iterations} Picard iterations")]


# 4 ----------------------------------------------------------------------------

def _oracle_instances():
    return [
        (eq.fractional_heat(1, 2.0, 3), Grid(1, 32), 3),
        (eq.burgers(3), Grid(1, 32), 3),
        (eq.sqg(1.5), Grid(2, 32), 5),
        (eq.nse2d_vorticity(), Grid(2, 32), 5),
        (eq.cahn_hilliard_cubic(1, 1.3), Grid(1, 32), 3),
        (eq.cahn_hilliard_general(1, (0.2, -0.1, 1.0, 0.0, 0.5)), Grid(1, 32), 2),
    ]


def suite_nonlinearity_oracle() -> list[Check]:
    rng = np.random.default_rng(11)
    rows = []
    for spec, grid, band in _oracle_instances():
        worst = 0.0
        for _ in range(3):
            u = random_field(grid, band, rng)
            fast = eq.evaluate_nonlinearity(spec, u).coeffs
            slow = brute_force_nonlinearity(spec, u).coeffs
            worst = max(worst, _rel(fast, slow))
        rows.append(Check(f"G(u) {spec.name.value}", worst <= 1e-10, worst, "<= 1e-10 rel"))
    return rows


# 5 ----------------------------------------------------------------------------

def suite_decay_heat() -> list[Check]:
    from .oracles import gaussian_heat_sobolev_norm
    result = run_experiment(load_config(EXPERIMENTS_DIR / "heat_whole_space.ini"))
    fit = result.fits[0]
    t = np.asarray(result.times)
    v = np.asarray(result.columns["sobolev:1:2"])
    exact = np.array([gaussian_heat_sobolev_norm(s, 1.0) for s in t])
    return [
        Check("heat fitted exponent", abs(fit["fitted_exponent"] - 0.75) <= 0.05,
              fit["fitted_exponent"], "0.75 +- 0.05", f"window {fit['window']}"),
        Check("heat vs Gaussian closed form", _rel(v, exact) <= 1e-6, _rel(v, exact),
              "<= 1e-6 rel", "whole-line oracle on the large box"),
    ]


# 6, 7, decay_burgers ------------------------------------------------------------

@functools.lru_cache(maxsize=1)
def burgers_small_run():
    return run_experiment(load_config(EXPERIMENTS_DIR / "burgers_small.ini"))


def suite_gevrey_bound() -> list[Check]:
    rep = burgers_small_run().summary["gevrey"]
    return [Check("sup Gv(t) <= 2 ||u0||", rep["bounded_by_twice_initial"], rep["ratio"],
                  "ratio <= 2", f"truncated_at={rep['truncated_at']}")]


def linear_rho_control(n_points: int = 64, seed: int = 5, times=None) -> tuple[np.ndarray, np.ndarray]:
    """``rho(t)`` for the kappa = 1 semigroup from unit-modulus random-phase data."""
    grid = Grid(1, n_points)
    rng = np.random.default_rng(seed)
    m = grid.integer_frequencies[0].astype(int)
    c = np.exp(1j * rng.uniform(0, 2 * np.pi, grid.shape))
    c = np.where(m < 0, np.conj(c[(-m) % n_points]), c)
    c[0] = 0.0
    c[n_points // 2] = 1.0
    u0 = SpectralField(grid, c)
    tracker = FourierDecayTracker(noise_floor=1e-13)
    spec = eq.fractional_heat(1, 1.0).replace(nonlinear=False)
    integrate(spec, u0, IntegratorConfig("ETDRK2", dt=0.1, t_end=0.8), [tracker])
    t, rho = tracker.pre_saturation()
    return t[t > 0], rho[t > 0]


def suite_fourier_decay() -> list[Check]:
    verdict = burgers_small_run().summary["fourier_decay"]
    t, rho = linear_rho_control()
    dev = float(np.max(np.abs(rho / t - 1)))
    return [
        Check("Burgers rho(t) > 0", verdict["positive"], verdict["samples"], ">= 1 sample",
              f"saturation at t={verdict['saturation_time']}"),
        Check("Burgers rho nondecreasing", verdict["nondecreasing"], verdict["c"],
              "c = min rho/t^(1/kappa) > 0"),
        Check("kappa=1 control rho = t", dev <= 0.02 and len(t) >= 5, dev, "<= 2% rel"),
    ]


def suite_decay_burgers() -> list[Check]:
    rows = []
    for fit in burgers_small_run().fits:
        measured = fit.get("overall_max", math.nan) / fit.get("initial_max", math.nan)
        rows.append(Check(f"Burgers one-sided zeta={fit['zeta']:g}", bool(fit["verdict"]), measured,
                          "overall/initial max <= 1"))
    return rows


# 8 ----------------------------------------------------------------------------

def sqg_run(kappa: float):
    p = 2.0 / (kappa - 1.0)
    cfg = load_config(EXPERIMENTS_DIR / "sqg.ini",
                      {"equation.kappa": repr(kappa), "diagnostics.p": repr(p)})
    return run_experiment(cfg)


def suite_sqg_sweep() -> list[Check]:
    rows = []
    for kappa in (1.25, 1.5, 2.0):
        result = sqg_run(kappa)
        for fit in result.fits:
            ratio = fit.get("overall_max", math.nan) / fit.get("initial_max", math.nan)
            rows.append(Check(f"SQG kappa={kappa:g} zeta={fit['zeta']:g}",
                              bool(fit["verdict"]) and result.trajectory.completed, ratio,
                              "overall/initial max <= 1", f"p={fit['p']:g}"))
    return rows


# 9 ----------------------------------------------------------------------------

def energy_drift(cfg) -> tuple[float, float]:
    """Largest increase of ``||u||^2`` between samples, and ``||u0||^2``."""
    u0 = build_initial(cfg.initial, cfg.grid)
    rec = NormRecorder(lambda f: sobolev_norm(f, 0.0, 2.0) ** 2)
    integrate(cfg.spec, u0, cfg.integrator, [rec])
    e = np.asarray(rec.values)
    return float(np.max(np.diff(e))), float(e[0])


def suite_energy() -> list[Check]:
    rows = []
    cases = [
        ("Cahn-Hilliard cubic", load_config(EXPERIMENTS_DIR / "cahn_hilliard.ini")),
        ("Burgers n=3", load_config(EXPERIMENTS_DIR / "burgers_small.ini",
                                    {"initial.l2_norm": "0.5", "integrator.t_end": "2"})),
    ]
    for label, cfg in cases:
        cfg.integrator = replace(cfg.integrator, diagnostic_stride=1)
        rise, e0 = energy_drift(cfg)
        rows.append(Check(f"{label} L2 non-increasing", rise <= 1e-8 * e0, rise / e0,
                          "max rise <= 1e-8 ||u0||^2"))
    return rows


# 10 ---------------------------------------------------------------------------

def _numeric_smoothing_max(alpha: float, t: float, kappa: float) -> float:
    """Golden-section maximisation of ``y^alpha exp(-t y^kappa)`` in ``log y``."""
    f = lambda s: alpha * s - t * math.exp(kappa * s)  # noqa: E731
    lo, hi = -50.0, 50.0
    g = (math.sqrt(5) - 1) / 2
    for _ in range(200):
        a, b = hi - g * (hi - lo), lo + g * (hi - lo)
        if f(a) < f(b):
            lo = a
        else:
            hi = b
    return math.exp(f((lo + hi) / 2))


def suite_norm_machinery() -> list[Check]:
    rng = np.random.default_rng(2024)
    rows = []

    g1 = Grid(1, 64)
    errs = []
    for beta in (0.0, 0.5, 1.0, 2.0):
        f = random_field(g1, 15, rng, slope=1.0)
        errs.append(abs(gevrey_norm(f, GevreyParams(0.0, beta, 2.0, 2.0)) / sobolev_norm(f, beta) - 1))
    rows.append(Check("Gevrey s=0 equals Sobolev", max(errs) <= 1e-12, max(errs), "<= 1e-12 rel"))

    worst = 0.0
    for grid in (Grid(1, 128), Grid(2, 32)):
        bank = lp_build(grid)
        f = random_field(grid, grid.points_per_dim // 2, rng)
        total = lp_low(f, bank).coeffs.copy()
        for j in bank.indices:
            total += lp_block(f, bank, j).coeffs
        worst = max(worst, _rel(total, f.coeffs))
    rows.append(Check("LP reconstruction", worst <= 1e-12, worst, "<= 1e-12 rel"))

    bank = lp_build(g1)
    lo, hi = math.inf, 0.0
    for alpha in (0.5, 1.0):
        for p in (2.0, 4.0):
            for _ in range(25):
                f = random_field(g1, 15, rng, slope=rng.uniform(0, 3))
                r = triebel_lizorkin_norm(f, alpha, p, bank) / sobolev_norm(f, alpha, p)
                lo, hi = min(lo, r), max(hi, r)
    ok = TL_RATIO_BOUNDS[0] <= lo and hi <= TL_RATIO_BOUNDS[1]
    rows.append(Check("TL / Sobolev ratio", ok, hi, f"in {TL_RATIO_BOUNDS} (empirical)",
                      f"min {lo:.3f}"))

    kp = 0.0
    for i in range(1000):
        s = (0.5, 1.0, 2.0)[i % 3]
        f = random_field(g1, 15, rng, slope=rng.uniform(0, 3))
        h = random_field(g1, 15, rng, slope=rng.uniform(0, 3))
        kp = max(kp, kato_ponce_ratio(f, h, s, 2.0, 4.0, 4.0, 4.0, 4.0))
    rows.append(Check("Kato-Ponce ratio, 1000 pairs", kp < KATO_PONCE_BOUND, kp,
                      f"< {KATO_PONCE_BOUND} (empirical)"))

    worst = 0.0
    for grid in (Grid(1, 64), Grid(2, 32)):
        bank = lp_build(grid)
        band = grid.points_per_dim // 4 - 1
        u, v = random_field(grid, band, rng), random_field(grid, band, rng)
        parts = bony_decomposition(u, v, bank)
        uv = inverse_transform(u) * inverse_transform(v)
        worst = max(worst, _rel(sum(parts), uv))
    rows.append(Check("Bony three-term reconstruction", worst <= 1e-10, worst, "<= 1e-10 rel"))

    worst = 0.0
    for alpha, t, kappa in [(1.0, 0.5, 2.0), (0.5, 2.0, 1.5), (2.0, 0.1, 4.0), (3.0, 1.0, 1.0)]:
        closed = (alpha / (t * kappa * math.e)) ** (alpha / kappa)
        worst = max(worst, abs(smoothing_maximum(alpha, t, kappa) / closed - 1),
                    abs(_numeric_smoothing_max(alpha, t, kappa) / closed - 1))
    rows.append(Check("smoothing maximum", worst <= 1e-10, worst, "<= 1e-10 rel"))
    return rows


SUITES = {
    "beta_c_table": suite_beta_c_table,
    "linear_exactness": suite_linear_exactness,
    "oracle_equivalence": suite_oracle_equivalence,
    "nonlinearity_oracle": suite_nonlinearity_oracle,
    "decay_heat": suite_decay_heat,
    "gevrey_bound": suite_gevrey_bound,
    "fourier_decay": suite_fourier_decay,
    "sqg_sweep": suite_sqg_sweep,
    "energy": suite_energy,
    "norm_machinery": suite_norm_machinery,
    "decay_burgers": suite_decay_burgers,
}


def run_suite(name: str) -> list[Check]:
    if name == "all":
        return [row for suite in SUITES.values() for row in suite()]
    return SUITES[name]()
