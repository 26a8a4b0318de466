"""INI experiment files.

Sections: ``[equation]``, ``[grid]``, ``[integrator]``, ``[initial]``,
``[diagnostics]`` and ``[output]``. See ``experiments/`` for examples.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import equations as eq
from .norms import GevreyParams
from .spectral_core import Grid, SpectralField, forward_transform
from .timestepping import IntegratorConfig

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "parse_config", "build_initial"]


class ConfigError(ValueError):
    """Invalid or incomplete experiment file."""


_FIXED_KAPPA = {
    eq.EquationName.BurgersN: 2.0,
    eq.EquationName.NSE2DVorticity: 2.0,
    eq.EquationName.CahnHilliardCubic: 4.0,
    eq.EquationName.CahnHilliardGeneral: 4.0,
}


@dataclass
class InitialCondition:
    kind: str
    amplitude: float = 1.0
    center: tuple[float, ...] | None = None
    width: float = 1.0
    mode: tuple[int, ...] = (1,)
    seed: int | None = None
    band: int = 4
    l2_norm: float | None = None


@dataclass
class Diagnostics:
    norms: list[str] = field(default_factory=list)
    zeta: list[float] = field(default_factory=list)
    p: float = 2.0
    fit_window: tuple[float, float] | None = None
    decay_mode: str = "one_sided"
    tolerance: float = 0.05
    gevrey: GevreyParams | None = None
    fourier_tracker: bool = False
    noise_floor: float = 1e-13
    wraparound: bool = False


@dataclass
class ExperimentConfig:
    spec: eq.EquationSpec
    grid: Grid
    integrator: IntegratorConfig
    initial: InitialCondition
    diagnostics: Diagnostics
    csv_path: Path | None = None
    json_path: Path | None = None
    figures: bool = True
    source: Path | None = None
    raw: configparser.ConfigParser | None = None


class _Section:
    def __init__(self, parser: configparser.ConfigParser, name: str, required: bool = True):
        if not parser.has_section(name):
            if required:
                raise ConfigError(f"missing section [{name}]")
            parser.add_section(name)
        self.name = name
        self.data = parser[name]

    def _raw(self, key, default):
        if key not in self.data:
            if default is _REQUIRED:
                raise ConfigError(f"missing key {key} in [{self.name}]")
            return None if default is None else str(default)
        return self.data[key].strip()

    def get(self, key, default=None, kind=str):
        raw = self._raw(key, default)
        if raw is None:
            return None
        try:
            return kind(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value {raw!r} for key {key} in [{self.name}]: {exc}") from None

    def floats(self, key, default=None):
        raw = self._raw(key, default)
        if raw is None:
            return None
        try:
            return [_number(x) for x in raw.replace(";", ",").split(",") if x.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad value {raw!r} for key {key} in [{self.name}]: {exc}") from None

    def boolean(self, key, default=False):
        if key not in self.data:
            return default
        try:
            return self.data.getboolean(key)
        except ValueError:
            raise ConfigError(f"bad boolean for key {key} in [{self.name}]") from None


_REQUIRED = object()


def _number(text: str) -> float:
    t = text.strip().lower().replace(" ", "")
    if t.endswith("pi"):
        head = t[:-2].rstrip("*")
        return (float(head) if head else 1.0) * math.pi
    return float(t)


def _build_spec(sec: _Section) -> eq.EquationSpec:
    name_raw = sec.get("name", _REQUIRED)
    try:
        name = eq.EquationName(name_raw)
    except ValueError:
        choices = ", ".join(n.value for n in eq.EquationName)
        raise ConfigError(f"unknown equation {name_raw!r} in [equation]; one of {choices}") from None
    kappa = sec.get("kappa", _REQUIRED, _number)
    if name in _FIXED_KAPPA and kappa != _FIXED_KAPPA[name]:
        raise ConfigError(f"kappa must be {_FIXED_KAPPA[name]:g} for {name.value} in [equation]")
    degree = sec.get("degree", 3, int)
    dim = sec.get("dim", None, int)
    try:
        if name is eq.EquationName.FractionalHeat:
            spec = eq.fractional_heat(dim or 1, kappa, degree, sec.get("alpha", 1.0, _number))
        elif name is eq.EquationName.BurgersN:
            spec = eq.burgers(degree)
        elif name is eq.EquationName.SQG:
            spec = eq.sqg(kappa)
        elif name is eq.EquationName.NSE2DVorticity:
            spec = eq.nse2d_vorticity()
        elif name is eq.EquationName.CahnHilliardCubic:
            spec = eq.cahn_hilliard_cubic(dim or 1, sec.get("beta", 1.0, _number))
        elif name is eq.EquationName.CahnHilliardGeneral:
            spec = eq.cahn_hilliard_general(dim or 1, sec.floats("coeffs", _REQUIRED))
        else:
            raise ConfigError(f"{name.value} is a calculator-only instance and cannot be run")
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid [equation]: {exc}") from None
    if dim is not None and dim != spec.dim:
        raise ConfigError(f"dim = {dim} is not valid for {name.value} in [equation]")
    return spec.replace(nonlinear=sec.boolean("nonlinear", True),
                        dissipation=sec.boolean("dissipation", True))


def parse_config(parser: configparser.ConfigParser, source: Path | None = None) -> ExperimentConfig:
    spec = _build_spec(_Section(parser, "equation"))

    g = _Section(parser, "grid")
    try:
        grid = Grid(spec.dim, g.get("points", _REQUIRED, int), g.get("length", 2 * math.pi, _number))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid [grid]: {exc}") from None

    it = _Section(parser, "integrator")
    try:
        integrator = IntegratorConfig(
            scheme=it.get("scheme", "ETDRK2"),
            dt=it.get("dt", _REQUIRED, _number),
            t_end=it.get("t_end", _REQUIRED, _number),
            blowup_threshold=it.get("blowup_threshold", 1e8, _number),
            diagnostic_stride=it.get("stride", 1, int),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid [integrator]: {exc}") from None

    ini = _Section(parser, "initial")
    kind = ini.get("kind", _REQUIRED)
    if kind not in ("gaussian_bump", "single_mode", "random_band"):
        raise ConfigError(f"unknown initial kind {kind!r} in [initial]")
    center = ini.floats("center")
    mode = ini.floats("k", ",".join(["1"] * spec.dim))
    seed = ini.get("seed", None, int)
    if kind == "random_band" and seed is None:
        raise ConfigError("missing key seed in [initial]")
    if center is not None and len(center) != spec.dim:
        raise ConfigError(f"center needs {spec.dim} entries in [initial]")
    if len(mode) != spec.dim:
        raise ConfigError(f"k needs {spec.dim} entries in [initial]")
    initial = InitialCondition(
        kind=kind,
        amplitude=ini.get("amplitude", 1.0, _number),
        center=tuple(center) if center else None,
        width=ini.get("width", 1.0, _number),
        mode=tuple(int(m) for m in mode),
        seed=seed,
        band=ini.get("band", 4, int),
        l2_norm=ini.get("l2_norm", None, _number),
    )

    dg = _Section(parser, "diagnostics", required=False)
    norms = [n.replace(" ", "") for n in dg.get("norms", "").split(",") if n.strip()]
    for n in norms:
        _validate_norm(n, spec.dim)
    window = dg.floats("fit_window")
    if window is not None and len(window) != 2:
        raise ConfigError("fit_window needs two values in [diagnostics]")
    decay_mode = dg.get("decay_mode", "one_sided")
    if decay_mode not in ("one_sided", "power_law"):
        raise ConfigError(f"unknown decay_mode {decay_mode!r} in [diagnostics]")
    gevrey = None
    if dg.boolean("gevrey_monitor", False):
        try:
            gevrey = GevreyParams(
                s=0.0, beta=dg.get("gevrey_beta", 0.0, _number), kappa=spec.kappa,
                p=dg.get("gevrey_p", 2.0, _number),
                weight_constant=dg.get("weight_constant", 0.5, _number),
                weight_norm=dg.get("weight_norm", "Euclidean"),
                flavor=dg.get("gevrey_flavor", "lp"),
            )
        except ValueError as exc:
            raise ConfigError(f"invalid Gevrey settings in [diagnostics]: {exc}") from None
    diagnostics = Diagnostics(
        norms=norms,
        zeta=dg.floats("zeta", "") or [],
        p=dg.get("p", 2.0, _number),
        fit_window=tuple(window) if window else None,
        decay_mode=decay_mode,
        tolerance=dg.get("tolerance", 0.05, _number),
        gevrey=gevrey,
        fourier_tracker=dg.boolean("fourier_tracker", False),
        noise_floor=dg.get("noise_floor", 1e-13, _number),
        wraparound=dg.boolean("wraparound", False),
    )

    out = _Section(parser, "output", required=False)
    csv_path = out.get("csv")
    json_path = out.get("json")
    return ExperimentConfig(
        spec=spec, grid=grid, integrator=integrator, initial=initial, diagnostics=diagnostics,
        csv_path=Path(csv_path) if csv_path else None,
        json_path=Path(json_path) if json_path else None,
        figures=out.boolean("figures", True),
        source=source, raw=parser,
    )


def _validate_norm(item: str, dim: int) -> None:
    parts = item.split(":")
    kind = parts[0]
    try:
        if kind == "sobolev" and len(parts) == 3:
            _number(parts[1]), _number(parts[2])
            return
        if kind == "gevrey" and len(parts) == 3:
            _number(parts[1]), _number(parts[2])
            return
        if kind == "mode" and len(parts) == 1 + dim:
            [int(x) for x in parts[1:]]
            return
        if kind in ("rho", "wraparound") and len(parts) == 1:
            return
    except ValueError:
        pass
    raise ConfigError(f"bad norm descriptor {item!r} in [diagnostics]")


def load_config(path: str | Path, overrides: dict[str, str] | None = None) -> ExperimentConfig:
    path = Path(path)
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    for dotted, value in (overrides or {}).items():
        section, _, key = dotted.partition(".")
        if not key:
            raise ConfigError(f"parameter {dotted!r} must look like section.key")
        if not parser.has_section(section):
            parser.add_section(section)
        parser[section][key] = value
    return parse_config(parser, path)


def build_initial(ic: InitialCondition, grid: Grid) -> SpectralField:
    """Initial field from its descriptor. Random data is Hermitian and mean-zero."""
    if ic.kind == "gaussian_bump":
        center = ic.center or (grid.box_length / 2,) * grid.dim
        r2 = sum((x - c) ** 2 for x, c in zip(grid.coordinates(), center))
        u0 = forward_transform(ic.amplitude * np.exp(-r2 / (2 * ic.width ** 2)), grid)
    elif ic.kind == "single_mode":
        x = grid.coordinates()
        phase = sum(grid.fundamental_wavenumber * m * xi for m, xi in zip(ic.mode, x))
        u0 = forward_transform(ic.amplitude * np.cos(phase), grid)
    elif ic.kind == "random_band":
        rng = np.random.default_rng(ic.seed)
        keep = np.all(np.abs(grid.integer_frequencies) <= ic.band, axis=0)
        keep &= grid.wavenumber_magnitude > 0
        noise = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
        u0 = SpectralField(grid, np.where(keep, noise, 0)).symmetrized()
        u0 = u0 * (ic.amplitude / max(np.max(np.abs(u0.coeffs)), np.finfo(float).tiny))
    else:
        raise ConfigError(f"unknown initial kind {ic.kind!r}")
    if ic.l2_norm is not None:
        from .norms import sobolev_norm
        current = sobolev_norm(u0, 0.0, 2.0)
        if current > 0:
            u0 = u0 * (ic.l2_norm / current)
    return u0
