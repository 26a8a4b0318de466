"""Figures written next to the CSV output of a run.

The CSV stays the interface; these PNGs are a convenience for a first look.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["render_figures"]


def _norm_figure(result, path: Path) -> Path | None:
    t = np.asarray(result.times)
    labels = [c for c in result.columns
              if c.startswith(("sobolev", "gevrey")) and np.any(np.asarray(result.columns[c]) > 0)]
    if not labels or len(t) < 2:
        return None
    fig, ax = plt.subplots(figsize=(6, 4))
    pos = t > 0
    for label in labels:
        v = np.asarray(result.columns[label])
        ok = pos & np.isfinite(v) & (v > 0)
        ax.loglog(t[ok], v[ok], label=label)
    for fit in result.fits:
        if "fitted_exponent" in fit and "window" in fit:
            lo, hi = fit["window"]
            tt = np.geomspace(lo, hi, 20)
            ax.loglog(tt, np.exp(fit["intercept"]) * tt ** (-fit["fitted_exponent"]), "k--", lw=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("norm")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _rho_figure(result, path: Path) -> Path | None:
    if "rho" not in result.columns:
        return None
    t = np.asarray(result.times)
    rho = np.asarray(result.columns["rho"])
    sat = np.asarray(result.columns["rho_saturated"]) > 0
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(t[~sat], rho[~sat], "o-", ms=3, label="pre-saturation")
    if sat.any():
        ax.plot(t[sat], rho[sat], "x", color="0.6", label="saturated")
    ax.set_xlabel("t")
    ax.set_ylabel("analyticity radius")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_figures(result, csv_path: Path) -> list[Path]:
    """Write ``<stem>_norms.png`` and ``<stem>_rho.png`` beside ``csv_path``."""
    csv_path = Path(csv_path)
    stem = csv_path.with_suffix("")
    made = [
        _norm_figure(result, stem.with_name(stem.name + "_norms.png")),
        _rho_figure(result, stem.with_name(stem.name + "_rho.png")),
    ]
    return [p for p in made if p is not None]
