"""Figure rendering for sweep results.

Renders the two sweep experiments to image files next to their curve data.
Uses the Agg backend so runs stay headless.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .experiments import CvSweepResult, RmseSweepResult, _ensemble_slug

__all__ = ["render_rmse_figure", "render_cv_figure"]

_COLORS = {
    "gaussian": "tab:purple",
    "bernoulli": "tab:orange",
    "rademacher": "tab:green",
    "row_orthogonal": "tab:blue",
}
_MARKERS = {
    "gaussian": "o",
    "bernoulli": "s",
    "rademacher": "^",
    "row_orthogonal": "d",
}
_MODEL_STYLES = {"equal": "-", "gaussian": ":", "uniform": "--"}


def _style(kind: str) -> tuple[str, str]:
    return _COLORS.get(kind, "tab:gray"), _MARKERS.get(kind, "x")


def render_rmse_figure(result: RmseSweepResult, path) -> Path:
    """Relative c_v error versus N, one line per (ensemble, rho)."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    rho_styles = ["-", "--", "-.", ":"]
    ensembles = []
    for cell in result.cells:
        if cell.ensemble not in ensembles:
            ensembles.append(cell.ensemble)
    for ens in ensembles:
        color, marker = _style(ens.kind)
        for ri, rho in enumerate(result.rhos):
            xs, ys = result.curve(ens, rho)
            ax.plot(
                xs,
                ys,
                rho_styles[ri % len(rho_styles)],
                color=color,
                marker=marker,
                markersize=5,
                label=f"{_ensemble_slug(ens)}, rho={rho:g}",
            )
    ax.set_xlabel("N")
    ax.set_ylabel("normalized RMSE of the empirical $c_v$")
    ax.set_ylim(bottom=0.0)
    ax.grid(alpha=0.3, linestyle=":")
    ax.legend(fontsize=8)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def render_cv_figure(result: CvSweepResult, path) -> Path:
    """Scaled coefficient of variation versus K, one line per (ensemble, model)."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    pairs = []
    for cell in result.cells:
        key = (cell.ensemble, cell.model)
        if key not in pairs:
            pairs.append(key)
    for ens, model in pairs:
        color, marker = _style(ens.kind)
        xs, ys = result.curve(ens, model)
        ax.plot(
            xs,
            ys,
            _MODEL_STYLES.get(model.kind, "-"),
            color=color,
            marker=marker,
            markersize=5,
            label=f"{_ensemble_slug(ens)}, {model.kind} magnitudes",
        )
    ax.axhline(math.sqrt(2.0), color="gray", linewidth=0.8, alpha=0.6)
    ax.set_xlabel("K")
    ax.set_ylabel(r"mean $c_v \cdot \sqrt{M}$")
    ax.set_ylim(bottom=0.0)
    ax.grid(alpha=0.3, linestyle=":")
    ax.legend(fontsize=8, ncols=2)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out
