"""Figure rendering for the CLI report paths.

Each subcommand renders a PNG companion next to its delimited output; the CSVs
stay the machine-readable source of truth.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .montecarlo import RocEstimate, TrialBatch
from .rocs import RocCurve

plt.rcParams.update(
    {
        "figure.dpi": 150,
        "savefig.dpi": 150,
        "savefig.bbox": "tight",
        "axes.grid": True,
        "grid.alpha": 0.3,
        "font.size": 10,
    }
)

_RADAR_STYLE = {
    "cs-het": dict(color="#d55e00", label="CS-Het"),
    "ccn": dict(color="#0173b2", label="CCN"),
    "qcn": dict(color="#029e73", label="QCN"),
    "cs-hom": dict(color="#cc78bc", label="CS-Hom"),
    "qi-opa": dict(color="#de8f05", label="QI-OPA"),
}


def save_bounds_figure(path: str | Path, sweep_name: str, values, series: dict) -> Path:
    fig, ax = plt.subplots(figsize=(5.5, 4))
    for name, ys in series.items():
        ys = np.asarray(ys, dtype=float)
        mask = ys > 0
        ax.plot(np.asarray(values)[mask], ys[mask], label=name)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(sweep_name)
    ax.set_ylabel("error probability")
    ax.legend()
    fig.savefig(path)
    plt.close(fig)
    return Path(path)


def save_fig3(path: str | Path, m_values, cs_ub, qi_ub, cs_lb, m_star: Optional[int]) -> Path:
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(m_values, cs_ub, color="#0173b2", label="Pr(e) CS upper")
    ax.plot(m_values, qi_ub, color="#029e73", label="Pr(e) QI upper")
    ax.plot(m_values, cs_lb, color="#d55e00", ls="--", label="Pr(e) CS lower")
    if m_star is not None:
        ax.axvline(m_star, color="0.4", lw=0.8, ls=":", label=f"crossover M* = {m_star:g}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("time-bandwidth product M")
    ax.set_ylabel("error probability")
    ax.legend(fontsize=8)
    fig.savefig(path)
    plt.close(fig)
    return Path(path)


def save_fig5(path: str | Path, curves: Sequence[RocCurve]) -> Path:
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    for curve in curves:
        style = _RADAR_STYLE.get(curve.radar.value, {})
        mask = (curve.pm > 0) & (curve.pm <= 0.5) & (curve.pf <= 0.5)
        ax.plot(
            np.log10(curve.pf[mask]), np.log10(curve.pm[mask]),
            label=f"{style.get('label', curve.radar.value)} ({curve.method.value})",
            color=style.get("color"),
        )
    ax.set_xlabel(r"$\log_{10} P_F$")
    ax.set_ylabel(r"$\log_{10} P_M$")
    ax.legend(fontsize=8)
    fig.savefig(path)
    plt.close(fig)
    return Path(path)


def save_roc_estimates(path: str | Path, estimates: Iterable[RocEstimate]) -> Path:
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    for est in estimates:
        style = _RADAR_STYLE.get(est.radar.value, {})
        pm = np.clip(1.0 - est.pd, 1e-12, None)
        ax.errorbar(
            np.log10(est.pf), np.log10(pm),
            yerr=[
                np.log10(pm) - np.log10(np.clip(1.0 - est.ci_high, 1e-12, None)),
                np.log10(np.clip(1.0 - est.ci_low, 1e-12, None)) - np.log10(pm),
            ],
            fmt="o-", ms=3, lw=1, capsize=2,
            label=style.get("label", est.radar.value),
            color=style.get("color"),
        )
    ax.set_xlabel(r"$\log_{10} P_F$")
    ax.set_ylabel(r"$\log_{10} P_M$")
    ax.legend(fontsize=8)
    fig.savefig(path)
    plt.close(fig)
    return Path(path)


def save_roc_curve(path: str | Path, curve: RocCurve) -> Path:
    return save_fig5(path, [curve])


def save_trial_histogram(path: str | Path, batch_h0: TrialBatch, batch_h1: TrialBatch) -> Path:
    fig, ax = plt.subplots(figsize=(5.5, 4))
    bins = np.histogram_bin_edges(
        np.concatenate([batch_h0.statistics, batch_h1.statistics]), bins=80
    )
    ax.hist(batch_h0.statistics, bins=bins, alpha=0.6, label="H0", density=True)
    ax.hist(batch_h1.statistics, bins=bins, alpha=0.6, label="H1", density=True)
    ax.set_xlabel("decision statistic")
    ax.set_ylabel("density")
    ax.set_title(f"{batch_h0.radar.value}, {batch_h0.trials} trials")
    ax.legend()
    fig.savefig(path)
    plt.close(fig)
    return Path(path)
