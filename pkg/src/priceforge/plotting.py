"""Optional PNG figures for the CLI report paths.

matplotlib is imported lazily so the library works without it. Figures use
fixed sizes and no embedded software/date metadata, so identical inputs give
byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import PriceForgeError

_METADATA = {"Software": None}
DPI = 100


class PlottingUnavailable(PriceForgeError):
    pass


def _pyplot():
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise PlottingUnavailable("--plot needs matplotlib (pip install 'artifact[plot]')") from exc
    return plt


def _save(fig, path: Path):
    fig.savefig(path, dpi=DPI, metadata=_METADATA)
    _pyplot().close(fig)


def plot_profile(profile, path) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(8, 4))
    hours = np.arange(profile.da.size + 1)
    ax.step(hours, np.append(profile.da, profile.da[-1]), where="post", label="DA")
    quarters = np.arange(profile.id.size + 1) / 4.0
    ax.step(quarters, np.append(profile.id, profile.id[-1]), where="post", label="ID", lw=0.8)
    ax.set_xlabel("hour")
    ax.set_ylabel("EUR/MWh")
    ax.set_title(f"{profile.horizon} profile ({profile.scaling.mode}, beta={profile.beta:.3f}, gamma={profile.gamma:.3f})")
    ax.legend()
    _save(fig, path)


def plot_histogram(hist, path, title: str) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    edges = hist.bin_edges
    ax.bar(edges[:-1], hist.counts, width=np.diff(edges), align="edge", edgecolor="black", lw=0.3)
    ax.set_xlabel("EUR/MWh")
    ax.set_ylabel("count")
    ax.set_title(title)
    _save(fig, path)


def plot_elbow(curve, chosen_k: int, path) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    ks = np.arange(1, len(curve) + 1)
    ax.plot(ks, curve, marker="o")
    ax.axvline(chosen_k, color="grey", ls="--")
    ax.set_xlabel("k")
    ax.set_ylabel("within-cluster sum of squares")
    _save(fig, path)


def plot_schedule(result, da_hourly, path) -> None:
    plt = _pyplot()
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(9, 6), sharex=True)
    t = np.arange(result.p_da.size) / 4.0
    ax1.plot(t, result.p_da + result.p_id, label="total power")
    if np.any(result.p_id):
        ax1.plot(t, result.p_da, label="DA power", lw=0.8)
    ax1.set_ylabel("MW")
    ax1b = ax1.twinx()
    ax1b.step(np.arange(len(da_hourly)), da_hourly, where="post", color="grey", lw=0.6)
    ax1b.set_ylabel("DA EUR/MWh")
    ax1.legend(loc="upper left")
    ax2.plot(t, result.s)
    ax2.set_ylabel("storage t")
    ax2.set_xlabel("hour")
    _save(fig, path)


def plot_benchmark(report, path) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(8, 4))
    names = [r.scenario for r in report.rows]
    ax.bar(np.arange(len(names)), [r.wdc_eur for r in report.rows])
    ax.set_xticks(np.arange(len(names)))
    ax.set_xticklabels(names, rotation=30, ha="right")
    ax.set_ylabel("WDC (EUR/day)")
    ax.set_title(f"setup {report.setup}")
    fig.tight_layout()
    _save(fig, path)
