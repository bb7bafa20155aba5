"""Figures written next to the tabular reports.

Everything renders through the Agg backend with PNG metadata stripped, so a
figure is byte-identical across reruns of the same config.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_RC = {
    "font.size": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.dpi": 120,
}


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_bound_table(rows: list[dict], path) -> Path:
    """Required pulse count against transmittance, one line per ``(S, epsilon)``."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.5, 3.8))
        groups: dict = {}
        for r in rows:
            groups.setdefault((r["S"], r["epsilon"]), []).append((r["T"], r["N"]))
        for (S, eps), pts in sorted(groups.items()):
            pts.sort()
            ax.plot([t for t, _ in pts], [n for _, n in pts], marker="o", ms=3, label=f"S={S}, eps={eps:g}")
        ax.set_yscale("log")
        ax.set_xlabel("transmittance T")
        ax.set_ylabel("pulses per preparation N")
        ax.legend(fontsize=7, frameon=False)
        return _save(fig, path)


def plot_rate_vs_bound(summary: dict, path) -> Path:
    """Observed event rate with its 95% interval against the analytic ceiling."""
    test = summary["test"] if "test" in summary else summary["abort_test"]
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(4.0, 3.4))
        low, high = test["ci95"]
        rate = test["rate"]
        ax.errorbar([0], [rate], yerr=[[rate - low], [high - rate]], fmt="o", capsize=4, label="observed")
        ax.axhline(test["bound"], color="C3", ls="--", label="bound")
        ax.set_xticks([0])
        ax.set_xticklabels([summary.get("tested_event", "abort")])
        ax.set_ylabel("rate")
        ax.set_xlim(-1, 1)
        ax.set_ylim(bottom=0)
        ax.legend(frameon=False)
        return _save(fig, path)


def plot_output_distributions(summary: dict, path) -> Path:
    """Blind versus plain corrected-output histograms."""
    blind = summary.get("output_distribution", {})
    plain = summary.get("plain_distribution", {})
    keys = sorted(set(blind) | set(plain))
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(max(4.0, 0.5 * len(keys) + 2), 3.4))
        xs = range(len(keys))
        ax.bar([x - 0.2 for x in xs], [blind.get(k, {}).get("rate", 0.0) for k in keys], width=0.4, label="blind")
        if plain:
            ax.bar([x + 0.2 for x in xs], [plain.get(k, {}).get("rate", 0.0) for k in keys], width=0.4,
                   label="plain")
        ax.set_xticks(list(xs))
        ax.set_xticklabels(keys)
        ax.set_xlabel("corrected output")
        ax.set_ylabel("frequency")
        ax.legend(frameon=False)
        return _save(fig, path)
