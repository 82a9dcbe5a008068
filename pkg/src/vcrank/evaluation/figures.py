"""Standalone SVG figures for audits and benchmarks."""

from __future__ import annotations

import json
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from vcrank.synthgen.images import PAIR_IDS  # noqa: E402

# fixed element ids and no timestamp so reruns give identical bytes
_RC = {"svg.hashsalt": "vcrank", "svg.fonttype": "none", "font.size": 9}


def _save(fig, path: str | os.PathLike, description: dict | None) -> None:
    meta = {"Date": None, "Creator": "vcrank"}
    if description is not None:
        meta["Description"] = json.dumps(description, sort_keys=True)
    fig.savefig(path, format="svg", metadata=meta)
    plt.close(fig)


def plot_top_concepts(records, path, k: int = 20, description: dict | None = None, only_significant: bool = True) -> int:
    """Per-replicate points with a mean bar for the top concepts; returns the count drawn."""
    chosen = [r for r in records if r.significant] if only_significant else list(records)
    chosen = chosen[:k]
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6.5, 0.3 * max(len(chosen), 3) + 1.2))
        if not chosen:
            ax.text(0.5, 0.5, "no significant concepts", ha="center", va="center", transform=ax.transAxes)
            ax.set_axis_off()
        else:
            ys = np.arange(len(chosen))[::-1]
            means = [r.psi_mean for r in chosen]
            colors = ["#b2182b" if m > 0 else "#2166ac" for m in means]
            ax.barh(ys, means, color=colors, alpha=0.35, height=0.7)
            for y, r in zip(ys, chosen):
                jitter = np.linspace(-0.2, 0.2, len(r.psi_samples))
                ax.scatter(r.psi_samples, y + jitter, s=5, color="black", linewidths=0)
            ax.axvline(0.0, color="gray", lw=0.8)
            ax.set_yticks(ys, [r.concept_name for r in chosen])
            ax.set_xlabel("sensitivity ψ (per bootstrap replicate; bar = mean)")
        fig.tight_layout()
        _save(fig, path, description)
    return len(chosen)


def plot_grid_scatter(rows, path, description: dict | None = None) -> None:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6.0, 4.5))
        cmap = plt.get_cmap("tab10")
        for i, pair in enumerate(PAIR_IDS):
            sel = [r for r in rows if r.pair_id == pair]
            if sel:
                ax.scatter(
                    [r.interventional_delta for r in sel],
                    [r.vcr_psi for r in sel],
                    s=10,
                    color=cmap(i),
                    label=pair,
                )
        ax.axhline(0.0, color="gray", lw=0.6)
        ax.axvline(0.0, color="gray", lw=0.6)
        ax.set_xlabel("interventional effect Δ P(positive)")
        ax.set_ylabel("VCR sensitivity ψ")
        ax.legend(fontsize=7, frameon=False, ncol=2)
        fig.tight_layout()
        _save(fig, path, description)


def plot_per_pair_r(summary: dict, path, description: dict | None = None) -> None:
    pairs = list(summary["per_pair"])
    vcr = [summary["per_pair"][p]["vcr_r"] or 0.0 for p in pairs]
    clip = [summary["per_pair"][p]["clip_r"] or 0.0 for p in pairs]
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6.5, 3.5))
        x = np.arange(len(pairs))
        ax.bar(x - 0.2, vcr, width=0.4, label="VCR", color="#4d4d4d")
        ax.bar(x + 0.2, clip, width=0.4, label="correlational", color="#bababa")
        ax.axhline(0.0, color="black", lw=0.6)
        ax.set_xticks(x, pairs, rotation=30, ha="right")
        ax.set_ylabel("Pearson r with interventional effect")
        ax.set_ylim(-1, 1)
        ax.legend(frameon=False)
        fig.tight_layout()
        _save(fig, path, description)


def plot_concordance(summary: dict, path, description: dict | None = None) -> None:
    labels = ["reliable", "spurious"]
    vcr = [summary["vcr_reliable"], summary["vcr_spurious"]]
    clip = [summary["clip_reliable"], summary["clip_spurious"]]
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(4.5, 3.5))
        x = np.arange(2)
        ax.bar(x - 0.2, vcr, width=0.4, label="VCR", color="#4d4d4d")
        ax.bar(x + 0.2, clip, width=0.4, label="correlational", color="#bababa")
        ax.set_xticks(x, labels)
        ax.set_ylim(0, 1)
        ax.set_ylabel("sign concordance")
        ax.legend(frameon=False)
        fig.tight_layout()
        _save(fig, path, description)


def plot_timing(breakdowns: dict, path, description: dict | None = None) -> None:
    """Stacked bars, one per labelled :class:`~vcrank.timing.TimingBreakdown`."""
    names = list(breakdowns)
    comps = list(next(iter(breakdowns.values())).as_dict()) if names else []
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.5, 3.5))
        bottom = np.zeros(len(names))
        for c in comps:
            vals = np.array([breakdowns[n].as_dict()[c] for n in names])
            ax.bar(names, vals, bottom=bottom, label=c)
            bottom += vals
        ax.set_ylabel("seconds")
        ax.legend(fontsize=7, frameon=False)
        fig.tight_layout()
        _save(fig, path, description)


def plot_dot_effect(result: dict, path, description: dict | None = None) -> None:
    tags = ["correlated", "uncorrelated"]
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(4.5, 3.5))
        for i, t in enumerate(tags):
            d = result[t]["replicate_deltas"]
            ax.bar(i, result[t]["delta"], color="#bababa", width=0.6)
            ax.scatter(np.full(len(d), i) + np.linspace(-0.15, 0.15, len(d)), d, s=6, color="black")
        ax.axhline(0.0, color="black", lw=0.6)
        ax.set_xticks(range(2), ["dots ~ positive", "dots independent"])
        ax.set_ylabel("Δ mean task score (dots − none)")
        fig.tight_layout()
        _save(fig, path, description)
