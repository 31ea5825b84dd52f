"""Render the four summary figures to PNG files next to the CSV tables."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .agents import ARCHETYPE_NAMES
from .stats import SummaryTables

_COLORS = {"Retail": "tab:red", "Pension": "tab:orange",
           "Institutional": "tab:green", "HedgeFund": "tab:blue"}


def _save(fig, path, seed):
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata={"Software": "macroflow",
                                         "Comment": f"experiment_seed={seed}"})
    plt.close(fig)


def render_figures(tables: SummaryTables, out_dir, seed: int) -> dict[str, str]:
    """Write alloc_by_period / final_wealth_hist / mean_wealth_path /
    order_by_liquidity PNGs; returns {figure name: path}."""
    paths = {}

    fig, ax = plt.subplots(figsize=(7, 4.2))
    for name in ARCHETYPE_NAMES:
        sub = tables.alloc_by_period[tables.alloc_by_period["trader_type"] == name]
        ax.plot(sub["event"], sub["mean_x_star"], label=name, color=_COLORS[name])
    ax.set_xlabel("event")
    ax.set_ylabel("mean risky weight")
    ax.set_title("Risky asset allocation by period")
    ax.set_ylim(-0.02, 1.05)
    ax.grid(alpha=0.3)
    ax.legend()
    paths["alloc_by_period"] = os.path.join(out_dir, "alloc_by_period.png")
    _save(fig, paths["alloc_by_period"], seed)

    fig, ax = plt.subplots(figsize=(7, 4.2))
    hist = tables.final_wealth_hist
    for name in ARCHETYPE_NAMES:
        sub = hist[hist["trader_type"] == name]
        ax.stairs(sub["count"].to_numpy(),
                  np.append(sub["bin_left"].to_numpy(), sub["bin_right"].to_numpy()[-1]),
                  label=name, color=_COLORS[name], fill=True, alpha=0.35)
    ax.set_xlabel("final wealth")
    ax.set_ylabel("traders")
    ax.set_title("Final wealth distribution")
    ax.grid(alpha=0.3)
    ax.legend()
    paths["final_wealth_hist"] = os.path.join(out_dir, "final_wealth_hist.png")
    _save(fig, paths["final_wealth_hist"], seed)

    fig, ax = plt.subplots(figsize=(7, 4.2))
    for name in ARCHETYPE_NAMES:
        sub = tables.mean_wealth_path[tables.mean_wealth_path["trader_type"] == name]
        ax.plot(sub["event"], sub["mean_wealth"], label=name, color=_COLORS[name])
    ax.set_xlabel("event")
    ax.set_ylabel("mean wealth")
    ax.set_title("Mean wealth accumulation")
    ax.grid(alpha=0.3)
    ax.legend()
    paths["mean_wealth_path"] = os.path.join(out_dir, "mean_wealth_path.png")
    _save(fig, paths["mean_wealth_path"], seed)

    fig, ax = plt.subplots(figsize=(7, 4.2))
    shares = tables.order_by_liquidity
    for name in ARCHETYPE_NAMES:
        sub = shares[shares["trader_type"] == name].sort_values("liq_bin")
        centers = (sub["liq_low"].to_numpy() + sub["liq_high"].to_numpy()) / 2.0
        ax.plot(centers, sub["share_large"], marker="o", label=name, color=_COLORS[name])
    ax.set_xlabel("liquidity (bin center)")
    ax.set_ylabel("large-order share")
    ax.set_title("Order size under different liquidity")
    ax.grid(alpha=0.3)
    ax.legend()
    paths["order_by_liquidity"] = os.path.join(out_dir, "order_by_liquidity.png")
    _save(fig, paths["order_by_liquidity"], seed)

    return paths
