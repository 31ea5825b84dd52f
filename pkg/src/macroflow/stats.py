"""Reduce a trader panel to the four summary tables behind the report figures.

Tables: mean risky allocation per (type, event), final-wealth histogram per
type, mean wealth path per (type, event), and order-size shares per
(liquidity bin, type). Order-size shares are expected shares (means of the
softmax probabilities), which strips multinomial sampling noise out of the
liquidity cross-section; the sampled sizes stay available in the panel.

Rows are canonically re-sorted before any reduction, so the tables are exact
pure functions of the panel as a set of rows (permutation invariant).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .agents import ARCHETYPE_NAMES
from .engine import TraderPanel

_TYPE_DTYPE = pd.CategoricalDtype(categories=list(ARCHETYPE_NAMES), ordered=True)


@dataclass
class SummaryTables:
    alloc_by_period: pd.DataFrame
    final_wealth_hist: pd.DataFrame
    mean_wealth_path: pd.DataFrame
    order_by_liquidity: pd.DataFrame


def _canonical_frame(panel: TraderPanel) -> pd.DataFrame:
    df = panel.to_dataframe()
    df["trader_type"] = df["trader_type"].astype(_TYPE_DTYPE)
    order = np.lexsort((df["event"].to_numpy(), df["trader_index"].to_numpy(),
                        df["trader_type"].cat.codes.to_numpy(),
                        df["replication"].to_numpy()))
    return df.iloc[order].reset_index(drop=True)


def final_wealth_by_trader(panel: TraderPanel) -> pd.DataFrame:
    """Wealth after the last event, one row per (replication, type, trader)."""
    df = _canonical_frame(panel)
    last = df[df["event"] == df["event"].max()]
    return last[["replication", "trader_type", "trader_index", "wealth"]].rename(
        columns={"wealth": "final_wealth"}).reset_index(drop=True)


def liquidity_bin_edges(liquidity: np.ndarray, liq_bins: int) -> np.ndarray:
    """Quantile bin edges over the panel's liquidity values."""
    return np.quantile(np.sort(np.asarray(liquidity)), np.linspace(0.0, 1.0, liq_bins + 1))


def assign_liquidity_bins(liquidity: np.ndarray, edges: np.ndarray) -> np.ndarray:
    inner = edges[1:-1]
    return np.clip(np.searchsorted(inner, liquidity, side="right"), 0, len(edges) - 2)


def summarize(panel: TraderPanel, liq_bins: int = 5, wealth_bins: int = 30) -> SummaryTables:
    if panel.n_rows == 0:
        raise ValueError("cannot summarize an empty panel")
    if liq_bins < 1 or wealth_bins < 1:
        raise ValueError("liq_bins and wealth_bins must be >= 1")
    df = _canonical_frame(panel)

    alloc = (df.groupby(["trader_type", "event"], observed=True)["x_star"].mean()
             .rename("mean_x_star").reset_index())

    wealth_path = (df.groupby(["trader_type", "event"], observed=True)["wealth"].mean()
                   .rename("mean_wealth").reset_index())

    final = final_wealth_by_trader(panel)
    lo = float(final["final_wealth"].min())
    hi = float(final["final_wealth"].max())
    if hi <= lo:  # degenerate: all traders identical
        lo, hi = lo - 0.5, hi + 0.5
    edges = np.linspace(lo, hi, wealth_bins + 1)
    hist_rows = []
    for name in ARCHETYPE_NAMES:
        values = final.loc[final["trader_type"] == name, "final_wealth"].to_numpy()
        counts, _ = np.histogram(values, bins=edges)
        for b in range(wealth_bins):
            hist_rows.append((name, edges[b], edges[b + 1], int(counts[b])))
    hist = pd.DataFrame(hist_rows, columns=["trader_type", "bin_left", "bin_right", "count"])
    hist["trader_type"] = hist["trader_type"].astype(_TYPE_DTYPE)

    liq_edges = liquidity_bin_edges(df["liquidity"].to_numpy(), liq_bins)
    df = df.assign(liq_bin=assign_liquidity_bins(df["liquidity"].to_numpy(), liq_edges))
    shares = (df.groupby(["liq_bin", "trader_type"], observed=True)[
                  ["p_small", "p_medium", "p_large"]].mean().reset_index())
    shares = shares.rename(columns={
        "p_small": "share_small", "p_medium": "share_medium", "p_large": "share_large"})
    shares.insert(1, "liq_low", liq_edges[shares["liq_bin"].to_numpy()])
    shares.insert(2, "liq_high", liq_edges[shares["liq_bin"].to_numpy() + 1])

    return SummaryTables(alloc_by_period=alloc, final_wealth_hist=hist,
                         mean_wealth_path=wealth_path, order_by_liquidity=shares)


def _ordering_holds(values_by_type: dict[str, float]) -> bool:
    """HedgeFund > Institutional > Pension > Retail, strictly."""
    return (values_by_type["HedgeFund"] > values_by_type["Institutional"]
            > values_by_type["Pension"] > values_by_type["Retail"])


def qualitative_claims(panel: TraderPanel, tables: SummaryTables) -> list[tuple[str, bool]]:
    """The report's headline patterns, each marked pass/fail."""
    df = _canonical_frame(panel)
    mean_x = df.groupby("trader_type", observed=True)["x_star"].mean()
    final = final_wealth_by_trader(panel)
    grouped = final.groupby("trader_type", observed=True)["final_wealth"]
    mean_w = grouped.mean()
    std_w = grouped.std(ddof=0)

    shares = tables.order_by_liquidity
    monotone = []
    for name in ARCHETYPE_NAMES:
        s = shares.loc[shares["trader_type"] == name].sort_values("liq_bin")["share_large"]
        diffs = np.diff(s.to_numpy())
        monotone.append(bool(np.all(diffs >= 0)))

    claims = [
        ("mean risky allocation ordered HedgeFund > Institutional > Pension > Retail",
         _ordering_holds(mean_x.to_dict())),
        ("mean final wealth ordered HedgeFund > Institutional > Pension > Retail",
         _ordering_holds(mean_w.to_dict())),
        ("final wealth dispersion: std(HedgeFund) > std(Retail)",
         bool(std_w["HedgeFund"] > std_w["Retail"])),
        ("large-order share non-decreasing across liquidity bins for every type",
         all(monotone)),
        ("large-order share strictly increasing across liquidity bins for >= 3 of 4 types",
         sum(bool(np.all(np.diff(
             shares.loc[shares["trader_type"] == name].sort_values("liq_bin")[
                 "share_large"].to_numpy()) > 0)) for name in ARCHETYPE_NAMES) >= 3),
    ]
    return claims


def summary_text(panel: TraderPanel, tables: SummaryTables) -> str:
    df = _canonical_frame(panel)
    mean_x = df.groupby("trader_type", observed=True)["x_star"].mean()
    final = final_wealth_by_trader(panel)
    grouped = final.groupby("trader_type", observed=True)["final_wealth"]
    mean_w, std_w = grouped.mean(), grouped.std(ddof=0)

    lines = [f"# experiment_seed={panel.seed}", "", "Per-type summary"]
    lines.append(f"{'type':<14} {'mean_x':>10} {'mean_final_wealth':>19} {'std_final_wealth':>18}")
    for name in ARCHETYPE_NAMES:
        lines.append(f"{name:<14} {mean_x[name]:>10.4f} {mean_w[name]:>19.4f} {std_w[name]:>18.4f}")
    lines.append("")
    lines.append("Qualitative checks")
    for claim, ok in qualitative_claims(panel, tables):
        lines.append(f"[{'PASS' if ok else 'FAIL'}] {claim}")
    lines.append("")
    return "\n".join(lines)


def _write_frame(df: pd.DataFrame, path, seed: int) -> None:
    cols = list(df.columns)
    with open(path, "w", newline="") as fh:
        fh.write(f"# experiment_seed={seed}\n")
        fh.write(",".join(cols) + "\n")
        for row in df.itertuples(index=False):
            out = []
            for v in row:
                if isinstance(v, (float, np.floating)):
                    out.append(repr(float(v)))
                else:
                    out.append(str(v))
            fh.write(",".join(out) + "\n")


def write_tables(tables: SummaryTables, out_dir, seed: int) -> dict[str, str]:
    """Write the four CSVs into out_dir; returns {table name: path}."""
    paths = {}
    for name in ("alloc_by_period", "final_wealth_hist", "mean_wealth_path",
                 "order_by_liquidity"):
        path = os.path.join(out_dir, f"{name}.csv")
        _write_frame(getattr(tables, name), path, seed)
        paths[name] = path
    return paths
