"""Experiment orchestration: one macro environment per replication, then an
allocation / order-choice / wealth-update step for every trader and event.

All traders in a replication see the same surprise path, liquidity series and
per-event market premium; they differ in perceived return noise (information
level), in their own Monte Carlo allocation draws, and in an idiosyncratic
component of the realized return. Stream keys make every per-trader quantity
a pure function of (seed, trader, event), so worker count never changes the
output.

Per (trader, event) the trader-returns stream is consumed in a fixed order:
first one normal for the idiosyncratic realized-return noise, then the
allocation draws. The trader-choice stream supplies the single uniform that
samples the order size.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .agents import ARCHETYPE_NAMES, TraderArchetype, archetype_registry, step_wealth, TraderState
from .allocation import AllocationConfig, optimal_allocation
from .choice import ORDER_SIZES, ChoiceCoefficients, order_utilities, sample_order, softmax
from .market import ReturnModel, capm_return, effective_risky_std
from .rng import StreamKey, replication_seed, stream_for
from .shocks import ShockConfig, generate_liquidity, generate_surprises

_ORDER_CODE = {name: i for i, name in enumerate(ORDER_SIZES)}

PANEL_HEADER = ("replication,trader_type,trader_index,event,surprise,liquidity,"
                "x_star,order_size,p_small,p_medium,p_large,realized_return,wealth")
EVENTS_HEADER = ("replication,event,temp_shock,perm_shock,surprise,liquidity,"
                 "liquidity_clamped,market_premium")


@dataclass(frozen=True)
class SimConfig:
    """Complete, serializable description of one experiment."""

    n_traders_per_type: int = 500
    n_events: int = 36
    seed: int = 42
    replications: int = 1
    shock: ShockConfig = field(default_factory=ShockConfig)
    market: ReturnModel = field(default_factory=ReturnModel)
    allocation: AllocationConfig = field(default_factory=AllocationConfig)
    choice: ChoiceCoefficients = field(default_factory=ChoiceCoefficients)
    agents: tuple[TraderArchetype, ...] = field(
        default_factory=lambda: tuple(archetype_registry()))
    initial_wealth: float = 100.0
    surprise_in_beliefs: bool = False

    def __post_init__(self):
        if self.n_traders_per_type < 1:
            raise ValueError(f"n_traders_per_type must be >= 1, got {self.n_traders_per_type}")
        if self.n_events < 1:
            raise ValueError(f"n_events must be >= 1, got {self.n_events}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a u64, got {self.seed}")
        if self.replications < 1:
            raise ValueError(f"replications must be >= 1, got {self.replications}")
        if self.initial_wealth <= 0:
            raise ValueError(f"initial_wealth must be > 0, got {self.initial_wealth}")
        names = tuple(a.name for a in self.agents)
        if names != ARCHETYPE_NAMES:
            raise ValueError(f"agents must be the four archetypes {ARCHETYPE_NAMES}, got {names}")


@dataclass
class TraderPanel:
    """Row-per-(trader, event) simulation output plus the event-level table.

    Rows are ordered by (replication, archetype order, trader_index, event);
    there are exactly replications * 4 * n_traders_per_type * n_events rows.
    """

    replication: np.ndarray
    trader_type: np.ndarray        # int8 codes into ARCHETYPE_NAMES
    trader_index: np.ndarray
    event: np.ndarray
    surprise: np.ndarray
    liquidity: np.ndarray
    x_star: np.ndarray
    order_size: np.ndarray         # int8 codes into ORDER_SIZES
    p_small: np.ndarray
    p_medium: np.ndarray
    p_large: np.ndarray
    realized_return: np.ndarray
    wealth: np.ndarray
    events: dict[str, np.ndarray]  # event-level columns, EVENTS_HEADER order
    seed: int

    @property
    def n_rows(self) -> int:
        return len(self.wealth)

    def type_names(self) -> np.ndarray:
        return np.array(ARCHETYPE_NAMES, dtype=object)[self.trader_type]

    def order_names(self) -> np.ndarray:
        return np.array(ORDER_SIZES, dtype=object)[self.order_size]

    def to_dataframe(self):
        import pandas as pd

        return pd.DataFrame({
            "replication": self.replication,
            "trader_type": self.type_names(),
            "trader_index": self.trader_index,
            "event": self.event,
            "surprise": self.surprise,
            "liquidity": self.liquidity,
            "x_star": self.x_star,
            "order_size": self.order_names(),
            "p_small": self.p_small,
            "p_medium": self.p_medium,
            "p_large": self.p_large,
            "realized_return": self.realized_return,
            "wealth": self.wealth,
        })

    def write_csv(self, path) -> None:
        type_names = self.type_names()
        order_names = self.order_names()
        with open(path, "w", newline="") as fh:
            fh.write(f"# experiment_seed={self.seed}\n")
            fh.write(PANEL_HEADER + "\n")
            w = csv.writer(fh, lineterminator="\n")
            for i in range(self.n_rows):
                w.writerow((
                    self.replication[i], type_names[i], self.trader_index[i], self.event[i],
                    repr(float(self.surprise[i])), repr(float(self.liquidity[i])),
                    repr(float(self.x_star[i])), order_names[i],
                    repr(float(self.p_small[i])), repr(float(self.p_medium[i])),
                    repr(float(self.p_large[i])), repr(float(self.realized_return[i])),
                    repr(float(self.wealth[i])),
                ))

    def write_events_csv(self, path) -> None:
        ev = self.events
        with open(path, "w", newline="") as fh:
            fh.write(f"# experiment_seed={self.seed}\n")
            fh.write(EVENTS_HEADER + "\n")
            w = csv.writer(fh, lineterminator="\n")
            for i in range(len(ev["event"])):
                w.writerow((
                    ev["replication"][i], ev["event"][i],
                    repr(float(ev["temp_shock"][i])), repr(float(ev["perm_shock"][i])),
                    repr(float(ev["surprise"][i])), repr(float(ev["liquidity"][i])),
                    int(ev["liquidity_clamped"][i]),
                    repr(float(ev["market_premium"][i])),
                ))

    def write_jsonl(self, path) -> None:
        """Line-delimited records, one JSON object per panel row."""
        import json

        type_names = self.type_names()
        order_names = self.order_names()
        with open(path, "w") as fh:
            fh.write(json.dumps({"experiment_seed": self.seed}) + "\n")
            for i in range(self.n_rows):
                fh.write(json.dumps({
                    "replication": int(self.replication[i]),
                    "trader_type": type_names[i],
                    "trader_index": int(self.trader_index[i]),
                    "event": int(self.event[i]),
                    "surprise": float(self.surprise[i]),
                    "liquidity": float(self.liquidity[i]),
                    "x_star": float(self.x_star[i]),
                    "order_size": order_names[i],
                    "p_small": float(self.p_small[i]),
                    "p_medium": float(self.p_medium[i]),
                    "p_large": float(self.p_large[i]),
                    "realized_return": float(self.realized_return[i]),
                    "wealth": float(self.wealth[i]),
                }) + "\n")

    @classmethod
    def from_csv(cls, path) -> "TraderPanel":
        """Reload a panel written by write_csv (events table not recovered)."""
        type_code = {name: i for i, name in enumerate(ARCHETYPE_NAMES)}
        order_code = {name: i for i, name in enumerate(ORDER_SIZES)}
        seed = 0
        cols: list[list] = [[] for _ in range(13)]
        with open(path, newline="") as fh:
            first = fh.readline()
            if first.startswith("# experiment_seed="):
                seed = int(first.strip().split("=", 1)[1])
                header = fh.readline()
            else:
                header = first
            if header.strip() != PANEL_HEADER:
                raise ValueError(f"{path}: unexpected panel header {header.strip()!r}")
            for row in csv.reader(fh):
                for j, v in enumerate(row):
                    cols[j].append(v)
        return cls(
            replication=np.array(cols[0], dtype=np.int64),
            trader_type=np.array([type_code[v] for v in cols[1]], dtype=np.int8),
            trader_index=np.array(cols[2], dtype=np.int64),
            event=np.array(cols[3], dtype=np.int64),
            surprise=np.array(cols[4], dtype=np.float64),
            liquidity=np.array(cols[5], dtype=np.float64),
            x_star=np.array(cols[6], dtype=np.float64),
            order_size=np.array([order_code[v] for v in cols[7]], dtype=np.int8),
            p_small=np.array(cols[8], dtype=np.float64),
            p_medium=np.array(cols[9], dtype=np.float64),
            p_large=np.array(cols[10], dtype=np.float64),
            realized_return=np.array(cols[11], dtype=np.float64),
            wealth=np.array(cols[12], dtype=np.float64),
            events={},
            seed=seed,
        )


def _solve_trader_block(cfg: SimConfig, rep_seed: int, event: int, type_idx: int,
                        lo: int, hi: int, sigma: float, perceived_mean: float,
                        probs: np.ndarray, realized_base: float,
                        states: list, out: dict) -> None:
    """Solve traders [lo, hi) of one type for one event, writing into `out`."""
    arch = cfg.agents[type_idx]
    model = cfg.market
    n = cfg.n_traders_per_type
    for i in range(lo, hi):
        gidx = type_idx * n + i
        ret_stream = stream_for(StreamKey(rep_seed, "trader-returns", gidx, event))
        eps = model.capm.eps_std * ret_stream.draw_normal()
        alloc = optimal_allocation(
            arch.risk_aversion, arch.max_risk, model.rf, perceived_mean, sigma,
            cfg.allocation, ret_stream, return_floor=model.return_floor)
        realized = max(model.return_floor, realized_base + eps)
        choice_stream = stream_for(StreamKey(rep_seed, "trader-choice", gidx, event))
        order = _ORDER_CODE[sample_order(probs, choice_stream)]
        states[gidx] = step_wealth(states[gidx], alloc.x_star, model.rf, realized)
        row = gidx * cfg.n_events + event
        out["x_star"][row] = alloc.x_star
        out["order_size"][row] = order
        out["realized_return"][row] = realized
        out["wealth"][row] = states[gidx].wealth


def _run_replication(cfg: SimConfig, rep: int, workers: int,
                     pool: ThreadPoolExecutor | None) -> tuple[dict, dict]:
    rep_seed = replication_seed(cfg.seed, rep)
    shock_cfg = replace(cfg.shock, horizon=cfg.n_events)
    path = generate_surprises(shock_cfg, stream_for(StreamKey(rep_seed, "shocks")))
    liq = generate_liquidity(shock_cfg, stream_for(StreamKey(rep_seed, "liquidity")))
    market_z = stream_for(StreamKey(rep_seed, "market")).normals(cfg.n_events)
    premiums = cfg.market.market_mean + cfg.market.market_std * market_z

    n = cfg.n_traders_per_type
    n_types = len(cfg.agents)
    total = n_types * n * cfg.n_events
    out = {
        "x_star": np.empty(total),
        "order_size": np.empty(total, dtype=np.int8),
        "realized_return": np.empty(total),
        "wealth": np.empty(total),
        "p_small": np.empty(total),
        "p_medium": np.empty(total),
        "p_large": np.empty(total),
    }
    states = [TraderState(cfg.agents[k], k * n + i, cfg.initial_wealth, 0.0)
              for k in range(n_types) for i in range(n)]
    sigmas = [effective_risky_std(cfg.market.risky_std_base, a.info_level, cfg.market.noise_mult)
              for a in cfg.agents]

    chunk = max(1, -(-n // (max(workers, 1) * 4)))
    for t in range(cfg.n_events):
        s_total = float(path.total[t])
        s_perm = float(path.perm[t])
        liq_t = float(liq.values[t])
        capm_t = replace(cfg.market.capm, market_premium=float(premiums[t]))
        realized_base = capm_return(capm_t, cfg.market.rf, s_total, s_perm, 0.0)
        tasks = []
        for k, arch in enumerate(cfg.agents):
            perceived_mean = cfg.market.risky_mean
            if cfg.surprise_in_beliefs:
                perceived_mean += arch.info_level * capm_t.surprise_loading * s_total
            probs = softmax(order_utilities(cfg.choice, arch.risk_aversion, abs(s_total), liq_t))
            base = k * n * cfg.n_events
            rows = slice(base + t, base + n * cfg.n_events, cfg.n_events)
            out["p_small"][rows] = probs[0]
            out["p_medium"][rows] = probs[1]
            out["p_large"][rows] = probs[2]
            for lo in range(0, n, chunk):
                tasks.append((k, lo, min(lo + chunk, n), sigmas[k], perceived_mean,
                              probs, realized_base))
        if pool is None:
            for k, lo, hi, sigma, mean, probs, base_r in tasks:
                _solve_trader_block(cfg, rep_seed, t, k, lo, hi, sigma, mean,
                                    probs, base_r, states, out)
        else:
            futures = [pool.submit(_solve_trader_block, cfg, rep_seed, t, k, lo, hi,
                                   sigma, mean, probs, base_r, states, out)
                       for k, lo, hi, sigma, mean, probs, base_r in tasks]
            for f in futures:
                f.result()

    events = {
        "replication": np.full(cfg.n_events, rep, dtype=np.int64),
        "event": np.arange(cfg.n_events, dtype=np.int64),
        "temp_shock": path.temp,
        "perm_shock": path.perm,
        "surprise": path.total,
        "liquidity": liq.values,
        "liquidity_clamped": liq.clamped.astype(np.int8),
        "market_premium": premiums,
    }
    return out, events


def run_simulation(cfg: SimConfig, workers: int = 1) -> TraderPanel:
    """Run the full experiment; the result is a pure function of cfg.

    `workers` only controls how per-trader work is scheduled; any value
    produces identical output.
    """
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    n = cfg.n_traders_per_type
    n_types = len(cfg.agents)
    per_rep = n_types * n * cfg.n_events

    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        reps = [_run_replication(cfg, r, workers, pool) for r in range(cfg.replications)]
    finally:
        if pool is not None:
            pool.shutdown()

    type_codes = np.repeat(np.arange(n_types, dtype=np.int8), n * cfg.n_events)
    trader_idx = np.tile(np.repeat(np.arange(n, dtype=np.int64), cfg.n_events), n_types)
    event_idx = np.tile(np.arange(cfg.n_events, dtype=np.int64), n_types * n)

    def stacked(key):
        return np.concatenate([out[key] for out, _ in reps])

    surprise_rep = np.concatenate(
        [np.tile(ev["surprise"], n_types * n) for _, ev in reps])
    liquidity_rep = np.concatenate(
        [np.tile(ev["liquidity"], n_types * n) for _, ev in reps])
    return TraderPanel(
        replication=np.repeat(np.arange(cfg.replications, dtype=np.int64), per_rep),
        trader_type=np.tile(type_codes, cfg.replications),
        trader_index=np.tile(trader_idx, cfg.replications),
        event=np.tile(event_idx, cfg.replications),
        surprise=surprise_rep,
        liquidity=liquidity_rep,
        x_star=stacked("x_star"),
        order_size=np.concatenate([out["order_size"] for out, _ in reps]),
        p_small=stacked("p_small"),
        p_medium=stacked("p_medium"),
        p_large=stacked("p_large"),
        realized_return=stacked("realized_return"),
        wealth=stacked("wealth"),
        events={key: np.concatenate([ev[key] for _, ev in reps])
                for key in reps[0][1]},
        seed=cfg.seed,
    )
