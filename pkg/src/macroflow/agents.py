"""Trader archetypes, their calibration table, and per-trader wealth state."""

from __future__ import annotations

from dataclasses import dataclass

ARCHETYPE_NAMES = ("Retail", "Pension", "Institutional", "HedgeFund")


@dataclass(frozen=True)
class TraderArchetype:
    name: str
    risk_aversion: float
    info_level: float
    max_risk: float
    base_txn_cost: float

    def __post_init__(self):
        if self.risk_aversion <= 0:
            raise ValueError(f"agents.{self.name}.risk_aversion must be > 0, got {self.risk_aversion}")
        if not 0.0 <= self.info_level <= 1.0:
            raise ValueError(f"agents.{self.name}.info_level must lie in [0, 1], got {self.info_level}")
        if not 0.0 <= self.max_risk <= 1.0:
            raise ValueError(f"agents.{self.name}.max_risk must lie in [0, 1], got {self.max_risk}")
        if self.base_txn_cost < 0:
            raise ValueError(f"agents.{self.name}.base_txn_cost must be >= 0, got {self.base_txn_cost}")


# Calibration table: (risk aversion, info level, max risky weight,
# proportional transaction cost rate). Retail's 0.1 cost rate is 20-50x the
# others; kept as calibrated.
_ARCHETYPE_TABLE = (
    TraderArchetype("Retail", 3.0, 0.0, 0.25, 0.1),
    TraderArchetype("Pension", 2.0, 0.7, 0.4, 0.005),
    TraderArchetype("Institutional", 1.5, 0.8, 0.8, 0.005),
    TraderArchetype("HedgeFund", 1.0, 1.0, 1.0, 0.002),
)


def archetype_registry() -> list[TraderArchetype]:
    """The four trader archetypes, in fixed order Retail, Pension,
    Institutional, HedgeFund."""
    return list(_ARCHETYPE_TABLE)


@dataclass(frozen=True)
class TraderState:
    archetype: TraderArchetype
    trader_index: int
    wealth: float = 100.0
    prev_allocation: float = 0.0

    def __post_init__(self):
        if self.wealth <= 0:
            raise ValueError(f"trader wealth must stay > 0, got {self.wealth}")
        if not 0.0 <= self.prev_allocation <= 1.0:
            raise ValueError(f"prev_allocation must lie in [0, 1], got {self.prev_allocation}")


def step_wealth(state: TraderState, x: float, rf: float, realized_risky: float) -> TraderState:
    """Advance one event: grow wealth at the blended portfolio return, then
    deduct a turnover cost of base_txn_cost * |x - prev_allocation| on the
    pre-return wealth (capped at half the post-return wealth so wealth can
    never cross zero).
    """
    if not 0.0 <= x <= state.archetype.max_risk + 1e-12:
        raise ValueError(
            f"allocation {x} outside [0, {state.archetype.max_risk}] for {state.archetype.name}")
    if realized_risky <= -1.0:
        raise ValueError(f"realized risky return must be > -1, got {realized_risky}")
    grown = state.wealth * ((1.0 - x) * (1.0 + rf) + x * (1.0 + realized_risky))
    cost = state.wealth * state.archetype.base_txn_cost * abs(x - state.prev_allocation)
    cost = min(cost, 0.5 * grown)
    new_wealth = grown - cost
    if new_wealth <= 0:
        raise RuntimeError(
            f"wealth became non-positive ({new_wealth}) for {state.archetype.name} "
            f"trader {state.trader_index}: x={x} rf={rf} realized={realized_risky}")
    return TraderState(state.archetype, state.trader_index, new_wealth, x)
