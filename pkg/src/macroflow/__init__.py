"""macroflow: deterministic agent-based simulation of heterogeneous trader
order flow and portfolio rebalancing around scheduled CPI announcements."""

from .agents import TraderArchetype, TraderState, archetype_registry, step_wealth
from .allocation import AllocationConfig, AllocationResult, crra_utility, optimal_allocation
from .choice import (ChoiceCoefficients, OrderDecision, decide_order, order_utilities,
                     sample_order, softmax)
from .engine import SimConfig, TraderPanel, run_simulation
from .market import (CapmParams, RETURN_FLOOR, ReturnModel, capm_return,
                     effective_risky_std, sample_perceived_return)
from .rng import Stream, StreamKey, replication_seed, stream_for
from .shocks import LiquiditySeries, ShockConfig, SurprisePath, generate_liquidity, generate_surprises
from .stats import SummaryTables, summarize

__version__ = "0.1.0"

__all__ = [
    "AllocationConfig", "AllocationResult", "CapmParams", "ChoiceCoefficients",
    "LiquiditySeries", "OrderDecision", "RETURN_FLOOR", "ReturnModel", "ShockConfig",
    "SimConfig", "Stream", "StreamKey", "SummaryTables", "SurprisePath",
    "TraderArchetype", "TraderPanel", "TraderState", "archetype_registry",
    "capm_return", "crra_utility", "decide_order", "effective_risky_std",
    "generate_liquidity", "generate_surprises", "optimal_allocation",
    "order_utilities", "replication_seed", "run_simulation", "sample_order",
    "sample_perceived_return", "softmax", "step_wealth", "stream_for", "summarize",
]
