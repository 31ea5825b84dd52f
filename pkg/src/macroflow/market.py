"""Two-asset market: risk-free rate, factor-model risky returns, and the
sampling distribution traders use when allocating.

Two return channels coexist. The allocator works with draws from a normal
belief distribution (mean `risky_mean`, std widened by information level);
the realized per-event return comes from the factor decomposition in
:func:`capm_return`, driven by the generated surprise path. All returns are
clamped at `return_floor` so gross portfolio returns stay positive.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .rng import Stream

#: Hard lower bound on any (net) return. Keeps final wealth strictly
#: positive, which isoelastic utility requires for non-integer exponents.
RETURN_FLOOR = -0.99


@dataclass(frozen=True)
class CapmParams:
    """Loadings of the realized risky return on market and surprise factors.

    `market_premium` is the excess market return for one event; the engine
    redraws it per event from N(market_mean, market_std^2) (see ReturnModel).
    Negative surprise loadings make positive inflation surprises hurt the
    risky asset.
    """

    alpha: float = 0.0
    beta: float = 1.0
    market_premium: float = 0.05
    surprise_loading: float = -0.25
    perm_loading: float = -0.15
    eps_std: float = 0.02

    def __post_init__(self):
        if self.eps_std < 0:
            raise ValueError(f"market.capm.eps_std must be >= 0, got {self.eps_std}")


@dataclass(frozen=True)
class ReturnModel:
    """Per-event return parameters (no compounding convention is implied)."""

    rf: float = 0.04
    risky_mean: float = 0.10
    risky_std_base: float = 0.20
    noise_mult: float = 1.0
    market_mean: float = 0.05
    market_std: float = 0.05
    return_floor: float = RETURN_FLOOR
    capm: CapmParams = field(default_factory=CapmParams)

    def __post_init__(self):
        if self.risky_std_base < 0:
            raise ValueError(f"market.risky_std_base must be >= 0, got {self.risky_std_base}")
        if self.rf <= -1:
            raise ValueError(f"market.rf must be > -1, got {self.rf}")
        if self.noise_mult < 0:
            raise ValueError(f"market.noise_mult must be >= 0, got {self.noise_mult}")
        if self.market_std < 0:
            raise ValueError(f"market.market_std must be >= 0, got {self.market_std}")
        if not -1.0 <= self.return_floor < 0.0:
            raise ValueError(f"market.return_floor must lie in [-1, 0), got {self.return_floor}")


def capm_return(p: CapmParams, rf: float, surprise_total: float,
                surprise_perm: float, eps: float) -> float:
    """Realized risky return: rf + alpha + beta * premium + loadings on the
    total and permanent surprise components + idiosyncratic eps."""
    return (rf + p.alpha + p.beta * p.market_premium
            + p.surprise_loading * surprise_total
            + p.perm_loading * surprise_perm + eps)


def effective_risky_std(base_std: float, info_level: float, noise_mult: float) -> float:
    """Perceived return std for a trader: base_std * (1 + noise_mult * (1 - info)).

    Fully informed traders (info_level = 1) see the base std; less informed
    traders see proportionally more noise.
    """
    if not 0.0 <= info_level <= 1.0:
        raise ValueError(f"info_level must lie in [0, 1], got {info_level}")
    if base_std < 0:
        raise ValueError(f"base_std must be >= 0, got {base_std}")
    if noise_mult < 0:
        raise ValueError(f"noise_mult must be >= 0, got {noise_mult}")
    return base_std * (1.0 + noise_mult * (1.0 - info_level))


def sample_perceived_return(model: ReturnModel, trader_std: float, stream: Stream) -> float:
    """One draw from a trader's belief distribution, clamped at the floor."""
    if trader_std < 0:
        raise ValueError(f"trader_std must be >= 0, got {trader_std}")
    z = stream.draw_normal()
    return max(model.return_floor, model.risky_mean + trader_std * z)
