"""Discrete order-size choice: linear utilities per size, softmax
probabilities, and inverse-CDF sampling.

Order sizes are small / medium / large. A size's utility is linear in the
trader's risk aversion, the absolute surprise, and the liquidity level; the
default coefficients make risk aversion push toward small orders while
surprise magnitude and (especially) liquidity reward large ones. The chosen
size is recorded alongside the allocation but does not feed back into wealth.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rng import Stream

ORDER_SIZES = ("small", "medium", "large")


@dataclass(frozen=True)
class SizeCoefficients:
    """Utility coefficients for one order size."""

    c0: float
    c_ra: float
    c_sur: float
    c_liq: float
    multiplier: float

    def __post_init__(self):
        for name in ("c0", "c_ra", "c_sur", "c_liq"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"choice coefficient {name} must be finite, got {v}")
        if self.multiplier <= 0:
            raise ValueError(f"choice multiplier must be > 0, got {self.multiplier}")


@dataclass(frozen=True)
class ChoiceCoefficients:
    small: SizeCoefficients = field(
        default_factory=lambda: SizeCoefficients(0.5, 0.4, 0.0, 0.0, 0.5))
    medium: SizeCoefficients = field(
        default_factory=lambda: SizeCoefficients(0.0, 0.0, 0.5, 0.5, 1.0))
    large: SizeCoefficients = field(
        default_factory=lambda: SizeCoefficients(-0.5, -0.4, 1.0, 1.5, 2.0))

    def __post_init__(self):
        mults = [self.small.multiplier, self.medium.multiplier, self.large.multiplier]
        if not (mults[0] < mults[1] < mults[2]):
            raise ValueError(
                f"choice multipliers must be strictly increasing small < medium < large, got {mults}")

    def per_size(self) -> tuple[SizeCoefficients, SizeCoefficients, SizeCoefficients]:
        return (self.small, self.medium, self.large)

    def vectors(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(c0, c_ra, c_sur, c_liq) each as a 3-vector in size order."""
        rows = self.per_size()
        return (np.array([r.c0 for r in rows]),
                np.array([r.c_ra for r in rows]),
                np.array([r.c_sur for r in rows]),
                np.array([r.c_liq for r in rows]))


@dataclass(frozen=True)
class OrderDecision:
    chosen: str
    probabilities: np.ndarray
    utilities: np.ndarray


def order_utilities(coeffs: ChoiceCoefficients, risk_aversion: float,
                    abs_surprise: float, liquidity: float) -> np.ndarray:
    """Utility of each order size: c0 + c_ra * RA + c_sur * |surprise| + c_liq * liquidity."""
    if abs_surprise < 0:
        raise ValueError(f"abs_surprise must be >= 0, got {abs_surprise}")
    c0, c_ra, c_sur, c_liq = coeffs.vectors()
    return c0 + c_ra * risk_aversion + c_sur * abs_surprise + c_liq * liquidity


def softmax(utilities: np.ndarray) -> np.ndarray:
    """Stabilized softmax: p_i = exp(u_i - max u) / sum_j exp(u_j - max u)."""
    u = np.asarray(utilities, dtype=np.float64)
    if not np.all(np.isfinite(u)):
        raise ValueError(f"softmax requires finite utilities, got {utilities}")
    e = np.exp(u - np.max(u))
    return e / e.sum()


def sample_order(probabilities: np.ndarray, stream: Stream) -> str:
    """Inverse-CDF sample with one uniform; CDF bins in small -> medium -> large order."""
    p = np.asarray(probabilities, dtype=np.float64)
    if p.shape != (3,) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"invalid probability vector {probabilities}")
    u = stream.draw_uniform()
    idx = int(np.searchsorted(np.cumsum(p), u, side="right"))
    return ORDER_SIZES[min(idx, 2)]


def decide_order(coeffs: ChoiceCoefficients, risk_aversion: float, abs_surprise: float,
                 liquidity: float, stream: Stream) -> OrderDecision:
    """Full decision: utilities -> softmax -> one sampled size."""
    utilities = order_utilities(coeffs, risk_aversion, abs_surprise, liquidity)
    probabilities = softmax(utilities)
    return OrderDecision(sample_order(probabilities, stream), probabilities, utilities)
