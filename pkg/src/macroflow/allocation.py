"""Monte Carlo grid search for the optimal risky weight under isoelastic
(CRRA) utility.

The trader maximizes E[U(W_final)] with W_final = W_0 * Pi(x, R) and
Pi(x, R) = (1 - x)(1 + rf) + x(1 + R). Because W_0 enters as a positive
constant factor, the argmax over x only depends on Pi, so expected utilities
are estimated and reported on Pi directly. The estimator averages the utility
transform over sampled returns; no lognormal/moment shortcut is used, since
that would collapse the return distribution to its first two moments.

With common random numbers (the default) every grid point is evaluated on
the same draws, so neighbouring points are compared under identical sampling
noise; turning it off draws a fresh batch per grid point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .market import RETURN_FLOOR
from .rng import Stream

#: Treat gamma within this distance of 1 as log utility.
_LOG_GAMMA_TOL = 1e-9


@dataclass(frozen=True)
class AllocationConfig:
    grid_step: float = 0.05
    n_draws: int = 10_000
    use_common_random_numbers: bool = True

    def __post_init__(self):
        if not 0.0 < self.grid_step <= 1.0:
            raise ValueError(f"allocation.grid_step must lie in (0, 1], got {self.grid_step}")
        if self.n_draws < 1:
            raise ValueError(f"allocation.n_draws must be >= 1, got {self.n_draws}")


@dataclass(frozen=True)
class AllocationResult:
    x_star: float
    expected_utility: float
    utility_curve: np.ndarray  # shape (n_grid, 2): columns (x, estimated E[U])


def crra_utility(wealth, gamma: float):
    """Isoelastic utility (W^(1-gamma) - 1) / (1 - gamma), log(W) at gamma = 1.

    Accepts scalars or arrays; wealth must be strictly positive.
    """
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    w = np.asarray(wealth, dtype=np.float64)
    if np.any(w <= 0):
        raise ValueError("crra_utility requires wealth > 0")
    if abs(gamma - 1.0) < _LOG_GAMMA_TOL:
        out = np.log(w)
    else:
        out = (w ** (1.0 - gamma) - 1.0) / (1.0 - gamma)
    return float(out) if np.isscalar(wealth) else out


def allocation_grid(max_risk: float, grid_step: float) -> np.ndarray:
    """Candidate weights: multiples of grid_step on [0, max_risk], with
    max_risk itself appended when it falls between grid points."""
    if not 0.0 <= max_risk <= 1.0:
        raise ValueError(f"max_risk must lie in [0, 1], got {max_risk}")
    n_steps = int(math.floor(max_risk / grid_step + 1e-9))
    xs = [round(i * grid_step, 10) for i in range(n_steps + 1)]
    if xs[-1] < max_risk - 1e-12:
        xs.append(max_risk)
    return np.array(xs, dtype=np.float64)


def _mean_power(gross: np.ndarray, safes: np.ndarray, riskys: np.ndarray,
                gamma: float) -> np.ndarray:
    """mean over draws of Pi^(1-gamma) per grid point (mean of ln Pi at gamma=1)."""
    exponent = 1.0 - gamma
    if abs(exponent) < _LOG_GAMMA_TOL:
        return _kernels.grid_mean_log(gross, safes, riskys)
    if exponent == -1.0:
        return _kernels.grid_mean_recip(gross, safes, riskys)
    if exponent == -2.0:
        return _kernels.grid_mean_recip_sq(gross, safes, riskys)
    if exponent == -0.5:
        return _kernels.grid_mean_rsqrt(gross, safes, riskys)
    return _kernels.grid_mean_pow(gross, safes, riskys, exponent)


def _sample_gross(stream: Stream, n: int, risky_mean: float, risky_std: float,
                  return_floor: float) -> np.ndarray:
    z = stream.normals(n)
    return 1.0 + np.maximum(risky_mean + risky_std * z, return_floor)


def optimal_allocation(gamma: float, max_risk: float, rf: float, risky_mean: float,
                       risky_std: float, cfg: AllocationConfig, stream: Stream,
                       return_floor: float = RETURN_FLOOR) -> AllocationResult:
    """Grid-search argmax of estimated E[U(Pi(x, R))] over the risky weight.

    Draws R ~ Normal(risky_mean, risky_std), clamped at return_floor. Ties on
    the estimated curve resolve to the lowest x; with common random numbers
    on, exactly cfg.n_draws normals are consumed, otherwise n_draws per grid
    point in grid order.
    """
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    if risky_std < 0:
        raise ValueError(f"risky_std must be >= 0, got {risky_std}")
    if rf <= -1:
        raise ValueError(f"rf must be > -1, got {rf}")
    grid = allocation_grid(max_risk, cfg.grid_step)
    safes = (1.0 - grid) * (1.0 + rf)
    log_branch = abs(gamma - 1.0) < _LOG_GAMMA_TOL

    if cfg.use_common_random_numbers:
        gross = _sample_gross(stream, cfg.n_draws, risky_mean, risky_std, return_floor)
        means = _mean_power(gross, safes, grid, gamma)
    else:
        means = np.empty(len(grid))
        for i in range(len(grid)):
            gross = _sample_gross(stream, cfg.n_draws, risky_mean, risky_std, return_floor)
            means[i] = _mean_power(gross, safes[i:i + 1], grid[i:i + 1], gamma)[0]

    if log_branch:
        utilities = means
    else:
        utilities = (means - 1.0) / (1.0 - gamma)
    best = int(np.argmax(utilities))
    return AllocationResult(
        x_star=float(grid[best]),
        expected_utility=float(utilities[best]),
        utility_curve=np.column_stack([grid, utilities]),
    )
