"""Shared fixtures: the expensive default-scale runs are built once per session."""

import os
import time
from dataclasses import dataclass

import pytest

import macroflow as mf
from macroflow.engine import TraderPanel, run_simulation


@dataclass
class TimedRun:
    panel: TraderPanel
    elapsed: float


def _warm_up_jit():
    """Compile every kernel shape (all four gamma branches) before timing."""
    cfg = mf.SimConfig(n_traders_per_type=1, n_events=1,
                       allocation=mf.AllocationConfig(n_draws=64))
    run_simulation(cfg)


@pytest.fixture(scope="session")
def default_run() -> TimedRun:
    """The full-scale default run: 500 traders/type, 36 events, seed 42, single worker."""
    _warm_up_jit()
    cfg = mf.SimConfig()
    t0 = time.perf_counter()
    panel = run_simulation(cfg, workers=1)
    return TimedRun(panel=panel, elapsed=time.perf_counter() - t0)


@pytest.fixture(scope="session")
def ten_replication_run() -> TraderPanel:
    """Seed 42 with 10 replications (derived seeds), parallel workers allowed."""
    _warm_up_jit()
    cfg = mf.SimConfig(replications=10)
    return run_simulation(cfg, workers=os.cpu_count() or 1)
