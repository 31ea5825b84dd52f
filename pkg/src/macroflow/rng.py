"""Named, independently seedable random-number streams.

Every random draw in a simulation comes from a stream identified by a
:class:`StreamKey` (experiment seed, purpose, trader index, event index).
Streams are backed by the Philox-4x64 counter generator keyed directly by
the stream key, so a stream's output is a pure function of its key: creation
order, thread count, and other streams never affect it, and distinct keys
select distinct Philox keystreams (no overlap by construction).

Draw accounting is fixed and documented:

* one 64-bit Philox word per uniform: ``u = (word >> 11) * 2**-53`` in [0, 1)
* one 64-bit word per normal: ``z = Phi^-1((word >> 11 + 0.5) * 2**-53)``
  using Wichura's AS241 inverse normal CDF (frozen in ``_kernels.py``)

Successive calls continue the keystream, so ``normals(3)`` followed by
``normals(2)`` equals ``normals(5)``. Bit-identical output is guaranteed
per platform, not across platforms or BLAS/compiler changes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import normals_from_raw, uniforms_from_raw

PURPOSES = ("shocks", "liquidity", "market", "trader-returns", "trader-choice")
_PURPOSE_CODE = {name: i for i, name in enumerate(PURPOSES)}

_SEED_MAX = 2**64
_INDEX_MAX = 2**30
_GOLDEN = 0x9E3779B97F4A7C15
_MASK64 = 2**64 - 1


@dataclass(frozen=True)
class StreamKey:
    """Identity of one random stream. Equal keys yield equal sequences."""

    experiment_seed: int
    purpose: str
    trader_index: int = 0
    event_index: int = 0

    def __post_init__(self):
        if not 0 <= self.experiment_seed < _SEED_MAX:
            raise ValueError(f"experiment_seed must be a u64, got {self.experiment_seed}")
        if self.purpose not in _PURPOSE_CODE:
            raise ValueError(f"unknown stream purpose {self.purpose!r}; expected one of {PURPOSES}")
        if not 0 <= self.trader_index < _INDEX_MAX:
            raise ValueError(f"trader_index out of range: {self.trader_index}")
        if not 0 <= self.event_index < _INDEX_MAX:
            raise ValueError(f"event_index out of range: {self.event_index}")

    def philox_key(self) -> np.ndarray:
        """Pack the key into the two 64-bit Philox key words."""
        word = (
            (_PURPOSE_CODE[self.purpose] << 60)
            | (self.trader_index << 30)
            | self.event_index
        )
        return np.array([self.experiment_seed, word], dtype=np.uint64)


class Stream:
    """Deterministic draws from one keyed counter stream."""

    def __init__(self, key: StreamKey):
        self.key = key
        self._gen = np.random.Generator(np.random.Philox(key=key.philox_key()))

    def raw(self, n: int) -> np.ndarray:
        """Next ``n`` raw 64-bit words (one Philox word each)."""
        return self._gen.integers(0, _SEED_MAX, size=n, dtype=np.uint64)

    def uniforms(self, n: int) -> np.ndarray:
        """Next ``n`` uniforms on [0, 1)."""
        return uniforms_from_raw(self.raw(n))

    def normals(self, n: int) -> np.ndarray:
        """Next ``n`` standard normals (inverse-CDF transform, one word each)."""
        return normals_from_raw(self.raw(n))

    def draw_uniform(self) -> float:
        return float(self.uniforms(1)[0])

    def draw_normal(self) -> float:
        return float(self.normals(1)[0])


def stream_for(key: StreamKey) -> Stream:
    """Create the stream for ``key``. Safe to call from any thread."""
    return Stream(key)


def _splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & _MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK64
    x ^= x >> 31
    return x


def replication_seed(seed: int, replication: int) -> int:
    """Experiment seed for one replication: rep 0 is the base seed,
    later reps are derived through a splitmix64 finalizer."""
    if replication == 0:
        return seed
    return _splitmix64((seed + replication * _GOLDEN) & _MASK64)
