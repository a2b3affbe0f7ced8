"""Deterministic random-stream derivation.

Every stochastic routine in this package takes an explicit numpy Generator.
Experiment code derives one Generator per (seed, purpose, n, replica) cell
from a counter-based Philox generator, so that

  * the stream for a cell never depends on how many other cells ran before it,
  * results are bit-identical for a given (seed, n, replica) regardless of
    thread count or replica scheduling,
  * adding a new purpose tag never perturbs existing streams.

Scheme: Philox4x64 keyed with key = (seed, tag << 56 | n << 28 | replica).
Philox guarantees independent streams for distinct keys.
"""

from __future__ import annotations

import numpy as np

# Purpose tags. Append only; renumbering changes every derived stream.
TAGS = {
    "dynamics": 1,
    "marked": 2,
    "limits": 3,
    "experiment": 4,
    "test": 5,
}

_N_BITS = 28
_R_BITS = 28


def stream(seed: int, tag: str, n: int = 0, replica: int = 0) -> np.random.Generator:
    """Generator for one (seed, tag, n, replica) cell."""
    t = TAGS[tag]
    if not 0 <= n < (1 << _N_BITS):
        raise ValueError(f"n out of stream-key range: {n}")
    if not 0 <= replica < (1 << _R_BITS):
        raise ValueError(f"replica out of stream-key range: {replica}")
    sub = (t << (_N_BITS + _R_BITS)) | (n << _R_BITS) | replica
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(sub)],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
