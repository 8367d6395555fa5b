"""Deterministic derivation of independent random streams from one master seed.

Every consumer of randomness in a run gets its own named stream (for an agent:
choice, outcome, resample, broadcast, init).  Streams are backed by the
counter-based Philox generator, so distinct names give statistically
independent sequences and the same (seed, name path) always reproduces the
same stream.  This isolation is what makes a pair interaction with a delta
source reproduce the single-agent run bit for bit.
"""

from __future__ import annotations

import zlib

import numpy as np


def _token(part) -> int:
    if isinstance(part, (int, np.integer)):
        return int(part) & 0xFFFFFFFF
    return zlib.crc32(str(part).encode("utf8"))


def stream(master_seed: int, *path) -> np.random.Generator:
    """Return the named independent stream for ``(master_seed, *path)``."""
    key = (int(master_seed),) + tuple(_token(p) for p in path)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def agent_streams(master_seed: int, slot: int) -> dict[str, np.random.Generator]:
    """All named streams owned by the agent in the given slot."""
    names = ("init", "choice", "outcome", "resample", "broadcast")
    return {name: stream(master_seed, "agent", slot, name) for name in names}
