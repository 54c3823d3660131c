"""Deterministic random streams.

Every stream is derived from one master seed plus an integer key path
(replicate, day, purpose, ...) through :class:`numpy.random.SeedSequence`,
so a stream never depends on how many numbers another stream consumed.
"""

from __future__ import annotations

import zlib

import numpy as np

# Purpose tags for sub-streams; stable integers so that outputs survive
# reordering of this table.
NETWORK = 1
OUTBREAK = 2
EPIDEMIC = 3
DECISION = 4
CALIBRATION = 5


def _key(part) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode())
    return int(part)


def stream(seed, *path) -> np.random.Generator:
    """Return a generator for ``seed`` and the given key path.

    ``seed`` may itself be a Generator, in which case it is returned as is
    (tests and callers that manage their own generator).
    """
    if isinstance(seed, np.random.Generator):
        return seed
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(_key(p) for p in path))
    return np.random.Generator(np.random.PCG64(ss))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
