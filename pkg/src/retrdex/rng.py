"""Deterministic random streams.

All randomness flows through numpy's Philox generator, a 64-bit counter-based
PRNG whose output is specified independently of platform word size or library
build, so identical (seed, stream) pairs reproduce bit-identical draws
everywhere. Streams are derived from a root seed plus an integer path, e.g.
``stream(seed, ENV, env_index, episode_index)``, which keeps per-env /
per-episode draws independent without sharing mutable generator state.
"""

from __future__ import annotations

import numpy as np

# Stream namespaces; first element of every derivation path.
SCENE = 1
ENV = 2
POLICY = 3
EVAL = 4
DISTILL = 5
TRACKER = 6


def stream(seed: int, *path: int) -> np.random.Generator:
    """Independent Philox generator for (seed, path)."""
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def torch_seed(seed: int, *path: int) -> int:
    """A 63-bit integer suitable for torch.manual_seed, derived like stream()."""
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)
