"""Deterministic RNG stream derivation.

Every stochastic component derives its own generator from the global seed
plus a tag path, so results never depend on execution order or thread
scheduling.
"""

import zlib

import numpy as np


def _tag_to_int(tag) -> int:
    if isinstance(tag, str):
        return zlib.crc32(tag.encode("utf-8"))
    return int(tag)


def derive_seed(seed: int, *tags) -> int:
    """Collapse (seed, tags...) into a single 64-bit seed."""
    ss = np.random.SeedSequence([int(seed)] + [_tag_to_int(t) for t in tags])
    return int(ss.generate_state(2, dtype=np.uint32).view(np.uint64)[0])


def derive_rng(seed: int, *tags) -> np.random.Generator:
    """Independent generator for the stream named by (seed, tags...)."""
    ss = np.random.SeedSequence([int(seed)] + [_tag_to_int(t) for t in tags])
    return np.random.default_rng(ss)
