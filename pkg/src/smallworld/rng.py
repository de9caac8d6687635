"""Deterministic seed derivation.

Every random draw in the toolkit flows from one root seed. Substreams are
keyed by (root, stage-name, index...) so that independent pipeline stages
never share a stream and reruns are bit-reproducible on any platform.
"""

from __future__ import annotations

import zlib

import numpy as np

__all__ = ["derive_seed", "substream"]


def _token_key(token: str | int) -> int:
    if isinstance(token, int):
        return token & 0xFFFFFFFF
    return zlib.crc32(token.encode("utf-8"))


def derive_seed(root: int, *tokens: str | int) -> int:
    """Derive a child seed from a root seed and a stage path.

    The derivation hashes (root, *tokens) through ``np.random.SeedSequence``,
    which is stable across platforms and numpy releases.
    """
    entropy = [root & 0xFFFFFFFFFFFFFFFF] + [_token_key(t) for t in tokens]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


def substream(root: int, *tokens: str | int) -> np.random.Generator:
    """Generator seeded by ``derive_seed(root, *tokens)``."""
    return np.random.default_rng(derive_seed(root, *tokens))
