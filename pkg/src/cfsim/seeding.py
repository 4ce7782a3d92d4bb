"""Deterministic seed derivation for independent random streams.

Every stochastic stage (geometry, shadowing, fading, pilot noise, k-means
initialization, offline precoder sampling) draws from its own generator,
derived from the master seed and a list of labels.  Results are therefore
invariant to execution order and to the number of workers.
"""

from __future__ import annotations

import hashlib

import numpy as np

# Separator cannot appear in str() of ints/short labels, so label tuples
# map injectively onto byte strings.
_SEP = "\x1f"


def derive_seed(master_seed: int, labels) -> int:
    """Collision-resistant 64-bit seed from a master seed and label tuple."""
    payload = _SEP.join([str(master_seed)] + [str(x) for x in labels])
    digest = hashlib.sha256(payload.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def derive_rng(master_seed: int, *labels) -> np.random.Generator:
    """Generator seeded by ``derive_seed``; independent per label tuple."""
    return np.random.default_rng(derive_seed(master_seed, labels))
