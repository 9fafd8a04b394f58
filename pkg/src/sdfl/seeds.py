"""Deterministic derivation of independent random substreams.

Every random decision in a run is drawn from its own substream, keyed by a
purpose label plus identifying indices (round, worker, cluster, ...).  Keyed
substreams mean that consuming one stream never shifts another, so unrelated
config changes (e.g. toggling ledger latency) cannot perturb data generation,
training shuffles, or head draws.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(*parts: int | str) -> int:
    """Map a label tuple to a stable 64-bit seed (process-independent)."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def substream(*parts: int | str) -> np.random.Generator:
    """A fresh generator for the substream identified by `parts`."""
    return np.random.default_rng(derive_seed(*parts))
