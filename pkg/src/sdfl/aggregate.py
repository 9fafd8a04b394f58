"""Weight aggregation: federated averaging, staleness handling, cluster merges.

Numerical contract: a coefficient-weighted mean of identical vectors must
return that vector bit-exactly, and every output component must lie inside
the componentwise min/max envelope of the inputs.  Both are achieved by
computing the mean in anchored form, out = w0 + sum_i coef_i * (w_i - w0),
then clamping to the envelope.  Inputs are processed in ascending worker-id
order so results never depend on arrival order.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .learner import ModelWeights, ShapeMismatch


class AggregateError(Exception):
    pass


class EmptyUpdateSet(AggregateError):
    pass


class Weighting(str, Enum):
    UNIFORM = "uniform"
    BY_SAMPLES = "by_samples"


class SyncMode(str, Enum):
    SYNCHRONOUS = "sync"
    ASYNC = "async"


@dataclass
class Update:
    """One worker's weight submission as received by a cluster head."""

    worker: str
    weights: ModelWeights
    round_produced: int
    samples: int
    arrival_time: float = 0.0

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")


@dataclass(frozen=True)
class AsyncPolicy:
    mode: SyncMode = SyncMode.SYNCHRONOUS
    staleness_bound: int = 1          # updates older than this many rounds are dropped
    staleness_decay: float = 0.5      # per-round coefficient multiplier in (0, 1]
    collection_window: float = 30.0   # seconds a head waits for updates

    def __post_init__(self):
        if self.staleness_bound < 0:
            raise ValueError("staleness_bound must be >= 0")
        if not (0.0 < self.staleness_decay <= 1.0):
            raise ValueError("staleness_decay must be in (0, 1]")
        if self.collection_window <= 0:
            raise ValueError("collection_window must be > 0")


def _check_shapes(updates: list[Update]) -> tuple[int, int]:
    d, c = updates[0].weights.d, updates[0].weights.c
    for u in updates[1:]:
        if (u.weights.d, u.weights.c) != (d, c):
            raise ShapeMismatch(
                f"update from {u.worker} has shape ({u.weights.d},{u.weights.c}), "
                f"expected ({d},{c})"
            )
    return d, c


def combine(updates: list[Update], coefficients: list[float]) -> ModelWeights:
    """Coefficient-weighted mean in anchored form with envelope clamping.

    Coefficients must be non-negative and sum to 1 (the callers below
    guarantee this).  Updates and coefficients are reordered together by
    worker id, making the result independent of list order.
    """
    if not updates:
        raise EmptyUpdateSet("no updates to combine")
    if len(coefficients) != len(updates):
        raise ValueError("one coefficient per update required")
    d, c = _check_shapes(updates)
    order = sorted(range(len(updates)), key=lambda i: updates[i].worker)
    vecs = [updates[i].weights.values for i in order]
    coefs = [coefficients[i] for i in order]

    anchor = vecs[0]
    delta = np.zeros_like(anchor)
    for vec, coef in zip(vecs, coefs):
        delta += coef * (vec - anchor)
    out = anchor + delta
    lo = np.min(vecs, axis=0)
    hi = np.max(vecs, axis=0)
    return ModelWeights(np.clip(out, lo, hi), d, c)


def fedavg(updates: list[Update], weighting: Weighting = Weighting.UNIFORM) -> ModelWeights:
    if not updates:
        raise EmptyUpdateSet("no updates to aggregate")
    if weighting is Weighting.BY_SAMPLES:
        total = sum(u.samples for u in updates)
        coefs = [u.samples / total for u in updates]
    else:
        coefs = [1.0 / len(updates)] * len(updates)
    return combine(updates, coefs)


def apply_staleness(
    updates: list[Update], current_round: int, policy: AsyncPolicy
) -> list[tuple[Update, float]]:
    """Drop over-stale updates, decay the rest, renormalize coefficients.

    An update produced in round p has staleness s = current_round - p.  It is
    dropped when s exceeds the bound; survivors get weight decay^s, scaled so
    the coefficients sum to 1.  An empty survivor list is a legitimate result;
    the caller decides what to publish then.
    """
    survivors = []
    for u in updates:
        s = current_round - u.round_produced
        if s > policy.staleness_bound:
            continue
        survivors.append((u, policy.staleness_decay ** s))
    total = sum(raw for _, raw in survivors)
    return [(u, raw / total) for u, raw in survivors]


def merge_intercluster(own: ModelWeights, foreign: ModelWeights, beta: float) -> ModelWeights:
    """Blend a foreign cluster's model into our own: (1-beta)*own + beta*foreign."""
    if (own.d, own.c) != (foreign.d, foreign.c):
        raise ShapeMismatch(
            f"own ({own.d},{own.c}) vs foreign ({foreign.d},{foreign.c})"
        )
    if not (0.0 <= beta <= 1.0):
        raise ValueError("beta must be in [0, 1]")
    if beta == 0.0:
        return own.copy()
    if beta == 1.0:
        return foreign.copy()
    # anchored form keeps merge(x, x, beta) == x bit-exact
    return ModelWeights(own.values + beta * (foreign.values - own.values), own.d, own.c)


def filter_penalized(updates: list[Update], bad_workers: set[str]) -> list[Update]:
    """Remove updates from workers flagged bad by the last settlement."""
    return [u for u in updates if u.worker not in bad_workers]
