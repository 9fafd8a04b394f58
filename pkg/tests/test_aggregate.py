import numpy as np
import pytest

from sdfl.aggregate import (
    AsyncPolicy,
    EmptyUpdateSet,
    SyncMode,
    Update,
    Weighting,
    apply_staleness,
    combine,
    fedavg,
    filter_penalized,
    merge_intercluster,
)
from sdfl.learner import ModelWeights, ShapeMismatch
from sdfl.seeds import substream


def mw(values, d=1, c=1):
    return ModelWeights(np.asarray(values, dtype=np.float64), d, c)


def random_updates(seed, count, d=3, c=2, round_=1):
    rng = substream(seed, "agg")
    return [
        Update(f"w{i:02d}", ModelWeights(rng.normal(size=(d + 1) * c), d, c), round_, 10)
        for i in range(count)
    ]


def test_identical_inputs_average_to_themselves_bit_exact():
    for seed in range(20):
        rng = substream(seed, "ident")
        w = ModelWeights(rng.normal(size=8), 3, 2)
        updates = [Update(f"w{i}", w.copy(), 1, 5 + i) for i in range(4)]
        for weighting in Weighting:
            out = fedavg(updates, weighting)
            assert np.array_equal(out.values, w.values)


def test_result_is_independent_of_update_order():
    updates = random_updates(3, 5)
    coefs = [0.1, 0.2, 0.3, 0.25, 0.15]
    base = combine(updates, coefs)
    perm = [3, 0, 4, 2, 1]
    out = combine([updates[i] for i in perm], [coefs[i] for i in perm])
    assert np.array_equal(base.values, out.values)
    assert np.array_equal(
        fedavg(updates).values, fedavg(list(reversed(updates))).values
    )


def test_opposite_vectors_average_to_zero():
    w = mw([1.5, -2.25], d=1, c=1)
    flipped = mw([-1.5, 2.25], d=1, c=1)
    out = fedavg([Update("a", w, 1, 10), Update("b", flipped, 1, 10)])
    assert np.all(out.values == 0.0)


def test_by_samples_weighting_oracle():
    # 1:3 sample split of (1,2) and (3,6) lands at (2.5, 5)
    u1 = Update("a", mw([1.0, 2.0]), 1, samples=1)
    u2 = Update("b", mw([3.0, 6.0]), 1, samples=3)
    out = fedavg([u1, u2], Weighting.BY_SAMPLES)
    assert np.array_equal(out.values, np.array([2.5, 5.0]))


def test_uniform_two_vector_oracle():
    u1 = Update("a", mw([0.0, 4.0]), 1, 10)
    u2 = Update("b", mw([2.0, 0.0]), 1, 10)
    out = fedavg([u1, u2])
    assert np.array_equal(out.values, np.array([1.0, 2.0]))


def test_output_stays_inside_componentwise_envelope():
    for seed in range(100):
        updates = random_updates(seed, count=int(substream(seed, "n").integers(1, 7)))
        out = fedavg(updates)
        stack = np.stack([u.weights.values for u in updates])
        assert np.all(out.values >= stack.min(axis=0))
        assert np.all(out.values <= stack.max(axis=0))


def test_combine_validates_inputs():
    with pytest.raises(EmptyUpdateSet):
        fedavg([])
    with pytest.raises(EmptyUpdateSet):
        combine([], [])
    updates = random_updates(1, 2)
    with pytest.raises(ValueError):
        combine(updates, [1.0])


def test_mismatched_shapes_rejected():
    u1 = Update("a", mw([1.0, 2.0], d=1, c=1), 1, 10)
    u2 = Update("b", mw([1.0, 2.0, 3.0], d=2, c=1), 1, 10)
    with pytest.raises(ShapeMismatch):
        fedavg([u1, u2])


def test_update_requires_samples():
    with pytest.raises(ValueError):
        Update("a", mw([1.0, 2.0]), 1, samples=0)


def test_staleness_fresh_updates_are_uniform():
    updates = random_updates(5, 3, round_=4)
    pairs = apply_staleness(updates, current_round=4, policy=AsyncPolicy())
    assert [c for _, c in pairs] == [1.0 / 3] * 3


def test_staleness_decay_and_renormalization():
    fresh = Update("a", mw([1.0, 0.0]), round_produced=3, samples=10)
    stale = Update("b", mw([0.0, 1.0]), round_produced=2, samples=10)
    policy = AsyncPolicy(mode=SyncMode.ASYNC, staleness_bound=2, staleness_decay=0.5)
    pairs = apply_staleness([fresh, stale], current_round=3, policy=policy)
    coefs = {u.worker: c for u, c in pairs}
    assert abs(coefs["a"] - 2.0 / 3.0) < 1e-15
    assert abs(coefs["b"] - 1.0 / 3.0) < 1e-15
    assert abs(sum(coefs.values()) - 1.0) < 1e-12


def test_staleness_bound_drops_old_updates():
    old = Update("a", mw([1.0, 0.0]), round_produced=1, samples=10)
    new = Update("b", mw([0.0, 1.0]), round_produced=4, samples=10)
    policy = AsyncPolicy(mode=SyncMode.ASYNC, staleness_bound=1)
    pairs = apply_staleness([old, new], current_round=4, policy=policy)
    assert [u.worker for u, _ in pairs] == ["b"]
    assert pairs[0][1] == 1.0
    assert apply_staleness([old], current_round=4, policy=policy) == []


def test_staleness_zero_bound_keeps_only_current_round():
    updates = [
        Update("a", mw([1.0, 0.0]), round_produced=2, samples=10),
        Update("b", mw([0.0, 1.0]), round_produced=3, samples=10),
    ]
    policy = AsyncPolicy(mode=SyncMode.ASYNC, staleness_bound=0)
    pairs = apply_staleness(updates, current_round=3, policy=policy)
    assert [u.worker for u, _ in pairs] == ["b"]


def test_combine_with_staleness_coefficients_matches_manual_mean():
    fresh = Update("a", mw([1.0, 0.0]), round_produced=3, samples=10)
    stale = Update("b", mw([0.0, 1.0]), round_produced=2, samples=10)
    policy = AsyncPolicy(mode=SyncMode.ASYNC, staleness_bound=2, staleness_decay=0.5)
    pairs = apply_staleness([fresh, stale], current_round=3, policy=policy)
    out = combine([u for u, _ in pairs], [c for _, c in pairs])
    assert np.allclose(out.values, [2.0 / 3.0, 1.0 / 3.0], rtol=0, atol=1e-15)


def test_merge_beta_endpoints_are_exact_copies():
    own = mw([1.0, 2.0])
    foreign = mw([5.0, -1.0])
    kept = merge_intercluster(own, foreign, 0.0)
    assert kept == own and kept is not own
    taken = merge_intercluster(own, foreign, 1.0)
    assert taken == foreign and taken is not foreign


def test_merge_with_itself_is_identity():
    for seed in range(10):
        w = ModelWeights(substream(seed, "merge").normal(size=6), 2, 2)
        for beta in (0.0, 0.25, 0.5, 0.9, 1.0):
            assert merge_intercluster(w, w.copy(), beta) == w


def test_merge_interpolates():
    own = mw([0.0, 10.0])
    foreign = mw([4.0, 2.0])
    out = merge_intercluster(own, foreign, 0.25)
    assert np.array_equal(out.values, np.array([1.0, 8.0]))


def test_merge_validation():
    own = mw([0.0, 1.0])
    with pytest.raises(ShapeMismatch):
        merge_intercluster(own, mw([0.0, 1.0, 2.0], d=2, c=1), 0.5)
    with pytest.raises(ValueError):
        merge_intercluster(own, mw([1.0, 2.0]), 1.5)


def test_filter_penalized():
    updates = random_updates(8, 4)
    assert filter_penalized(updates, set()) == updates
    kept = filter_penalized(updates, {"w01", "w03"})
    assert [u.worker for u in kept] == ["w00", "w02"]
    assert filter_penalized(updates, {u.worker for u in updates}) == []
    # filtering then averaging is the same as averaging the honest subset
    honest = [u for u in updates if u.worker != "w02"]
    assert np.array_equal(
        fedavg(filter_penalized(updates, {"w02"})).values, fedavg(honest).values
    )


def test_async_policy_validation():
    with pytest.raises(ValueError):
        AsyncPolicy(staleness_bound=-1)
    with pytest.raises(ValueError):
        AsyncPolicy(staleness_decay=0.0)
    with pytest.raises(ValueError):
        AsyncPolicy(staleness_decay=1.5)
    with pytest.raises(ValueError):
        AsyncPolicy(collection_window=0.0)
