"""Discrete-event simulator for the full collaborative-training protocol.

One engine run executes a configured number of rounds.  Each round: heads
rotate, live workers train locally and send weights to their cluster head
over a latency/jitter/drop network model, heads aggregate (synchronously
with a collection window, or asynchronously with staleness decay), publish
the aggregate to the content store and broadcast its address, scores are
submitted to the token contract, and the round settles.  When blockchain
mode is on, every contract transaction costs ledger_tx_latency seconds of
serialized simulated time; nothing else changes, which is what makes
accuracy series comparable across the toggle.

Determinism: the only randomness is drawn from substreams keyed by
(master_seed, purpose, round, participant), never by simulated time, so two
runs with the same config are bit-identical, and a config change that only
shifts the timeline (e.g. the blockchain toggle) cannot perturb training.

Internal queue entries whose kind starts with "_" are scheduling machinery;
only the public EventKind values appear in the exported event log.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .aggregate import (
    AsyncPolicy,
    SyncMode,
    Update,
    Weighting,
    apply_staleness,
    combine,
    fedavg,
    filter_penalized,
    merge_intercluster,
)
from .clustering import ClusterAssignment, WorkerProfile, form_clusters, select_head
from .ledger import ContractParams, TrustContract
from .learner import (
    ModelWeights,
    OptimizerConfig,
    corrupt,
    evaluate,
    generate_data,
    init_model,
    loss_and_gradient,
    train_local,
)
from .seeds import derive_seed, substream
from .store import BlobStore, content_address

HEAD_EVALUATED = "head_evaluated"
SELF_REPORTED = "self_reported"
SCORE_MODES = (HEAD_EVALUATED, SELF_REPORTED)


class EngineError(Exception):
    pass


class QueueEmpty(EngineError):
    pass


class InvalidWindow(EngineError):
    pass


class InvariantViolation(EngineError):
    """A runtime consistency check failed; the run cannot be trusted."""


class EventKind(str, Enum):
    ENROLL = "Enroll"
    CLUSTER_FORMED = "ClusterFormed"
    TRAIN_COMPLETE = "TrainComplete"
    UPDATE_ARRIVED = "UpdateArrived"
    AGGREGATE_PUBLISHED = "AggregatePublished"
    SCORE_SUBMITTED = "ScoreSubmitted"
    ROUND_SETTLED = "RoundSettled"
    NODE_CRASH = "NodeCrash"
    NODE_RECOVER = "NodeRecover"
    INTER_CLUSTER_PULL = "InterClusterPull"


@dataclass
class Event:
    time: float
    seq: int
    kind: str
    payload: dict

    def to_json_dict(self) -> dict:
        return {"time": self.time, "seq": self.seq, "kind": self.kind, "payload": self.payload}


@dataclass(frozen=True)
class NetworkModel:
    base_latency: float = 0.05
    jitter: float = 0.01            # uniform [0, jitter) added per message
    drop_prob: float = 0.0          # applies to worker -> head update sends
    ledger_tx_latency: float = 0.5  # per-transaction cost in blockchain mode

    def __post_init__(self):
        if self.base_latency < 0 or self.jitter < 0 or self.ledger_tx_latency < 0:
            raise ValueError("latencies must be >= 0")
        if not (0.0 <= self.drop_prob <= 1.0):
            raise ValueError("drop_prob must be in [0, 1]")


@dataclass(frozen=True)
class FailureSpec:
    """Round-aligned crash window: dead from the start of crash_round until
    the start of recover_round."""

    worker: str
    crash_round: int
    recover_round: int

    def __post_init__(self):
        if self.crash_round < 1 or self.recover_round <= self.crash_round:
            raise ValueError("need 1 <= crash_round < recover_round")


@dataclass(frozen=True)
class DataParams:
    samples_per_worker: int = 160
    features: int = 6
    classes: int = 3
    noniid_skew: float = 0.3
    validation_samples: int = 240
    center_spread: float = 2.0
    cluster_std: float = 1.0


@dataclass
class ScenarioConfig:
    workers: list[WorkerProfile]
    num_clusters: int
    rounds: int
    epochs_per_round: int
    optimizer: OptimizerConfig
    contract: ContractParams
    async_policy: AsyncPolicy
    network: NetworkModel
    data: DataParams
    master_seed: int = 0
    rotation_period: int = 1
    blockchain_enabled: bool = True
    score_mode: str = HEAD_EVALUATED
    intercluster_pull_prob: float = 0.0
    intercluster_beta: float = 0.5
    head_trains: bool = True
    weighting: Weighting = Weighting.UNIFORM
    cost_per_sample: float = 0.001
    failures: list[FailureSpec] = field(default_factory=list)
    worker_balance: int | None = None     # default: rounds * fixed_deposit
    requester_balance: int | None = None  # default: rounds * reward_pool

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.rotation_period < 1:
            raise ValueError("rotation_period must be >= 1")
        if self.epochs_per_round != self.optimizer.epochs:
            raise ValueError("optimizer.epochs must equal epochs_per_round")
        if self.score_mode not in SCORE_MODES:
            raise ValueError(f"score_mode must be one of {SCORE_MODES}")
        if not (0.0 <= self.intercluster_pull_prob <= 1.0):
            raise ValueError("intercluster_pull_prob must be in [0, 1]")
        if not (0.0 <= self.intercluster_beta <= 1.0):
            raise ValueError("intercluster_beta must be in [0, 1]")
        if self.cost_per_sample < 0:
            raise ValueError("cost_per_sample must be >= 0")
        ids = [w.id for w in self.workers]
        if len(set(ids)) != len(ids):
            raise ValueError("worker ids must be unique")
        if self.contract.requester_id in ids:
            raise ValueError("a worker id collides with the requester account")
        known = set(ids)
        for f in self.failures:
            if f.worker not in known:
                raise ValueError(f"failure schedule names unknown worker {f.worker!r}")

    def default_worker_balance(self) -> int:
        return self.rounds * self.contract.fixed_deposit

    def default_requester_balance(self) -> int:
        return self.rounds * self.contract.reward_pool


@dataclass
class MetricsRow:
    round: int
    worker: str
    cluster: int
    is_head: int
    accuracy: float
    loss: float


@dataclass
class RoundSummary:
    round: int
    mean_accuracy: float
    std_accuracy: float
    cluster_accuracy: dict
    completion_time: float
    settlement: dict


@dataclass
class MetricsReport:
    rows: list[MetricsRow]
    round_summaries: list[RoundSummary]
    total_time: float
    token_flows: dict
    events: list[Event]
    addresses: list[str]

    def final_round(self) -> int:
        return max(r.round for r in self.rows)

    def round_rows(self, round_: int) -> list[MetricsRow]:
        return [r for r in self.rows if r.round == round_]


class Engine:
    """Mutable simulation state plus the event dispatch loop."""

    def __init__(self, config: ScenarioConfig, store: BlobStore | None = None):
        self.cfg = config
        self.now = 0.0
        self._seq = 0
        self._queue: list = []
        self.events: list[Event] = []
        self.store = store if store is not None else BlobStore()

        self.profiles = {w.id: w for w in config.workers}
        self.worker_ids = sorted(self.profiles)
        self.datasets_list, self.validation = generate_data(
            len(self.worker_ids),
            config.data.samples_per_worker,
            config.data.features,
            config.data.classes,
            config.data.noniid_skew,
            config.master_seed,
            validation_samples=config.data.validation_samples,
            center_spread=config.data.center_spread,
            cluster_std=config.data.cluster_std,
        )
        self.datasets = dict(zip(self.worker_ids, self.datasets_list))

        worker_balance = (
            config.worker_balance
            if config.worker_balance is not None
            else config.default_worker_balance()
        )
        requester_balance = (
            config.requester_balance
            if config.requester_balance is not None
            else config.default_requester_balance()
        )
        self.contract = TrustContract(config.contract, requester_balance)
        for w in self.worker_ids:
            self.contract.join_worker(w, worker_balance)
            self._log(EventKind.ENROLL, {"worker": w, "balance": worker_balance})
        self.initial_total = self.contract.total_tokens()

        self._cluster_seed = derive_seed(config.master_seed, "clusters")
        self.assignment = form_clusters(
            config.workers, config.num_clusters, self._cluster_seed
        )
        self._log(EventKind.CLUSTER_FORMED, self.assignment.to_json_dict())
        self.cluster_of = {
            w: cl for cl, members in self.assignment.clusters.items() for w in members
        }

        base = init_model(config.data.features, config.data.classes, config.master_seed)
        self.worker_models = {w: base for w in self.worker_ids}
        self.cluster_models = {cl: base for cl in self.assignment.clusters}

        self.mailbox: dict[int, list[Update]] = {cl: [] for cl in self.assignment.clusters}
        self.published: set[tuple[int, int]] = set()
        self.expected: dict[tuple[int, int], int] = {}
        self.pending_bcasts: dict[int, int] = {}
        self.published_count: dict[int, int] = {}
        self.scoring_started: set[int] = set()
        self.last_publish_seq: dict[int, int] = {}
        self.round_start_time: dict[int, float] = {}
        self.prev_bad: set[str] = set()
        self.eval_weights: dict[int, dict[str, ModelWeights]] = {}
        self.self_scores: dict[tuple[int, str], float] = {}
        self.crash_open: dict[str, float] = {}
        self.crash_windows: dict[str, list[tuple[float, float]]] = {
            w: [] for w in self.worker_ids
        }
        self.dropped_out: set[str] = set()
        self.busy_until: dict[str, float] = {w: 0.0 for w in self.worker_ids}
        self.rows: list[MetricsRow] = []
        self.summaries: dict[int, RoundSummary] = {}
        self.addresses: list[str] = []

        for f in config.failures:
            if f.crash_round == 1:
                self._push(0.0, "_crash", {"worker": f.worker})
        self._push(0.0, "_round_start", {"round": 1})

    # -- plumbing --------------------------------------------------------

    def _next_seq(self) -> int:
        self._seq += 1
        return self._seq

    def _push(self, time: float, kind: str, payload: dict) -> None:
        if time < self.now:
            raise InvariantViolation(f"scheduling into the past: {time} < {self.now}")
        heapq.heappush(self._queue, (time, self._next_seq(), kind, payload))

    def _log(self, kind: EventKind, payload: dict) -> Event:
        ev = Event(self.now, self._next_seq(), kind.value, payload)
        self.events.append(ev)
        return ev

    def _check_tokens(self) -> None:
        if self.contract.total_tokens() != self.initial_total:
            raise InvariantViolation(
                f"token total drifted: {self.contract.total_tokens()} != {self.initial_total}"
            )

    # -- liveness --------------------------------------------------------

    def is_alive(self, worker: str, t: float | None = None) -> bool:
        t = self.now if t is None else t
        if worker in self.dropped_out:
            return False
        start = self.crash_open.get(worker)
        if start is not None and t >= start:
            return False
        return not any(a <= t < b for a, b in self.crash_windows[worker])

    def crashed_during(self, worker: str, t0: float, t1: float) -> bool:
        """True if any crash window overlaps the closed interval [t0, t1]."""
        if worker in self.dropped_out:
            return True
        start = self.crash_open.get(worker)
        if start is not None and start <= t1:
            return True
        return any(a <= t1 and b > t0 for a, b in self.crash_windows[worker])

    def inject_failure(self, worker: str, crash_time: float, recover_time: float) -> None:
        if recover_time <= crash_time:
            raise InvalidWindow(f"recover {recover_time} <= crash {crash_time}")
        if worker not in self.profiles:
            raise InvalidWindow(f"unknown worker {worker!r}")
        self._push(crash_time, "_crash", {"worker": worker})
        self._push(recover_time, "_recover", {"worker": worker})

    # -- event loop ------------------------------------------------------

    def step(self) -> "Engine":
        """Process exactly one queued entry, advancing simulated time."""
        if not self._queue:
            raise QueueEmpty("no events pending")
        time, _, kind, payload = heapq.heappop(self._queue)
        if time < self.now:
            raise InvariantViolation("time went backwards")
        self.now = time
        getattr(self, "_on" + kind)(payload)
        return self

    def run(self) -> MetricsReport:
        while self._queue:
            self.step()
        return self._report()

    # -- handlers --------------------------------------------------------

    def _on_crash(self, p: dict) -> None:
        w = p["worker"]
        if w in self.crash_open:
            return
        self.crash_open[w] = self.now
        self._log(EventKind.NODE_CRASH, {"worker": w})

    def _on_recover(self, p: dict) -> None:
        w = p["worker"]
        start = self.crash_open.pop(w, None)
        if start is None:
            return
        self.crash_windows[w].append((start, self.now))
        self._log(EventKind.NODE_RECOVER, {"worker": w})

    def _on_round_start(self, p: dict) -> None:
        r = p["round"]
        self.round_start_time[r] = self.now

        if r > 1:
            dropped = self.contract.open_round(r)
            self._check_tokens()
            if dropped:
                for w in dropped:
                    self.dropped_out.add(w)
                    cl = self.cluster_of[w]
                    self.assignment.clusters[cl].remove(w)
                    if not self.assignment.clusters[cl]:
                        del self.assignment.clusters[cl]
                        del self.assignment.heads[cl]
                self.assignment.round_formed = r
                self._log(EventKind.CLUSTER_FORMED, self.assignment.to_json_dict())

        for cl in sorted(self.assignment.clusters):
            head = select_head(
                self.assignment, cl, r, self.cfg.rotation_period, self._cluster_seed
            )
            self.assignment.heads[cl] = head

        self.pending_bcasts[r] = 0
        self.published_count[r] = 0
        self.eval_weights[r] = {}

        for cl in sorted(self.assignment.clusters):
            self.expected[(cl, r)] = 0
            head = self.assignment.heads[cl]
            for w in self.assignment.clusters[cl]:
                if not self.is_alive(w):
                    continue
                if w == head and not self.cfg.head_trains:
                    continue
                dur = (
                    self.profiles[w].speed_factor
                    * self.cfg.epochs_per_round
                    * len(self.datasets[w])
                    * self.cfg.cost_per_sample
                )
                start = max(self.now, self.busy_until[w])
                done = start + dur
                self.busy_until[w] = done
                self.expected[(cl, r)] += 1
                self._push(
                    done,
                    "_train_done",
                    {
                        "worker": w,
                        "round": r,
                        "cluster": cl,
                        "is_head": w == head,
                        "base": self.worker_models[w],
                    },
                )
            window_end = self.now + self.cfg.async_policy.collection_window
            if self.cfg.async_policy.mode is SyncMode.ASYNC:
                self._push(window_end, "_window_close", {"cluster": cl, "round": r})
            else:
                self._push(window_end, "_deadline", {"cluster": cl, "round": r})

    def _on_train_done(self, p: dict) -> None:
        w, r, cl = p["worker"], p["round"], p["cluster"]
        if self.crashed_during(w, self.round_start_time[r], self.now):
            self._forfeit(cl, r)
            return
        seed = self.cfg.master_seed
        trained = train_local(
            p["base"], self.datasets[w], self.cfg.optimizer, derive_seed(seed, "train", r, w)
        )
        profile = self.profiles[w]
        if profile.honesty == "honest":
            sent = trained
        else:
            sent = corrupt(
                trained,
                profile.honesty,
                derive_seed(seed, "corrupt", r, w),
                profile.corruption_sigma,
            )
        accuracy = evaluate(sent, self.validation)
        loss, _ = loss_and_gradient(sent, self.validation)
        self.rows.append(MetricsRow(r, w, cl, int(p["is_head"]), accuracy, loss))
        self._log(
            EventKind.TRAIN_COMPLETE,
            {
                "round": r,
                "worker": w,
                "cluster": cl,
                "is_head": int(p["is_head"]),
                "accuracy": accuracy,
                "loss": loss,
            },
        )
        if self.cfg.score_mode == SELF_REPORTED:
            if profile.honesty == "honest":
                self.self_scores[(r, w)] = evaluate(trained, self.datasets[w])
            else:
                self.self_scores[(r, w)] = 100.0

        net = self.cfg.network
        if substream(seed, "drop", r, w).random() < net.drop_prob:
            self._forfeit(cl, r)
            return
        arrival = self.now + net.base_latency + substream(seed, "jitter", r, w).uniform(
            0.0, net.jitter
        )
        self._push(
            arrival,
            "_update_arrive",
            {
                "worker": w,
                "round": r,
                "cluster": cl,
                "weights": sent,
                "samples": len(self.datasets[w]),
            },
        )

    def _forfeit(self, cl: int, r: int) -> None:
        """An expected update will never arrive; fire early if it was the last."""
        self.expected[(cl, r)] -= 1
        self._maybe_early(cl, r)

    def _maybe_early(self, cl: int, r: int) -> None:
        if (
            self.cfg.async_policy.mode is SyncMode.SYNCHRONOUS
            and self.expected.get((cl, r), 1) == 0
            and (cl, r) not in self.published
        ):
            self._aggregate(cl, r)

    def _on_update_arrive(self, p: dict) -> None:
        w, r, cl = p["worker"], p["round"], p["cluster"]
        self._log(EventKind.UPDATE_ARRIVED, {"round": r, "worker": w, "cluster": cl})
        sync = self.cfg.async_policy.mode is SyncMode.SYNCHRONOUS
        if sync and (cl, r) in self.published:
            # straggler missed the cut; sync rounds never reuse old updates
            self.expected[(cl, r)] -= 1
            return
        self.mailbox[cl].append(
            Update(w, p["weights"], r, p["samples"], arrival_time=self.now)
        )
        self.expected[(cl, r)] -= 1
        self._maybe_early(cl, r)

    def _on_deadline(self, p: dict) -> None:
        cl, r = p["cluster"], p["round"]
        if (cl, r) not in self.published:
            self._aggregate(cl, r)

    def _on_window_close(self, p: dict) -> None:
        self._aggregate(p["cluster"], p["round"])

    def _aggregate(self, cl: int, r: int) -> None:
        policy = self.cfg.async_policy
        sync = policy.mode is SyncMode.SYNCHRONOUS
        if sync:
            considered = [u for u in self.mailbox[cl] if u.round_produced == r]
        else:
            considered = [
                u
                for u in self.mailbox[cl]
                if r - u.round_produced <= policy.staleness_bound
            ]
        self.mailbox[cl] = []

        for u in considered:
            self.eval_weights[r][u.worker] = u.weights

        members = self.assignment.clusters[cl]
        head = self.assignment.heads[cl]
        aggregator = head if self.is_alive(head) else None
        if aggregator is None:
            for m in members:
                if self.is_alive(m):
                    aggregator = m
                    break

        honest = filter_penalized(considered, self.prev_bad)
        model = None
        if aggregator is not None and honest:
            if sync:
                model = fedavg(honest, self.cfg.weighting)
            else:
                pairs = apply_staleness(honest, r, policy)
                if pairs:
                    model = combine([u for u, _ in pairs], [c for _, c in pairs])
        if model is None:
            model = self.cluster_models[cl]

        if aggregator is not None and self.cfg.intercluster_pull_prob > 0:
            draw = substream(self.cfg.master_seed, "pull", r, cl).random()
            if draw < self.cfg.intercluster_pull_prob:
                source = self._freshest_foreign(cl)
                if source is not None:
                    self._log(
                        EventKind.INTER_CLUSTER_PULL,
                        {"round": r, "cluster": cl, "source": source},
                    )
                    model = merge_intercluster(
                        model, self.cluster_models[source], self.cfg.intercluster_beta
                    )

        if aggregator is not None and self.profiles[aggregator].honesty != "honest":
            # a dishonest head taints the whole cluster model on purpose
            model = corrupt(
                model,
                self.profiles[aggregator].honesty,
                derive_seed(self.cfg.master_seed, "head_corrupt", r, cl),
                self.profiles[aggregator].corruption_sigma,
            )

        addr = self.store.put(model.to_bytes())
        self.cluster_models[cl] = model
        self.published.add((cl, r))
        self.addresses.append(addr)
        ev = self._log(
            EventKind.AGGREGATE_PUBLISHED,
            {"round": r, "cluster": cl, "aggregator": aggregator, "address": addr},
        )
        self.last_publish_seq[cl] = ev.seq

        net = self.cfg.network
        for m in members:
            if m == aggregator:
                self.worker_models[m] = model
                continue
            arrival = self.now + net.base_latency + substream(
                self.cfg.master_seed, "bcast", r, m
            ).uniform(0.0, net.jitter)
            self.pending_bcasts[r] += 1
            self._push(
                arrival,
                "_bcast_arrive",
                {"worker": m, "round": r, "address": addr},
            )

        self.published_count[r] += 1
        self._check_barrier(r)

    def _freshest_foreign(self, cl: int) -> int | None:
        """The other cluster with the most recently published aggregate."""
        best = None
        for other, seq in self.last_publish_seq.items():
            if other == cl or other not in self.assignment.clusters:
                continue
            if best is None or seq > self.last_publish_seq[best] or (
                seq == self.last_publish_seq[best] and other < best
            ):
                best = other
        return best

    def _on_bcast_arrive(self, p: dict) -> None:
        w, r, addr = p["worker"], p["round"], p["address"]
        if self.is_alive(w):
            blob = self.store.get(addr)
            if content_address(blob) != addr:
                raise InvariantViolation(f"store returned wrong bytes for {addr}")
            self.worker_models[w] = ModelWeights.from_bytes(blob)
        self.pending_bcasts[r] -= 1
        self._check_barrier(r)

    def _check_barrier(self, r: int) -> None:
        if r in self.scoring_started:
            return
        if self.published_count[r] < len(self.assignment.clusters):
            return
        if self.pending_bcasts[r] > 0:
            return
        self.scoring_started.add(r)
        self._schedule_scoring(r)

    def _schedule_scoring(self, r: int) -> None:
        scores = []
        for w in sorted(self.contract.enrolled):
            if self.cfg.score_mode == HEAD_EVALUATED:
                weights = self.eval_weights[r].get(w)
                s = evaluate(weights, self.validation) if weights is not None else 0.0
            else:
                s = self.self_scores.get((r, w), 0.0)
            scores.append((w, s))
        tx = self.cfg.network.ledger_tx_latency if self.cfg.blockchain_enabled else 0.0
        for i, (w, s) in enumerate(scores):
            self._push(
                self.now + (i + 1) * tx,
                "_submit_score",
                {"round": r, "worker": w, "score": s},
            )
        self._push(self.now + (len(scores) + 1) * tx, "_settle", {"round": r})

    def _on_submit_score(self, p: dict) -> None:
        self.contract.submit_score(p["round"], p["worker"], p["score"])
        self._check_tokens()
        self._log(
            EventKind.SCORE_SUBMITTED,
            {"round": p["round"], "worker": p["worker"], "score": p["score"]},
        )

    def _on_settle(self, p: dict) -> None:
        r = p["round"]
        report = self.contract.settle_round(r)
        self._check_tokens()
        self._log(EventKind.ROUND_SETTLED, {"round": r, "report": report.to_json_dict()})
        self.prev_bad = set(report.bad_workers)

        round_rows = [row for row in self.rows if row.round == r]
        accs = [row.accuracy for row in round_rows]
        self.summaries[r] = RoundSummary(
            round=r,
            mean_accuracy=float(np.mean(accs)) if accs else 0.0,
            std_accuracy=float(np.std(accs)) if accs else 0.0,
            cluster_accuracy={
                str(cl): evaluate(self.cluster_models[cl], self.validation)
                for cl in sorted(self.assignment.clusters)
            },
            completion_time=self.now,
            settlement=report.to_json_dict(),
        )

        if r < self.cfg.rounds:
            for f in self.cfg.failures:
                if f.crash_round == r + 1:
                    self._push(self.now, "_crash", {"worker": f.worker})
                if f.recover_round == r + 1:
                    self._push(self.now, "_recover", {"worker": f.worker})
            self._push(self.now, "_round_start", {"round": r + 1})

    # -- reporting -------------------------------------------------------

    def _report(self) -> MetricsReport:
        flows = {
            "requester_balance": self.contract.balances[self.cfg.contract.requester_id],
            "worker_balances": {
                w: self.contract.balances.get(w, 0) for w in self.worker_ids
            },
            "total_penalties": sum(
                sum(s.settlement["penalties"].values()) for s in self.summaries.values()
            ),
            "total_rewards": sum(
                sum(s.settlement["rewards"].values()) for s in self.summaries.values()
            ),
            "requester_credit": sum(
                s.settlement["requester_credit"] for s in self.summaries.values()
            ),
            "initial_total": self.initial_total,
            "final_total": self.contract.total_tokens(),
        }
        summaries = [self.summaries[r] for r in sorted(self.summaries)]
        total_time = summaries[-1].completion_time if summaries else self.now
        return MetricsReport(
            rows=self.rows,
            round_summaries=summaries,
            total_time=total_time,
            token_flows=flows,
            events=self.events,
            addresses=self.addresses,
        )


def run_scenario(config: ScenarioConfig, store: BlobStore | None = None) -> MetricsReport:
    """Execute a full scenario; pure function of the config."""
    return Engine(config, store).run()
