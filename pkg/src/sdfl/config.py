"""Strict JSON scenario configuration.

Unknown keys are rejected rather than ignored: a typo that silently fell
back to a default would invalidate any reproducibility claim made about a
run.  Every error message carries the dotted path of the offending field,
e.g. "contract.penalty_pct: must be <= 100".

The "workers" entry is either an integer (profiles are then generated with
seeded locations on a 10x10 field, all honest, unit speed) or an explicit
list of profile objects.  A separate "corruption" list can then mark some
of them dishonest, and "failures" schedules round-aligned crash windows.
"""

from __future__ import annotations

import json

from .aggregate import AsyncPolicy, SyncMode, Weighting
from .clustering import HONEST, WorkerProfile
from .engine import (
    DataParams,
    FailureSpec,
    NetworkModel,
    ScenarioConfig,
    SCORE_MODES,
    HEAD_EVALUATED,
)
from .learner import CORRUPTION_MODES, OptimizerConfig
from .ledger import ContractParams
from .seeds import substream

_MISSING = object()


class ConfigError(Exception):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class _Node:
    """One JSON object being consumed key by key; leftovers are errors."""

    def __init__(self, raw, path: str):
        if not isinstance(raw, dict):
            raise ConfigError(path, f"expected an object, got {type(raw).__name__}")
        self.raw = dict(raw)
        self.path = path

    def _sub(self, key: str) -> str:
        return f"{self.path}.{key}" if self.path else key

    def take(self, key: str, default=_MISSING):
        if key in self.raw:
            return self.raw.pop(key)
        if default is _MISSING:
            raise ConfigError(self._sub(key), "required field is missing")
        return default

    def int_(self, key: str, default=_MISSING, minimum=None, maximum=None) -> int:
        v = self.take(key, default)
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(self._sub(key), f"expected an integer, got {v!r}")
        self._bounds(key, v, minimum, maximum)
        return v

    def float_(self, key: str, default=_MISSING, minimum=None, maximum=None) -> float:
        v = self.take(key, default)
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(self._sub(key), f"expected a number, got {v!r}")
        v = float(v)
        self._bounds(key, v, minimum, maximum)
        return v

    def bool_(self, key: str, default=_MISSING) -> bool:
        v = self.take(key, default)
        if not isinstance(v, bool):
            raise ConfigError(self._sub(key), f"expected true or false, got {v!r}")
        return v

    def str_(self, key: str, default=_MISSING, choices=None) -> str:
        v = self.take(key, default)
        if not isinstance(v, str):
            raise ConfigError(self._sub(key), f"expected a string, got {v!r}")
        if choices is not None and v not in choices:
            raise ConfigError(
                self._sub(key), f"must be one of {', '.join(choices)}; got {v!r}"
            )
        return v

    def node(self, key: str) -> "_Node":
        return _Node(self.take(key, {}), self._sub(key))

    def list_(self, key: str, default=_MISSING) -> list:
        v = self.take(key, default)
        if not isinstance(v, list):
            raise ConfigError(self._sub(key), f"expected a list, got {type(v).__name__}")
        return v

    def _bounds(self, key, v, minimum, maximum) -> None:
        if minimum is not None and v < minimum:
            raise ConfigError(self._sub(key), f"must be >= {minimum}, got {v}")
        if maximum is not None and v > maximum:
            raise ConfigError(self._sub(key), f"must be <= {maximum}, got {v}")

    def finish(self) -> None:
        if self.raw:
            key = sorted(self.raw)[0]
            raise ConfigError(self._sub(key), "unknown key")


def _build(cls, node_path: str, **kwargs):
    """Construct a validated dataclass, re-pathing its ValueErrors."""
    try:
        return cls(**kwargs)
    except ValueError as e:
        raise ConfigError(node_path, str(e)) from e


def _location(raw, path: str) -> tuple[float, float]:
    if (
        not isinstance(raw, list)
        or len(raw) != 2
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw)
    ):
        raise ConfigError(path, f"expected [x, y] coordinates, got {raw!r}")
    return (float(raw[0]), float(raw[1]))


def _worker_profiles(top: _Node, master_seed: int) -> list[WorkerProfile]:
    raw = top.take("workers")
    if isinstance(raw, bool):
        raise ConfigError("workers", "expected a count or a list of profiles")
    if isinstance(raw, int):
        if raw < 1:
            raise ConfigError("workers", f"must be >= 1, got {raw}")
        rng = substream(master_seed, "layout")
        coords = rng.uniform(0.0, 10.0, size=(raw, 2))
        return [
            WorkerProfile(f"w{i:02d}", (float(coords[i, 0]), float(coords[i, 1])))
            for i in range(raw)
        ]
    if isinstance(raw, list):
        profiles = []
        for i, entry in enumerate(raw):
            node = _Node(entry, f"workers[{i}]")
            wid = node.str_("id")
            loc = _location(node.take("location"), f"workers[{i}].location")
            honesty = node.str_("honesty", HONEST, choices=(HONEST,) + CORRUPTION_MODES)
            sigma = node.float_("corruption_sigma", 1.0, minimum=0.0)
            speed = node.float_("speed_factor", 1.0)
            node.finish()
            profiles.append(
                _build(
                    WorkerProfile,
                    f"workers[{i}]",
                    id=wid,
                    location=loc,
                    honesty=honesty,
                    corruption_sigma=sigma,
                    speed_factor=speed,
                )
            )
        return profiles
    raise ConfigError("workers", "expected a count or a list of profiles")


def _apply_corruption(top: _Node, profiles: list[WorkerProfile]) -> None:
    by_id = {p.id: p for p in profiles}
    for i, entry in enumerate(top.list_("corruption", [])):
        node = _Node(entry, f"corruption[{i}]")
        wid = node.str_("worker")
        mode = node.str_("mode", choices=CORRUPTION_MODES)
        sigma = node.float_("sigma", 1.0, minimum=0.0)
        node.finish()
        if wid not in by_id:
            raise ConfigError(f"corruption[{i}].worker", f"unknown worker {wid!r}")
        by_id[wid].honesty = mode
        by_id[wid].corruption_sigma = sigma


def _failures(top: _Node, profiles: list[WorkerProfile]) -> list[FailureSpec]:
    known = {p.id for p in profiles}
    specs = []
    for i, entry in enumerate(top.list_("failures", [])):
        node = _Node(entry, f"failures[{i}]")
        wid = node.str_("worker")
        crash = node.int_("crash_round", minimum=1)
        recover = node.int_("recover_round", minimum=2)
        node.finish()
        if wid not in known:
            raise ConfigError(f"failures[{i}].worker", f"unknown worker {wid!r}")
        specs.append(
            _build(
                FailureSpec,
                f"failures[{i}]",
                worker=wid,
                crash_round=crash,
                recover_round=recover,
            )
        )
    return specs


def parse_config(raw: dict, seed_override: int | None = None) -> ScenarioConfig:
    top = _Node(raw, "")
    master_seed = top.int_("master_seed", 0, minimum=0)
    if seed_override is not None:
        master_seed = seed_override

    profiles = _worker_profiles(top, master_seed)
    _apply_corruption(top, profiles)
    failures = _failures(top, profiles)

    num_clusters = top.int_("num_clusters", minimum=1)
    if num_clusters > len(profiles):
        raise ConfigError(
            "num_clusters", f"cannot exceed worker count {len(profiles)}"
        )
    rounds = top.int_("rounds", minimum=1)
    epochs = top.int_("epochs_per_round", minimum=1)
    rotation_period = top.int_("rotation_period", 1, minimum=1)

    opt_node = top.node("optimizer")
    optimizer = _build(
        OptimizerConfig,
        "optimizer",
        learning_rate=opt_node.float_("learning_rate", 0.01, minimum=0.0),
        momentum=opt_node.float_("momentum", 0.5),
        dampening=opt_node.float_("dampening", 0.0),
        weight_decay=opt_node.float_("weight_decay", 0.0),
        nesterov=opt_node.bool_("nesterov", False),
        epochs=epochs,
        batch_size=opt_node.int_("batch_size", 32, minimum=1),
    )
    opt_node.finish()

    con_node = top.node("contract")
    contract = _build(
        ContractParams,
        "contract",
        fixed_deposit=con_node.int_("fixed_deposit", minimum=0),
        score_threshold=con_node.float_("score_threshold", minimum=0.0, maximum=100.0),
        penalty_pct=con_node.int_("penalty_pct", minimum=0, maximum=100),
        top_k=con_node.int_("top_k", minimum=1),
        reward_pool=con_node.int_("reward_pool", minimum=0),
        requester_id=con_node.str_("requester_id", "requester"),
    )
    con_node.finish()

    pol_node = top.node("async_policy")
    policy = _build(
        AsyncPolicy,
        "async_policy",
        mode=SyncMode(pol_node.str_("mode", "sync", choices=("sync", "async"))),
        staleness_bound=pol_node.int_("staleness_bound", 1, minimum=0),
        staleness_decay=pol_node.float_("staleness_decay", 0.5),
        collection_window=pol_node.float_("collection_window", 30.0),
    )
    pol_node.finish()

    net_node = top.node("network")
    network = _build(
        NetworkModel,
        "network",
        base_latency=net_node.float_("base_latency", 0.05, minimum=0.0),
        jitter=net_node.float_("jitter", 0.01, minimum=0.0),
        drop_prob=net_node.float_("drop_prob", 0.0),
        ledger_tx_latency=net_node.float_("ledger_tx_latency", 0.5, minimum=0.0),
    )
    net_node.finish()

    data_node = top.node("data")
    data = _build(
        DataParams,
        "data",
        samples_per_worker=data_node.int_("samples_per_worker", 160, minimum=2),
        features=data_node.int_("features", 6, minimum=1),
        classes=data_node.int_("classes", 3, minimum=2),
        noniid_skew=data_node.float_("noniid_skew", 0.3, minimum=0.0, maximum=1.0),
        validation_samples=data_node.int_("validation_samples", 240, minimum=1),
        center_spread=data_node.float_("center_spread", 2.0, minimum=0.0),
        cluster_std=data_node.float_("cluster_std", 1.0, minimum=0.0),
    )
    data_node.finish()

    kwargs = dict(
        workers=profiles,
        num_clusters=num_clusters,
        rounds=rounds,
        epochs_per_round=epochs,
        optimizer=optimizer,
        contract=contract,
        async_policy=policy,
        network=network,
        data=data,
        master_seed=master_seed,
        rotation_period=rotation_period,
        blockchain_enabled=top.bool_("blockchain_enabled", True),
        score_mode=top.str_("score_mode", HEAD_EVALUATED, choices=SCORE_MODES),
        intercluster_pull_prob=top.float_(
            "intercluster_pull_prob", 0.0, minimum=0.0, maximum=1.0
        ),
        intercluster_beta=top.float_(
            "intercluster_beta", 0.5, minimum=0.0, maximum=1.0
        ),
        head_trains=top.bool_("head_trains", True),
        weighting=Weighting(
            top.str_("weighting", "uniform", choices=("uniform", "by_samples"))
        ),
        cost_per_sample=top.float_("cost_per_sample", 0.001, minimum=0.0),
        failures=failures,
    )
    worker_balance = top.take("worker_balance", None)
    if worker_balance is not None:
        if isinstance(worker_balance, bool) or not isinstance(worker_balance, int):
            raise ConfigError("worker_balance", f"expected an integer, got {worker_balance!r}")
        kwargs["worker_balance"] = worker_balance
    requester_balance = top.take("requester_balance", None)
    if requester_balance is not None:
        if isinstance(requester_balance, bool) or not isinstance(requester_balance, int):
            raise ConfigError(
                "requester_balance", f"expected an integer, got {requester_balance!r}"
            )
        kwargs["requester_balance"] = requester_balance
    top.finish()
    return _build(ScenarioConfig, "", **kwargs)


def load_config(path: str, seed_override: int | None = None) -> ScenarioConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as e:
        raise ConfigError(path, f"cannot read config: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(path, f"invalid JSON: {e}") from e
    return parse_config(raw, seed_override)
