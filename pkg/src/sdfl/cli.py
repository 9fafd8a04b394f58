"""Scenario runner: run one config, sweep a field, or audit an event log.

Exit codes: 0 success, 2 configuration problem (message names the offending
field), 3 runtime invariant violation, 4 replay divergence (message names
the first divergent event).

A run emits four artifacts into the output directory:
  metrics.csv    per-round per-worker accuracy/loss (stable header, floats
                 printed with shortest round-trip precision)
  summary.json   per-round aggregates, settlement reports, token flows
  events.jsonl   the full public event log, one JSON object per line
  manifest.json  SHA-256 digests of the other files plus everything replay
                 needs to re-derive and verify the ledger state
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import os
import sys
from dataclasses import asdict

from .config import ConfigError, load_config, parse_config
from .engine import Engine, EngineError, InvariantViolation, MetricsReport, ScenarioConfig
from .ledger import ContractParams, LedgerError, TrustContract

CSV_HEADER = "round,worker,cluster,is_head,accuracy,loss"


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _csv_line(round_, worker, cluster, is_head, accuracy, loss) -> str:
    # repr of a Python float is the shortest string that parses back exactly
    return f"{int(round_)},{worker},{int(cluster)},{int(is_head)},{float(accuracy)!r},{float(loss)!r}"


def _metrics_csv(report: MetricsReport) -> bytes:
    lines = [CSV_HEADER]
    for row in report.rows:
        lines.append(
            _csv_line(row.round, row.worker, row.cluster, row.is_head, row.accuracy, row.loss)
        )
    return ("\n".join(lines) + "\n").encode("utf-8")


def _summary_json(report: MetricsReport) -> bytes:
    doc = {
        "rounds": [
            {
                "round": s.round,
                "mean_accuracy": s.mean_accuracy,
                "std_accuracy": s.std_accuracy,
                "cluster_accuracy": s.cluster_accuracy,
                "completion_time": s.completion_time,
                "settlement": s.settlement,
            }
            for s in report.round_summaries
        ],
        "total_simulated_time": report.total_time,
        "token_flows": report.token_flows,
    }
    return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode("utf-8")


def _events_jsonl(report: MetricsReport) -> bytes:
    lines = [json.dumps(ev.to_json_dict(), sort_keys=True) for ev in report.events]
    return ("\n".join(lines) + "\n").encode("utf-8")


def _ledger_digest(contract: TrustContract) -> str:
    state = {
        "balances": contract.balances,
        "deposits": contract.deposits,
        "pool": contract.pool,
        "settled": sorted(contract.settled_rounds),
    }
    return _sha256(json.dumps(state, sort_keys=True).encode("utf-8"))


def _addresses_digest(addresses: list[str]) -> str:
    return _sha256("\n".join(addresses).encode("utf-8"))


def _execute(cfg: ScenarioConfig, out_dir: str, config_label: str) -> MetricsReport:
    os.makedirs(out_dir, exist_ok=True)
    engine = Engine(cfg)
    report = engine.run()

    files = {
        "metrics.csv": _metrics_csv(report),
        "summary.json": _summary_json(report),
        "events.jsonl": _events_jsonl(report),
    }
    for name, data in files.items():
        with open(os.path.join(out_dir, name), "wb") as fh:
            fh.write(data)

    requester_balance = (
        cfg.requester_balance
        if cfg.requester_balance is not None
        else cfg.default_requester_balance()
    )
    manifest = {
        "config": config_label,
        "master_seed": cfg.master_seed,
        "files": {name: _sha256(data) for name, data in files.items()},
        "replay": {
            "contract": asdict(cfg.contract),
            "requester_balance": requester_balance,
            "rounds": cfg.rounds,
            "ledger_digest": _ledger_digest(engine.contract),
            "addresses_digest": _addresses_digest(report.addresses),
        },
    }
    with open(os.path.join(out_dir, "manifest.json"), "wb") as fh:
        fh.write((json.dumps(manifest, sort_keys=True, indent=2) + "\n").encode("utf-8"))
    return report


def _default_out_dir(cli_value: str | None) -> str:
    if cli_value:
        return cli_value
    return os.environ.get("SDFL_OUT_DIR", ".")


def cmd_run(args) -> int:
    cfg = load_config(args.config, args.seed)
    out_dir = _default_out_dir(args.out_dir)
    report = _execute(cfg, out_dir, args.config)
    final = report.round_summaries[-1]
    print(
        f"completed {cfg.rounds} rounds in {report.total_time:.3f} simulated seconds; "
        f"final mean accuracy {final.mean_accuracy:.2f}% (std {final.std_accuracy:.2f})"
    )
    print(f"artifacts written to {out_dir}")
    return 0


def _parse_vary(spec: str) -> tuple[str, list]:
    field, sep, raw_values = spec.partition("=")
    field = field.strip()
    if not sep or not field or not raw_values:
        raise ConfigError("--vary", f"expected field=v1,v2,... got {spec!r}")
    values = []
    for part in raw_values.split(","):
        part = part.strip()
        try:
            values.append(int(part))
        except ValueError:
            try:
                values.append(float(part))
            except ValueError:
                raise ConfigError("--vary", f"value {part!r} is not numeric") from None
    return field, values


def _set_field(raw: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    node = raw
    for key in keys[:-1]:
        nxt = node.get(key)
        if nxt is None:
            nxt = node[key] = {}
        elif not isinstance(nxt, dict):
            raise ConfigError(dotted, f"{key} is not an object")
        node = nxt
    node[keys[-1]] = value


def cmd_sweep(args) -> int:
    field, values = _parse_vary(args.vary)
    with open(args.config, "r", encoding="utf-8") as fh:
        base_raw = json.load(fh)
    out_dir = _default_out_dir(args.out_dir)
    os.makedirs(out_dir, exist_ok=True)

    runs = []
    for value in values:
        raw = copy.deepcopy(base_raw)
        _set_field(raw, field, value)
        cfg = parse_config(raw, args.seed)
        sub = os.path.join(out_dir, f"{field}={value}")
        report = _execute(cfg, sub, args.config)
        runs.append(
            {
                "value": value,
                "directory": f"{field}={value}",
                "rounds": [
                    {
                        "round": s.round,
                        "mean_accuracy": s.mean_accuracy,
                        "std_accuracy": s.std_accuracy,
                    }
                    for s in report.round_summaries
                ],
            }
        )
        final = report.round_summaries[-1]
        print(
            f"{field}={value}: final mean accuracy {final.mean_accuracy:.2f}% "
            f"(std {final.std_accuracy:.2f})"
        )

    doc = {"field": field, "runs": runs}
    with open(os.path.join(out_dir, "sweep_summary.json"), "wb") as fh:
        fh.write((json.dumps(doc, sort_keys=True, indent=2) + "\n").encode("utf-8"))
    print(f"sweep summary written to {out_dir}/sweep_summary.json")
    return 0


class _Divergence(Exception):
    def __init__(self, event: dict | None, reason: str):
        self.event = event
        self.reason = reason
        where = (
            f"event seq={event['seq']} kind={event['kind']}"
            if event is not None
            else "final state"
        )
        super().__init__(f"{where}: {reason}")


def _replay_events(events: list[dict], manifest: dict) -> None:
    """Re-drive the ledger from the log and check every digest; raises _Divergence."""
    rep = manifest["replay"]
    try:
        params = ContractParams(**rep["contract"])
        contract = TrustContract(params, rep["requester_balance"])
    except (ValueError, TypeError, LedgerError) as e:
        raise _Divergence(None, f"manifest contract parameters rejected: {e}") from e
    rounds_total = rep["rounds"]
    addresses = []
    csv_lines = [CSV_HEADER]

    for ev in events:
        kind, p = ev["kind"], ev["payload"]
        try:
            if kind == "Enroll":
                contract.join_worker(p["worker"], p["balance"])
            elif kind == "TrainComplete":
                csv_lines.append(
                    _csv_line(
                        p["round"], p["worker"], p["cluster"],
                        p["is_head"], p["accuracy"], p["loss"],
                    )
                )
            elif kind == "ScoreSubmitted":
                contract.submit_score(p["round"], p["worker"], p["score"])
            elif kind == "RoundSettled":
                computed = contract.settle_round(p["round"]).to_json_dict()
                if computed != p["report"]:
                    raise _Divergence(ev, "settlement report does not match the log")
                if p["round"] < rounds_total:
                    contract.open_round(p["round"] + 1)
            elif kind == "AggregatePublished":
                addresses.append(p["address"])
        except LedgerError as e:
            raise _Divergence(ev, f"ledger rejected the event: {e}") from e

    if _ledger_digest(contract) != rep["ledger_digest"]:
        raise _Divergence(None, "reconstructed ledger digest differs from manifest")
    if _addresses_digest(addresses) != rep["addresses_digest"]:
        raise _Divergence(None, "published address sequence differs from manifest")
    metrics = ("\n".join(csv_lines) + "\n").encode("utf-8")
    if _sha256(metrics) != manifest["files"]["metrics.csv"]:
        raise _Divergence(None, "reconstructed metrics.csv digest differs from manifest")


def cmd_replay(args) -> int:
    try:
        with open(args.events, "r", encoding="utf-8") as fh:
            lines = [line for line in fh.read().splitlines() if line.strip()]
    except OSError as e:
        print(f"config error: cannot read event log: {e}", file=sys.stderr)
        return 2
    if not lines:
        print("config error: event log is empty", file=sys.stderr)
        return 2
    manifest_path = os.path.join(os.path.dirname(os.path.abspath(args.events)), "manifest.json")
    try:
        with open(manifest_path, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        print(f"config error: cannot read manifest next to event log: {e}", file=sys.stderr)
        return 2
    try:
        events = [json.loads(line) for line in lines]
    except json.JSONDecodeError as e:
        print(f"config error: malformed event log: {e}", file=sys.stderr)
        return 2

    try:
        _replay_events(events, manifest)
    except _Divergence as e:
        print(f"replay divergence at {e}", file=sys.stderr)
        return 4
    except (KeyError, TypeError) as e:
        print(f"config error: manifest or log is missing fields: {e!r}", file=sys.stderr)
        return 2
    print(f"replay verified: {len(events)} events consistent with manifest")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sdfl",
        description="Deterministic simulator for cluster-based collaborative training",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one scenario")
    p_run.add_argument("config", help="path to a scenario JSON file")
    p_run.add_argument("--seed", type=int, default=None, help="override master_seed")
    p_run.add_argument("--out-dir", default=None, help="artifact directory (or $SDFL_OUT_DIR)")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run the scenario once per value of one field")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--vary", required=True, metavar="FIELD=V1,V2,...")
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--out-dir", default=None)
    p_sweep.set_defaults(func=cmd_sweep)

    p_replay = sub.add_parser("replay", help="verify an event log against its manifest")
    p_replay.add_argument("events", help="path to events.jsonl")
    p_replay.set_defaults(func=cmd_replay)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as e:
        print(f"config error: invalid JSON: {e}", file=sys.stderr)
        return 2
    except (InvariantViolation, EngineError, LedgerError) as e:
        print(f"runtime invariant violation: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
