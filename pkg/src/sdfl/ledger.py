"""Trust-penalization contract: a deterministic token-ledger state machine.

Models the incentive layer of the collaborative-training protocol.  The
requester escrows a reward pool; each worker posts a fixed stake to enroll.
Every round each enrolled worker receives a performance score in [0, 100].
Settlement then

  * slashes workers scoring below the threshold by ``floor(stake * pct / 100)``,
  * refunds the remainder of every stake,
  * transfers collected penalties to the requester,
  * pays the top-k scorers (among non-slashed workers, descending score, ties
    broken by ascending worker id) ``floor(pool / m)`` each with
    ``m = min(k, eligible)``, returning the division remainder to the
    requester.  When nobody is eligible, the full pool goes back.

All amounts are integer micro-tokens and every operation preserves the token
total exactly: sum(balances) + sum(held stakes) + escrow pool is invariant.
Multi-round tasks re-escrow the pool and re-post stakes via ``open_round``;
workers who can no longer afford the stake are dropped.

The contract is a pure sequential state machine (single writer).  Snapshots
taken with ``clone`` are safe to share read-only across threads.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field, asdict
from enum import Enum


class LedgerError(Exception):
    pass


class InsufficientFunds(LedgerError):
    pass


class DuplicateJoin(LedgerError):
    pass


class WrongPhase(LedgerError):
    pass


class NotEnrolled(LedgerError):
    pass


class DuplicateScore(LedgerError):
    pass


class ScoreOutOfRange(LedgerError):
    pass


class AlreadySettled(LedgerError):
    pass


class MissingScores(LedgerError):
    """Settlement attempted while some enrolled workers have no score."""

    def __init__(self, missing):
        self.missing = sorted(missing)
        super().__init__(f"no score for workers: {', '.join(self.missing)}")


class Phase(str, Enum):
    INITIALIZED = "initialized"
    ENROLLING = "enrolling"
    SCORING = "scoring"
    SETTLED = "settled"


@dataclass(frozen=True)
class ContractParams:
    """Immutable parameters fixed at contract deployment."""

    fixed_deposit: int          # stake each worker posts per round
    score_threshold: float      # scores strictly below this are slashed
    penalty_pct: int            # percentage of the stake forfeited, 0..100
    top_k: int                  # reward recipients per round
    reward_pool: int            # escrowed per round, split among top-k
    requester_id: str = "requester"

    def __post_init__(self):
        if self.fixed_deposit < 0 or self.reward_pool < 0:
            raise ValueError("token amounts must be non-negative")
        if not (0.0 <= self.score_threshold <= 100.0):
            raise ValueError("score_threshold must be in [0, 100]")
        if not (0 <= self.penalty_pct <= 100):
            raise ValueError("penalty_pct must be in [0, 100]")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")


@dataclass
class LedgerTx:
    """One append-only log record; serializes to a single JSON object."""

    type: str
    round: int | None
    account: str
    amount: int
    resulting_balance: int


@dataclass
class SettlementReport:
    round: int
    bad_workers: set[str]
    penalties: dict[str, int]      # defined exactly on bad_workers
    refunds: dict[str, int]        # every enrolled worker
    top_workers: list[str]         # descending score, ties by ascending id
    rewards: dict[str, int]        # defined exactly on top_workers
    requester_credit: int          # penalties + unpaid remainder of the pool

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["bad_workers"] = sorted(self.bad_workers)
        return d


class TrustContract:
    """Deterministic contract state; see module docstring for the lifecycle."""

    def __init__(self, params: ContractParams, requester_balance: int):
        if requester_balance < params.reward_pool:
            raise InsufficientFunds(
                f"requester balance {requester_balance} cannot fund pool "
                f"{params.reward_pool}"
            )
        self.params = params
        self.phase = Phase.INITIALIZED
        self.balances: dict[str, int] = {params.requester_id: requester_balance}
        self.deposits: dict[str, int] = {}
        self.scores: dict[tuple[int, str], float] = {}
        self.enrolled: list[str] = []
        self.pool = 0
        self.settled_rounds: set[int] = set()
        self.tx_log: list[LedgerTx] = []
        self._fund_pool(round_=None)
        self.phase = Phase.ENROLLING

    # -- helpers -------------------------------------------------------------

    def _tx(self, type_: str, round_: int | None, account: str, amount: int) -> None:
        self.tx_log.append(
            LedgerTx(type_, round_, account, amount, self.balances.get(account, 0))
        )

    def _fund_pool(self, round_: int | None) -> None:
        rid = self.params.requester_id
        self.balances[rid] -= self.params.reward_pool
        self.pool += self.params.reward_pool
        self._tx("fund_pool", round_, rid, -self.params.reward_pool)

    def total_tokens(self) -> int:
        return sum(self.balances.values()) + sum(self.deposits.values()) + self.pool

    def clone(self) -> "TrustContract":
        return copy.deepcopy(self)

    def tx_log_jsonl(self) -> str:
        """Line-delimited JSON of the transaction log, for replay and audit."""
        return "\n".join(json.dumps(asdict(tx), sort_keys=True) for tx in self.tx_log)

    # -- operations ----------------------------------------------------------

    def join_worker(self, worker: str, balance: int) -> None:
        if self.phase is not Phase.ENROLLING:
            raise WrongPhase(f"cannot join in phase {self.phase.value}")
        if worker == self.params.requester_id:
            raise LedgerError(f"worker id {worker!r} is reserved for the requester")
        if worker in self.deposits or worker in self.enrolled:
            raise DuplicateJoin(worker)
        if balance < self.params.fixed_deposit:
            raise InsufficientFunds(
                f"{worker}: balance {balance} < deposit {self.params.fixed_deposit}"
            )
        self.balances[worker] = balance - self.params.fixed_deposit
        self.deposits[worker] = self.params.fixed_deposit
        self.enrolled.append(worker)
        self._tx("join_deposit", None, worker, -self.params.fixed_deposit)

    def submit_score(self, round_: int, worker: str, score: float) -> None:
        if self.phase not in (Phase.ENROLLING, Phase.SCORING):
            raise WrongPhase(f"cannot score in phase {self.phase.value}")
        if worker not in self.enrolled:
            raise NotEnrolled(worker)
        if (round_, worker) in self.scores:
            raise DuplicateScore(f"({round_}, {worker})")
        if not (0.0 <= score <= 100.0):
            raise ScoreOutOfRange(f"{score}")
        self.scores[(round_, worker)] = float(score)
        self.phase = Phase.SCORING
        self._tx("score", round_, worker, 0)

    def settle_round(self, round_: int) -> SettlementReport:
        if round_ in self.settled_rounds:
            raise AlreadySettled(f"round {round_}")
        if self.phase not in (Phase.ENROLLING, Phase.SCORING):
            raise WrongPhase(f"cannot settle in phase {self.phase.value}")
        missing = [w for w in self.enrolled if (round_, w) not in self.scores]
        if missing:
            raise MissingScores(missing)

        params = self.params
        rid = params.requester_id
        bad = {w for w in self.enrolled if self.scores[(round_, w)] < params.score_threshold}
        penalty = params.fixed_deposit * params.penalty_pct // 100

        penalties: dict[str, int] = {}
        refunds: dict[str, int] = {}
        for w in sorted(self.enrolled):
            pen = penalty if w in bad else 0
            refund = self.deposits[w] - pen
            if pen:
                penalties[w] = pen
                self._tx("penalty", round_, w, -pen)
            self.balances[w] += refund
            self.deposits[w] = 0
            refunds[w] = refund
            self._tx("refund", round_, w, refund)
        total_pen = sum(penalties.values())
        self.balances[rid] += total_pen
        if total_pen:
            self._tx("penalty_credit", round_, rid, total_pen)

        eligible = sorted(
            (w for w in self.enrolled if w not in bad),
            key=lambda w: (-self.scores[(round_, w)], w),
        )
        m = min(params.top_k, len(eligible))
        top = eligible[:m]
        rewards: dict[str, int] = {}
        if m:
            share = params.reward_pool // m
            for w in top:
                self.balances[w] += share
                self.pool -= share
                rewards[w] = share
                self._tx("reward", round_, w, share)
        leftover = self.pool
        self.balances[rid] += leftover
        self.pool = 0
        if leftover:
            self._tx("pool_return", round_, rid, leftover)

        self.phase = Phase.SETTLED
        self.settled_rounds.add(round_)
        return SettlementReport(
            round=round_,
            bad_workers=bad,
            penalties=penalties,
            refunds=refunds,
            top_workers=top,
            rewards=rewards,
            requester_credit=total_pen + leftover,
        )

    def open_round(self, round_: int) -> list[str]:
        """Re-escrow the pool and re-post stakes for the next round.

        Returns the workers dropped because they could no longer afford the
        stake.  Requires the previous round to be settled.
        """
        if self.phase is not Phase.SETTLED:
            raise WrongPhase(f"cannot open a round in phase {self.phase.value}")
        rid = self.params.requester_id
        if self.balances[rid] < self.params.reward_pool:
            raise InsufficientFunds(
                f"requester balance {self.balances[rid]} cannot re-fund pool"
            )
        self._fund_pool(round_)
        dropped = [w for w in self.enrolled if self.balances[w] < self.params.fixed_deposit]
        for w in dropped:
            self.enrolled.remove(w)
            self._tx("drop", round_, w, 0)
        for w in self.enrolled:
            self.balances[w] -= self.params.fixed_deposit
            self.deposits[w] = self.params.fixed_deposit
            self._tx("reenroll_deposit", round_, w, -self.params.fixed_deposit)
        self.phase = Phase.SCORING
        return dropped


def init_contract(params: ContractParams, requester_balance: int) -> TrustContract:
    """Deploy the contract: escrow the reward pool and open enrollment."""
    return TrustContract(params, requester_balance)
