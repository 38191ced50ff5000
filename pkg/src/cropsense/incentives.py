"""Tiered micro-payment pricing, batch vesting, and payout disbursement.

Five payment schemes shipped as a preset. Pricing is piecewise in the
agent's lifetime ordinal k: the first 20 reports are worth the base
UGX 250 each and vest together as one UGX 5,000 lump; afterwards reports
vest in batches (40, then 50 or 100 per the scheme's stages) whose price
steps up UGX 25 per completed batch. Later schemes cap the price at a
flat UGX 500 past ordinal 500, zero all payment past ordinal 800, and
finally settle anything beyond 500 reports in a period with a flat
UGX 200,000.

A batch keeps the size it started with; a stage boundary falling
mid-batch takes effect from the next batch start. Prices always follow
the scheme active on each report's receipt date; batch structure follows
the scheme active when the batch opened.
"""

from __future__ import annotations

import csv
import json
import threading
import time
from dataclasses import dataclass, field
from datetime import date, datetime
from enum import Enum
from functools import lru_cache
from importlib import resources
from pathlib import Path
from random import Random
from typing import Iterable, Mapping, Protocol, Sequence

__all__ = [
    "SchemeId",
    "BatchStage",
    "FlatSettlement",
    "SchemeConfig",
    "SchemeSchedule",
    "PayoutStatement",
    "Receipt",
    "ReceiptStatus",
    "PayoutClient",
    "SimulatedPayoutClient",
    "PayoutLedger",
    "SpendSummary",
    "report_price",
    "compute_payout",
    "campaign_spend",
    "default_schemes",
    "default_schedule",
    "load_scheme_file",
    "IncentiveError",
    "InvalidOrdinal",
    "HistoryGap",
    "AccountNotFound",
    "ProviderUnavailable",
    "InsufficientFloat",
]

BASE_PRICE = 250
FIRST_BATCH_SIZE = 20
FIRST_BATCH_LUMP = 5000
BATCH_INCREMENT = 25
CAPPED_PRICE = 500
DEFAULT_TRANSFER_FEE = 500


class IncentiveError(Exception):
    """Base class for pricing, payout, and disbursement failures."""


class InvalidOrdinal(IncentiveError):
    pass


class HistoryGap(IncentiveError):
    """An agent history has non-contiguous ordinals."""


class PayoutError(IncentiveError):
    """Base class for disbursement failures."""


class AccountNotFound(PayoutError):
    pass


class ProviderUnavailable(PayoutError):
    """Transient provider failure; safe to retry with the same key."""


class InsufficientFloat(PayoutError):
    """The campaign float cannot cover amount plus transfer fee."""


class SchemeId(str, Enum):
    S1 = "S1"
    S2 = "S2"
    S3 = "S3"
    S4 = "S4"
    S5 = "S5"


@dataclass(frozen=True)
class BatchStage:
    """From this ordinal onward, new batches open with this size."""

    from_ordinal: int
    batch_size: int


@dataclass(frozen=True)
class FlatSettlement:
    """Per-period flat payment replacing pricing beyond the threshold."""

    threshold: int = 500
    amount: int = 200000


@dataclass(frozen=True)
class SchemeConfig:
    scheme_id: SchemeId
    batch_size_stages: tuple[BatchStage, ...]
    base_price: int = BASE_PRICE
    first_batch_size: int = FIRST_BATCH_SIZE
    first_batch_lump: int = FIRST_BATCH_LUMP
    increment: int = BATCH_INCREMENT
    price_cap_ordinal: int | None = None
    capped_price: int = CAPPED_PRICE
    payment_cap_ordinal: int | None = None
    flat_settlement: FlatSettlement | None = None

    def __post_init__(self) -> None:
        if self.first_batch_lump != self.base_price * self.first_batch_size:
            raise IncentiveError(
                f"{self.scheme_id.value}: lump {self.first_batch_lump} != "
                f"{self.base_price} x {self.first_batch_size}"
            )
        if not self.batch_size_stages:
            raise IncentiveError(f"{self.scheme_id.value}: no batch stages")
        if self.batch_size_stages[0].from_ordinal != self.first_batch_size + 1:
            raise IncentiveError(
                f"{self.scheme_id.value}: first stage must start at ordinal "
                f"{self.first_batch_size + 1}"
            )
        ordinals = [s.from_ordinal for s in self.batch_size_stages]
        if ordinals != sorted(set(ordinals)):
            raise IncentiveError(
                f"{self.scheme_id.value}: stages must be sorted and non-overlapping"
            )
        if any(s.batch_size <= 0 for s in self.batch_size_stages):
            raise IncentiveError(f"{self.scheme_id.value}: batch sizes must be positive")

    def stage_size_at(self, ordinal: int) -> int:
        """Size a batch opens with at this ordinal."""
        size = self.batch_size_stages[0].batch_size
        for stage in self.batch_size_stages:
            if stage.from_ordinal <= ordinal:
                size = stage.batch_size
        return size


@lru_cache(maxsize=64)
def _segments(scheme: SchemeConfig) -> tuple[tuple[int, int, int, int | None], ...]:
    """Post-lump batch grid as (first_ordinal, size, batches_before, batch_count).

    The final segment is open-ended (batch_count None). Batch index b is
    1-based across segments: the first post-lump batch is b=1.
    """
    segs: list[tuple[int, int, int, int | None]] = []
    pos = scheme.first_batch_size + 1
    batches_before = 0
    stages = scheme.batch_size_stages
    for i, stage in enumerate(stages):
        size = stage.batch_size
        if i + 1 < len(stages):
            nxt = stages[i + 1].from_ordinal
            count = max(0, -(-(nxt - pos) // size))  # ceil division
            segs.append((pos, size, batches_before, count))
            batches_before += count
            pos += count * size
        else:
            segs.append((pos, size, batches_before, None))
    return tuple(segs)


def _batch_index(k: int, scheme: SchemeConfig) -> int:
    """1-based index of the post-lump batch containing ordinal k."""
    for start, size, before, count in _segments(scheme):
        if count is None or k < start + count * size:
            return before + (k - start) // size + 1
    raise AssertionError("unreachable: final segment is open-ended")


def report_price(k: int, scheme: SchemeConfig) -> int:
    """Price of an agent's k-th accepted report under a scheme, in UGX."""
    if k < 1:
        raise InvalidOrdinal(f"ordinal must be >= 1, got {k}")
    if scheme.payment_cap_ordinal is not None and k > scheme.payment_cap_ordinal:
        return 0
    if k <= scheme.first_batch_size:
        return scheme.base_price
    if scheme.price_cap_ordinal is not None and k > scheme.price_cap_ordinal:
        return scheme.capped_price
    price = scheme.base_price + scheme.increment * _batch_index(k, scheme)
    if scheme.price_cap_ordinal is not None:
        price = min(price, scheme.capped_price)
    return price


def _price_sum(scheme: SchemeConfig, lo: int, hi: int) -> int:
    """Sum of report_price(k) for k in [lo, hi]; batch-blocked for speed."""
    if hi < lo:
        return 0
    total = 0
    k = lo
    # First-batch and cap ordinals are the only intra-batch price changes;
    # advance k in runs that share a single price.
    while k <= hi:
        if k <= scheme.first_batch_size:
            run_end = min(hi, scheme.first_batch_size)
        elif scheme.payment_cap_ordinal is not None and k > scheme.payment_cap_ordinal:
            run_end = hi
        elif scheme.price_cap_ordinal is not None and k > scheme.price_cap_ordinal:
            run_end = hi if scheme.payment_cap_ordinal is None else min(hi, scheme.payment_cap_ordinal)
        else:
            # inside the batch grid: constant until the batch's last ordinal
            for start, size, before, count in _segments(scheme):
                if count is None or k < start + count * size:
                    batch_end = start + ((k - start) // size + 1) * size - 1
                    break
            run_end = min(hi, batch_end)
            if scheme.price_cap_ordinal is not None:
                run_end = min(run_end, scheme.price_cap_ordinal)
            if scheme.payment_cap_ordinal is not None:
                run_end = min(run_end, scheme.payment_cap_ordinal)
        total += (run_end - k + 1) * report_price(k, scheme)
        k = run_end + 1
    return total


@dataclass(frozen=True)
class SchemeSchedule:
    """Which scheme is active on each date; entries strictly increasing."""

    entries: tuple[tuple[date, SchemeId], ...]

    def __post_init__(self) -> None:
        if not self.entries:
            raise IncentiveError("schedule has no entries")
        dates = [d for d, _ in self.entries]
        if dates != sorted(set(dates)):
            raise IncentiveError("schedule dates must be strictly increasing")

    @property
    def start(self) -> date:
        return self.entries[0][0]

    def scheme_for(self, when: date | datetime) -> SchemeId:
        d = when.date() if isinstance(when, datetime) else when
        if d < self.start:
            raise IncentiveError(f"{d} precedes schedule start {self.start}")
        current = self.entries[0][1]
        for entry_date, scheme_id in self.entries:
            if entry_date <= d:
                current = scheme_id
        return current


def default_schemes() -> dict[SchemeId, SchemeConfig]:
    """The five historical schemes from the packaged preset."""
    return load_scheme_file(None)[0]


def default_schedule() -> SchemeSchedule:
    return load_scheme_file(None)[1]


def _scheme_from_dict(scheme_id: SchemeId, data: dict) -> SchemeConfig:
    flat = data.get("flat_settlement")
    return SchemeConfig(
        scheme_id=scheme_id,
        batch_size_stages=tuple(
            BatchStage(from_ordinal=o, batch_size=s)
            for o, s in data["batch_size_stages"]
        ),
        base_price=data.get("base_price", BASE_PRICE),
        first_batch_size=data.get("first_batch_size", FIRST_BATCH_SIZE),
        first_batch_lump=data.get("first_batch_lump", FIRST_BATCH_LUMP),
        increment=data.get("increment", BATCH_INCREMENT),
        price_cap_ordinal=data.get("price_cap_ordinal"),
        capped_price=data.get("capped_price", CAPPED_PRICE),
        payment_cap_ordinal=data.get("payment_cap_ordinal"),
        flat_settlement=(
            FlatSettlement(threshold=flat["threshold"], amount=flat["amount"])
            if flat
            else None
        ),
    )


def load_scheme_file(
    path: str | Path | None,
) -> tuple[dict[SchemeId, SchemeConfig], SchemeSchedule]:
    """Load a schemes+schedule JSON config; None loads the packaged preset."""
    if path is None:
        with resources.files("cropsense.data").joinpath("schemes_2018.json").open(
            "r", encoding="utf-8"
        ) as fh:
            data = json.load(fh)
    else:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    schemes = {
        SchemeId(sid): _scheme_from_dict(SchemeId(sid), cfg)
        for sid, cfg in data["schemes"].items()
    }
    schedule = SchemeSchedule(
        entries=tuple(
            (date.fromisoformat(d), SchemeId(sid)) for d, sid in data["schedule"]
        )
    )
    missing = {sid for _, sid in schedule.entries} - set(schemes)
    if missing:
        raise IncentiveError(f"schedule references undefined schemes: {missing}")
    return schemes, schedule


@dataclass
class PayoutStatement:
    """One agent's vested payment for one period."""

    agent_id: str
    period_start: date
    period_end: date
    reports_in_period: int
    vested_ordinals: list[tuple[int, int]]
    amount: int
    carried_over: int
    scheme_id: SchemeId
    disbursement: "Receipt | None" = None

    @property
    def idempotency_key(self) -> str:
        return f"{self.agent_id}|{self.period_start.isoformat()}|{self.period_end.isoformat()}"


def _as_date(value: date | datetime) -> date:
    return value.date() if isinstance(value, datetime) else value


def compute_payout(
    agent_id: str,
    history: Sequence[tuple[int, date | datetime]],
    period: tuple[date, date],
    schedule: SchemeSchedule,
    schemes: Mapping[SchemeId, SchemeConfig],
) -> PayoutStatement:
    """Vest the agent's reports received within the period.

    `history` is the agent's whole accepted-report history as (ordinal,
    receipt time) pairs, gap-free from 1, receipt times non-decreasing.
    Nothing vests until the cumulative count reaches the first batch of
    20 (paid as one lump); afterwards a report vests only when its whole
    batch completes, partial batches carrying over. Where the active
    scheme settles flat, reports beyond the period threshold are covered
    by the flat amount instead of per-report prices.
    """
    period_start, period_end = period
    if period_end < period_start:
        raise IncentiveError(f"period end {period_end} precedes start {period_start}")
    if period_start < schedule.start:
        raise IncentiveError(
            f"period {period_start}..{period_end} precedes schedule start {schedule.start}"
        )

    dates: list[date] = []
    for position, (ordinal, when) in enumerate(history, start=1):
        if ordinal != position:
            raise HistoryGap(
                f"agent {agent_id!r}: expected ordinal {position}, got {ordinal}"
            )
        d = _as_date(when)
        if dates and d < dates[-1]:
            raise IncentiveError(
                f"agent {agent_id!r}: receipt dates must be non-decreasing"
            )
        dates.append(d)

    n_before = sum(1 for d in dates if d < period_start)
    n_end = sum(1 for d in dates if d <= period_end)
    in_period = n_end - n_before

    end_scheme = schemes[schedule.scheme_for(period_end)]
    flat_amount = 0
    n_cut = n_end
    settled: tuple[int, int] | None = None
    if (
        end_scheme.flat_settlement is not None
        and in_period > end_scheme.flat_settlement.threshold
    ):
        n_cut = n_before + end_scheme.flat_settlement.threshold
        flat_amount = end_scheme.flat_settlement.amount
        settled = (n_cut + 1, n_end)

    def scheme_at(ordinal: int) -> SchemeConfig:
        return schemes[schedule.scheme_for(dates[ordinal - 1])]

    # Boundary walk: the lump batch, then batches whose size is set by the
    # scheme active when the batch opened.
    boundaries: list[int] = []
    first_batch = scheme_at(1).first_batch_size if n_cut else FIRST_BATCH_SIZE
    if n_cut >= first_batch:
        boundaries.append(first_batch)
        pos = first_batch + 1
        while pos <= n_cut:
            size = scheme_at(pos).stage_size_at(pos)
            if pos + size - 1 > n_cut:
                break
            boundaries.append(pos + size - 1)
            pos += size

    v0 = max((b for b in boundaries if b <= n_before), default=0)
    v1 = boundaries[-1] if boundaries else 0

    amount = 0
    if v0 < first_batch <= v1:
        amount += scheme_at(first_batch).first_batch_lump

    # Batches completing inside this period: price each vested report under
    # the scheme active on its own receipt date, grouping same-scheme runs.
    lo = max(v0, first_batch) + 1
    k = lo
    while k <= v1:
        scheme_k = scheme_at(k)
        run_end = k
        while run_end < v1 and schemes[schedule.scheme_for(dates[run_end])] is scheme_k:
            run_end += 1
        amount += _price_sum(scheme_k, k, run_end)
        k = run_end + 1

    vested: list[tuple[int, int]] = []
    if v1 > v0:
        vested.append((v0 + 1, v1))
    if settled is not None:
        vested.append(settled)

    return PayoutStatement(
        agent_id=agent_id,
        period_start=period_start,
        period_end=period_end,
        reports_in_period=in_period,
        vested_ordinals=vested,
        amount=amount + flat_amount,
        carried_over=n_cut - v1,
        scheme_id=end_scheme.scheme_id,
    )


# -- disbursement -------------------------------------------------------------


class ReceiptStatus(str, Enum):
    PAID = "Paid"
    FAILED = "Failed"
    PENDING = "Pending"


@dataclass
class Receipt:
    idempotency_key: str
    status: ReceiptStatus
    amount: int
    provider_txn_id: str | None = None
    failure_reason: str | None = None


class PayoutClient(Protocol):
    """Mobile-money transfer rail; implementations must be idempotent-safe."""

    def send(self, account: str, amount: int, idempotency_key: str) -> str:
        """Transfer `amount` to `account`; returns a provider txn id."""
        ...


class SimulatedPayoutClient:
    """Deterministic in-process mobile-money simulator.

    Configurable float, injected failure rate, and latency. Transfer fees
    are borne by the requester on top of each amount and drawn from the
    same float.
    """

    def __init__(
        self,
        float_ugx: int,
        transfer_fee: int = DEFAULT_TRANSFER_FEE,
        failure_rate: float = 0.0,
        latency_s: float = 0.0,
        seed: int = 0,
        known_accounts: set[str] | None = None,
    ) -> None:
        self._float = float_ugx
        self.transfer_fee = transfer_fee
        self.failure_rate = failure_rate
        self.latency_s = latency_s
        self.known_accounts = known_accounts
        self._rng = Random(seed)
        self._lock = threading.Lock()
        self.send_attempts = 0
        self.successful_sends = 0
        self.fees_paid = 0

    @property
    def remaining_float(self) -> int:
        return self._float

    def send(self, account: str, amount: int, idempotency_key: str) -> str:
        if self.latency_s:
            time.sleep(self.latency_s)
        with self._lock:
            self.send_attempts += 1
            if self.known_accounts is not None and account not in self.known_accounts:
                raise AccountNotFound(f"no mobile-money account {account!r}")
            if self.failure_rate and self._rng.random() < self.failure_rate:
                raise ProviderUnavailable("simulated provider outage")
            if self._float < amount + self.transfer_fee:
                raise InsufficientFloat(
                    f"float {self._float} cannot cover {amount} + fee {self.transfer_fee}"
                )
            self._float -= amount + self.transfer_fee
            self.fees_paid += self.transfer_fee
            self.successful_sends += 1
            return f"txn-{self.successful_sends:08d}"


class PayoutLedger:
    """Statements plus receipts, with exactly-once disbursement per key."""

    def __init__(self) -> None:
        self.statements: list[PayoutStatement] = []
        self._receipts: dict[str, Receipt] = {}
        self._key_locks: dict[str, threading.Lock] = {}
        self._mutex = threading.Lock()

    def record(self, statement: PayoutStatement) -> None:
        with self._mutex:
            self.statements.append(statement)

    def receipt_for(self, key: str) -> Receipt | None:
        return self._receipts.get(key)

    def receipts(self) -> list[Receipt]:
        return list(self._receipts.values())

    def _lock_for(self, key: str) -> threading.Lock:
        with self._mutex:
            lock = self._key_locks.get(key)
            if lock is None:
                lock = self._key_locks[key] = threading.Lock()
            return lock

    def disburse(self, statement: PayoutStatement, client: PayoutClient, account: str) -> Receipt:
        """Send the statement amount exactly once per idempotency key.

        Retries for one key are serialized; after a Paid receipt exists,
        further calls return it without touching the provider. A failed
        attempt leaves a retryable Failed receipt under the same key.
        """
        if statement.amount <= 0:
            raise IncentiveError("nothing to disburse: statement amount is zero")
        key = statement.idempotency_key
        with self._lock_for(key):
            existing = self._receipts.get(key)
            if existing is not None and existing.status is ReceiptStatus.PAID:
                statement.disbursement = existing
                return existing
            try:
                txn = client.send(account, statement.amount, key)
                receipt = Receipt(
                    idempotency_key=key,
                    status=ReceiptStatus.PAID,
                    amount=statement.amount,
                    provider_txn_id=txn,
                )
            except PayoutError as exc:
                receipt = Receipt(
                    idempotency_key=key,
                    status=ReceiptStatus.FAILED,
                    amount=statement.amount,
                    failure_reason=type(exc).__name__,
                )
            self._receipts[key] = receipt
            statement.disbursement = receipt
            return receipt

    def export_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                [
                    "agent_id",
                    "period_start",
                    "period_end",
                    "reports",
                    "amount",
                    "scheme",
                    "receipt_status",
                ]
            )
            for s in self.statements:
                writer.writerow(
                    [
                        s.agent_id,
                        s.period_start.isoformat(),
                        s.period_end.isoformat(),
                        s.reports_in_period,
                        s.amount,
                        s.scheme_id.value,
                        s.disbursement.status.value if s.disbursement else "",
                    ]
                )


@dataclass
class SpendSummary:
    total: int
    per_agent: dict[str, int]
    per_scheme: dict[SchemeId, int]


def campaign_spend(ledger: PayoutLedger) -> SpendSummary:
    """Totals over Paid receipts, grouped by agent and by scheme."""
    total = 0
    per_agent: dict[str, int] = {}
    per_scheme: dict[SchemeId, int] = {}
    for s in ledger.statements:
        receipt = s.disbursement
        if receipt is None or receipt.status is not ReceiptStatus.PAID:
            continue
        total += receipt.amount
        per_agent[s.agent_id] = per_agent.get(s.agent_id, 0) + receipt.amount
        per_scheme[s.scheme_id] = per_scheme.get(s.scheme_id, 0) + receipt.amount
    return SpendSummary(total=total, per_agent=per_agent, per_scheme=per_scheme)
