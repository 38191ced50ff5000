"""Independent brute-force oracles used to check the library.

Everything here recomputes expected values the slow, explicit way —
per-ordinal walks with mutable batch state, exhaustive tallies — and
stays independent of the code paths it checks.
"""

from __future__ import annotations

from cropsense.incentives import SchemeConfig


def ordinal_prices(scheme: SchemeConfig, n_max: int) -> list[int]:
    """Price of every ordinal 1..n_max via a stateful per-ordinal walk.

    Walks reports one by one, tracking the open batch's start, size, and
    index by hand; batch size re-reads the stage table whenever a new
    batch opens.
    """
    prices = [0]  # index 0 unused
    batch_index = 0
    batch_start = scheme.first_batch_size + 1
    batch_size = _stage_size(scheme, batch_start)
    fill = 0
    for k in range(1, n_max + 1):
        if k <= scheme.first_batch_size:
            price = scheme.base_price
        else:
            if fill == 0:
                batch_index += 1
            price = scheme.base_price + scheme.increment * batch_index
            if scheme.price_cap_ordinal is not None:
                if k > scheme.price_cap_ordinal:
                    price = scheme.capped_price
                else:
                    price = min(price, scheme.capped_price)
            fill += 1
            if fill == batch_size:
                batch_start += batch_size
                batch_size = _stage_size(scheme, batch_start)
                fill = 0
        if scheme.payment_cap_ordinal is not None and k > scheme.payment_cap_ordinal:
            price = 0
        prices.append(price)
    return prices


def _stage_size(scheme: SchemeConfig, ordinal: int) -> int:
    size = scheme.batch_size_stages[0].batch_size
    for stage in scheme.batch_size_stages:
        if stage.from_ordinal <= ordinal:
            size = stage.batch_size
    return size


def vested_boundaries(scheme: SchemeConfig, n: int) -> list[int]:
    """Every batch-completion ordinal <= n, walking batches one at a time."""
    bounds = []
    if n >= scheme.first_batch_size:
        bounds.append(scheme.first_batch_size)
        pos = scheme.first_batch_size + 1
        while True:
            size = _stage_size(scheme, pos)
            if pos + size - 1 > n:
                break
            bounds.append(pos + size - 1)
            pos += size
    return bounds


def payout_total(scheme: SchemeConfig, n: int) -> int:
    """Single-scheme, single-period payout for a gap-free history of n reports.

    The lump substitutes for ordinals 1..first_batch_size; everything else
    is the per-ordinal price sum over completed batches; a flat settlement
    replaces pricing beyond the scheme's per-period threshold.
    """
    flat_extra = 0
    if scheme.flat_settlement is not None and n > scheme.flat_settlement.threshold:
        flat_extra = scheme.flat_settlement.amount
        n = scheme.flat_settlement.threshold

    bounds = vested_boundaries(scheme, n)
    if not bounds:
        return flat_extra
    vested = bounds[-1]
    prices = ordinal_prices(scheme, vested)
    total = scheme.first_batch_lump
    for k in range(scheme.first_batch_size + 1, vested + 1):
        total += prices[k]
    return total + flat_extra


def carried_over(scheme: SchemeConfig, n: int) -> int:
    """Unvested report count for a single-period history of n reports."""
    if scheme.flat_settlement is not None and n > scheme.flat_settlement.threshold:
        n = scheme.flat_settlement.threshold
    bounds = vested_boundaries(scheme, n)
    return n - (bounds[-1] if bounds else 0)


def plurality_winner(votes: dict[str, str]) -> str:
    """Exhaustive tally; ties broken by the byte-lowest winner id."""
    best: str | None = None
    best_count = -1
    for candidate in set(votes.values()):
        count = sum(1 for v in votes.values() if v == candidate)
        if count > best_count or (
            count == best_count and candidate.encode() < best.encode()  # type: ignore[union-attr]
        ):
            best, best_count = candidate, count
    assert best is not None
    return best
