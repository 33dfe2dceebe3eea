"""Single-partition logic driven through the main index.

Routing is read-only. Index evolution goes through three steps: ``evaluate``
proposes splits and replacements, ``schedule_update`` turns a proposal into a
future-dated update, and ``apply_due_updates`` makes due updates take effect.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Mapping, Sequence

from .errors import DegenerateSplitError, DuplicateCloseError, IndexCorruptionError, UsageError
from .model import (
    MainIndex,
    PartitionConfig,
    Range,
    Replica,
    ScheduledUpdate,
    TableDescriptor,
    TableState,
    TimeInterval,
    TrackPoint,
    bisect,
    contains,
    intersects,
    intersects_time,
)

logger = logging.getLogger(__name__)

SPLIT = "split"
REPLACE = "replace"


@dataclass(frozen=True)
class TableStats:
    table_id: int
    record_count: int
    opened_at: int

    def age(self, now: int) -> int:
        return max(0, now - self.opened_at)


@dataclass(frozen=True)
class Proposal:
    kind: str
    table_id: int
    ranges: tuple[Range, ...]


def route_catalog(index: MainIndex, point: TrackPoint, now: int) -> int:
    """Return the id of the single LIVE table that should catalog ``point``."""
    if index.pending and index.pending[0].effective_at <= now:
        raise IndexCorruptionError(
            f"index has updates due at {index.pending[0].effective_at} that were not applied by {now}"
        )
    for d in index.live():
        if contains(d.range, point):
            if d.opened_at > now:
                raise IndexCorruptionError(f"table {d.table_id} is LIVE before it opens")
            return d.table_id
    raise IndexCorruptionError(f"no LIVE table contains {point}")


def route_query(index: MainIndex, q_range: Range, q_time: TimeInterval) -> set[int]:
    """Tables (LIVE or CLOSED, never ARCHIVED) that may hold matching records."""
    return {
        d.table_id
        for d in index.descriptors.values()
        if d.state is not TableState.ARCHIVED
        and intersects(d.range, q_range)
        and intersects_time(d.time_range, q_time)
    }


def evaluate(index: MainIndex, stats: Iterable[TableStats] | Mapping[int, TableStats],
             config: PartitionConfig, now: int) -> list[Proposal]:
    """Propose splits for dense tables and replacements for old ones.

    A table splits once it holds more than the optimum count. Otherwise it is
    replaced when it will have reached the optimum age by the time an update
    scheduled now takes effect, so no table stays live longer than that age.
    Tables that already have a close pending are skipped.
    """
    by_id = dict(stats) if isinstance(stats, Mapping) else {s.table_id: s for s in stats}
    pending = index.pending_closes()
    proposals = []
    for d in index.live():
        if d.table_id in pending:
            continue
        try:
            s = by_id[d.table_id]
        except KeyError:
            raise UsageError(f"no stats for LIVE table {d.table_id}") from None
        if s.record_count > config.optimum_count:
            try:
                proposals.append(Proposal(SPLIT, d.table_id, bisect(d.range)))
                continue
            except DegenerateSplitError:
                logger.debug("table %s cannot split further; rotating it instead", d.table_id)
                proposals.append(Proposal(REPLACE, d.table_id, (d.range,)))
                continue
        if s.age(now) + config.update_lead >= config.optimum_age:
            proposals.append(Proposal(REPLACE, d.table_id, (d.range,)))
    return proposals


def schedule_update(index: MainIndex, proposal: Proposal, placements: Sequence[Sequence[str]],
                    now: int, config: PartitionConfig) -> ScheduledUpdate:
    """Queue ``proposal`` to take effect ``config.update_lead`` ticks from now."""
    source = index.get(proposal.table_id)
    if source.state is not TableState.LIVE:
        raise UsageError(f"table {proposal.table_id} is {source.state.value}, not LIVE")
    if proposal.table_id in index.pending_closes():
        raise DuplicateCloseError(f"table {proposal.table_id} already has a pending close")
    if len(placements) != len(proposal.ranges):
        raise UsageError(f"{len(placements)} placements for {len(proposal.ranges)} new tables")
    for nodes in placements:
        if len(nodes) != config.replication_factor or len(set(nodes)) != len(nodes):
            raise UsageError(f"placement {list(nodes)} is not {config.replication_factor} distinct nodes")

    effective = now + config.update_lead
    opens = []
    for offset, (rng, nodes) in enumerate(zip(proposal.ranges, placements)):
        opens.append(TableDescriptor(
            table_id=index.next_table_id + offset,
            range=rng,
            state=TableState.LIVE,
            time_range=TimeInterval(effective),
            replicas=tuple(Replica(n) for n in nodes),
            opened_at=effective,
            parent_id=proposal.table_id,
        ))
    update = ScheduledUpdate(effective, (proposal.table_id,), tuple(opens), proposal.kind, now)
    index.enqueue(update)
    return update


def apply_due_updates(index: MainIndex, now: int) -> list[ScheduledUpdate]:
    """Apply every pending update whose effective tick has arrived."""
    due = [u for u in index.pending if u.effective_at <= now]
    if not due:
        return []
    index.pending = [u for u in index.pending if u.effective_at > now]
    for update in due:
        for tid in update.closes:
            d = index.get(tid)
            if d.state is TableState.LIVE:
                index.put(replace(
                    d,
                    state=TableState.CLOSED,
                    time_range=TimeInterval(d.time_range.start, update.effective_at),
                ))
        for d in update.opens:
            index.put(d)
    return due


def force_age_out(index: MainIndex, placements_provider: Callable[[int], Sequence[Sequence[str]]],
                  now: int, config: PartitionConfig) -> list[ScheduledUpdate]:
    """Schedule a replacement for every LIVE table regardless of age or size.

    ``placements_provider(n)`` returns one replica set per new table; it is
    called once so that sibling placements can be balanced together.
    """
    pending = index.pending_closes()
    proposals = [
        Proposal(REPLACE, d.table_id, (d.range,)) for d in index.live() if d.table_id not in pending
    ]
    if not proposals:
        return []
    placements = placements_provider(len(proposals))
    return [
        schedule_update(index, p, [nodes], now, config)
        for p, nodes in zip(proposals, placements)
    ]


def receive_update(index: MainIndex, update: ScheduledUpdate) -> bool:
    """Accept an update broadcast by another node.

    Returns False when the update is already known. Conflicting updates
    (same table closed twice, or clashing table ids) keep whichever was
    issued first, with the lowest new table id breaking ties, so every node
    converges on the same choice regardless of delivery order.
    """
    if update in index.pending:
        return False
    # Already applied here, or its ids collide with tables that exist.
    if any(d.table_id in index.descriptors for d in update.opens):
        return False
    new_ids = {d.table_id for d in update.opens}
    rivals = [
        u for u in index.pending
        if set(u.closes) & set(update.closes) or {d.table_id for d in u.opens} & new_ids
    ]
    for rival in rivals:
        if _priority(rival) <= _priority(update):
            return False
    for rival in rivals:
        index.pending.remove(rival)
    index.enqueue(update)
    return True


def _priority(update: ScheduledUpdate) -> tuple:
    return (update.issued_at, min((d.table_id for d in update.opens), default=0), update.closes)
