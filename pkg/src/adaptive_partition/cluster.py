"""Deterministic logical-clock simulation of a replicated adaptive partition.

Each node keeps its own copy of the main index and its own table stores.
Index updates and replicated records travel as messages with a delivery
tick. One tick of :meth:`Cluster.step` does, in order:

1. the coordinator (lowest online node id) evaluates the tick that is
   ending and broadcasts any new future-dated updates;
2. the clock advances;
3. messages due by the new tick are delivered;
4. every online node applies the index updates that are now due.

Catalogs and queries issued between steps run at the current tick.
"""

from __future__ import annotations

import heapq
import json
import logging
import random
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable, Optional, Union

from . import codec
from .engine import (
    REPLACE,
    SPLIT,
    TableStats,
    apply_due_updates,
    evaluate,
    force_age_out,
    receive_update,
    route_catalog,
    route_query,
    schedule_update,
)
from .errors import (
    ConfigError,
    DuplicateNodeError,
    NodeOfflineError,
    OutOfOrderError,
    PlacementError,
    TableUnavailableError,
    UnknownNodeError,
)
from .model import (
    MainIndex,
    PartitionConfig,
    Range,
    ScheduledUpdate,
    TableDescriptor,
    TableState,
    TimeInterval,
    TrackPoint,
)
from .placement import ServerInfo, place_replicas, server_loads
from .storage import ArchiveFile, TableStore, archive_table, restore_table

logger = logging.getLogger(__name__)

RECORD = "record"
UPDATE = "update"
REPAIR = "repair"


@dataclass
class Node:
    node_id: str
    location: str
    index: MainIndex
    online: bool = True
    # Only admitted nodes receive new table placements; joining or restored
    # nodes wait for the next forced age-out.
    admitted: bool = True
    stores: dict[int, TableStore] = field(default_factory=dict)

    def info(self) -> ServerInfo:
        return ServerInfo(self.node_id, self.location, self.online)

    def store(self, table_id: int) -> TableStore:
        store = self.stores.get(table_id)
        if store is None:
            store = self.stores[table_id] = TableStore(table_id)
        return store


@dataclass(order=True)
class Message:
    deliver_at: int
    seq: int
    dest: str = field(compare=False)
    kind: str = field(compare=False)
    payload: Any = field(compare=False)


@dataclass(frozen=True)
class CatalogAck:
    table_id: int
    local_append: bool
    messages: int
    skipped: tuple[str, ...] = ()


NodeLike = Union[ServerInfo, tuple[str, str]]


def parse_nodes(roster: str) -> list[ServerInfo]:
    """Parse ``"n1:east,n2:east,n3:west"`` into server descriptions."""
    servers = []
    for item in roster.split(","):
        item = item.strip()
        if not item:
            continue
        node_id, sep, location = item.partition(":")
        if not sep or not node_id or not location:
            raise ConfigError(f"roster entry {item!r} must look like id:location")
        servers.append(ServerInfo(node_id, location))
    if not servers:
        raise ConfigError("at least one node is required")
    return servers


class Cluster:
    """A multi-node adaptive partition driven by a logical clock."""

    def __init__(self, config: PartitionConfig, nodes: Iterable[NodeLike], *, seed: int = 0,
                 sync_delay: Union[int, tuple[int, int]] = 1, evaluate_every: int = 1):
        self.config = config
        lo, hi = (sync_delay, sync_delay) if isinstance(sync_delay, int) else tuple(sync_delay)
        if lo < 1 or hi < lo:
            raise ConfigError(f"sync delay range ({lo}, {hi}) must satisfy 1 <= min <= max")
        if config.update_lead < hi:
            logger.warning("update lead %d is shorter than the maximum sync delay %d; "
                           "nodes may apply updates late", config.update_lead, hi)
        if evaluate_every < 1:
            raise ConfigError("evaluate_every must be at least 1")
        self.sync_delay = (lo, hi)
        self.evaluate_every = evaluate_every
        self.seed = seed
        self.now = 0
        self.nodes: dict[str, Node] = {}
        self.messages: list[Message] = []
        self.journal: list[str] = []
        self.counters: Counter = Counter()
        self._seq = 0
        self._rng = random.Random(seed)

        servers = [s if isinstance(s, ServerInfo) else ServerInfo(*s) for s in nodes]
        if len({s.node_id for s in servers}) != len(servers):
            raise DuplicateNodeError("node ids must be unique")
        placement = place_replicas(1, servers, {}, config)[0] if servers else []
        root = MainIndex.fresh(config.key_space, placement)
        for s in servers:
            self.nodes[s.node_id] = Node(s.node_id, s.location, root.copy())
        for nid in placement:
            self.nodes[nid].store(1)

    # ----------------------------------------------------------------- helpers

    def _node(self, node_id: str) -> Node:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNodeError(f"unknown node {node_id!r}") from None

    def online_ids(self) -> list[str]:
        return sorted(nid for nid, n in self.nodes.items() if n.online)

    def coordinator_id(self) -> Optional[str]:
        online = self.online_ids()
        return online[0] if online else None

    def coordinator_index(self) -> MainIndex:
        cid = self.coordinator_id()
        if cid is None:
            raise NodeOfflineError("no node is online")
        return self.nodes[cid].index

    def _log(self, text: str) -> None:
        self.journal.append(f"t={self.now} {text}")

    def drain_journal(self) -> list[str]:
        lines, self.journal = self.journal, []
        return lines

    def _send(self, dest: str, kind: str, payload: Any) -> None:
        lo, hi = self.sync_delay
        delay = lo if lo == hi else self._rng.randint(lo, hi)
        self._seq += 1
        heapq.heappush(self.messages, Message(self.now + delay, self._seq, dest, kind, payload))
        self.counters["sent"] += 1

    def _broadcast(self, update: ScheduledUpdate, origin: str) -> None:
        for nid in self.online_ids():
            if nid != origin:
                self._send(nid, UPDATE, update)

    def table_stats(self, index: Optional[MainIndex] = None) -> dict[int, TableStats]:
        """Monitoring snapshot: the largest replica count seen for every LIVE table."""
        if index is None:
            index = self.coordinator_index()
        stats = {}
        for d in index.live():
            count = max(
                (len(self.nodes[r.node_id].stores.get(d.table_id, ()))
                 for r in d.replicas if r.node_id in self.nodes and self.nodes[r.node_id].online),
                default=0,
            )
            stats[d.table_id] = TableStats(d.table_id, count, d.opened_at)
        return stats

    def server_loads(self) -> dict[str, float]:
        index = self.coordinator_index()
        servers = [n.info() for _, n in sorted(self.nodes.items()) if n.online]
        return server_loads(servers, index, self.table_stats(index), self.config, self.now)

    def _place(self, count: int, index: MainIndex, stats: dict[int, TableStats]) -> list[list[str]]:
        servers = [n.info() for _, n in sorted(self.nodes.items()) if n.online and n.admitted]
        loads = server_loads(servers, index, stats, self.config, self.now)
        return place_replicas(count, servers, loads, self.config)

    def _serving_replica(self, d: TableDescriptor) -> Optional[str]:
        for r in sorted(d.replicas, key=lambda r: r.node_id):
            node = self.nodes.get(r.node_id)
            if node is not None and node.online and not r.offline:
                return r.node_id
        return None

    def _update_everywhere(self, descriptor: TableDescriptor) -> None:
        for nid in self.online_ids():
            self.nodes[nid].index.put(descriptor)

    # -------------------------------------------------------------- clock

    def step(self) -> "Cluster":
        cid = self.coordinator_id()
        if cid is not None and self.now % self.evaluate_every == 0:
            self._coordinate(cid)
        self.now += 1
        self._deliver_due()
        self._apply_due()
        return self

    def run_until(self, tick: int) -> "Cluster":
        while self.now < tick:
            self.step()
        return self

    def _coordinate(self, cid: str) -> list[ScheduledUpdate]:
        index = self.nodes[cid].index
        stats = self.table_stats(index)
        proposals = evaluate(index, stats, self.config, self.now)
        if not proposals:
            return []
        try:
            placements = self._place(sum(len(p.ranges) for p in proposals), index, stats)
        except PlacementError as exc:
            self._log(f"PLACEMENT-FAILED {exc}")
            return []
        updates = []
        offset = 0
        for proposal in proposals:
            n = len(proposal.ranges)
            update = schedule_update(index, proposal, placements[offset:offset + n], self.now, self.config)
            offset += n
            self._broadcast(update, cid)
            self._log_schedule(update)
            updates.append(update)
        return updates

    def _log_schedule(self, update: ScheduledUpdate) -> None:
        opens = ",".join(
            f"{d.table_id}@{'+'.join(d.replica_nodes)}" for d in update.opens
        )
        closes = ",".join(str(t) for t in update.closes)
        self._log(f"SCHEDULE {update.kind} close={closes} open={opens} effective={update.effective_at}")

    def _deliver_due(self) -> None:
        while self.messages and self.messages[0].deliver_at <= self.now:
            msg = heapq.heappop(self.messages)
            node = self.nodes[msg.dest]
            if not node.online:
                self.counters["dropped"] += 1
                continue
            self.counters["delivered"] += 1
            if msg.kind == RECORD:
                self._deliver_record(node, *msg.payload)
            elif msg.kind == UPDATE:
                receive_update(node.index, msg.payload)
            elif msg.kind == REPAIR:
                self._deliver_repair(node, *msg.payload)

    def _deliver_record(self, node: Node, table_id: int, point: TrackPoint) -> None:
        d = node.index.descriptors.get(table_id)
        if d is not None and d.state is TableState.ARCHIVED:
            return
        if node.store(table_id).append(point):
            self.counters["appends"] += 1
            if d is not None and d.flagged(node.node_id):
                self.counters["flagged_appends"] += 1

    def _deliver_repair(self, node: Node, table_id: int, source: str) -> None:
        # The copy is pulled from the source's store as it stands at delivery.
        d = node.index.descriptors.get(table_id)
        src = self.nodes.get(source)
        if d is None or d.state is not TableState.CLOSED or src is None or not src.online:
            return
        store = node.store(table_id)
        for record in src.stores.get(table_id, ()):
            store.append(record)
        for nid in self.online_ids():
            index = self.nodes[nid].index
            if table_id in index.descriptors:
                index.put(index.descriptors[table_id].with_flag(node.node_id, False))
        self._log(f"REPAIR table={table_id} node={node.node_id} from={source} records={len(store)}")

    def _apply_due(self) -> None:
        applied: dict[tuple, tuple[ScheduledUpdate, list[str]]] = {}
        for nid in self.online_ids():
            node = self.nodes[nid]
            for update in apply_due_updates(node.index, self.now):
                for d in update.opens:
                    if nid in d.replica_nodes:
                        node.store(d.table_id)
                applied.setdefault(update.key, (update, []))[1].append(nid)
        for key in sorted(applied):
            update, nids = applied[key]
            closes = ",".join(str(t) for t in update.closes)
            opens = ",".join(str(d.table_id) for d in update.opens)
            self._log(f"APPLY {update.kind} close={closes} open={opens} nodes={','.join(nids)}")

    # ------------------------------------------------------------ requests

    def catalog(self, entry_node: str, point: TrackPoint) -> CatalogAck:
        """Write one record through ``entry_node``.

        Acknowledges after the local append (when the entry node holds a
        replica) and after enqueueing replication to the other valid
        replicas; replication is asynchronous.
        """
        node = self._node(entry_node)
        if not node.online:
            raise NodeOfflineError(f"node {entry_node} is offline")
        if point.reported_at != self.now:
            raise OutOfOrderError(
                f"record reported at {point.reported_at} cannot be cataloged at tick {self.now}"
            )
        table_id = route_catalog(node.index, point, self.now)
        d = node.index.get(table_id)
        targets = [
            r.node_id for r in d.replicas
            if not r.offline and r.node_id in self.nodes and self.nodes[r.node_id].online
        ]
        skipped = tuple(r.node_id for r in d.replicas if r.node_id not in targets)
        if not targets:
            raise TableUnavailableError(table_id, f"table {table_id} has no replica valid for cataloging")
        local = entry_node in targets
        if local and node.store(table_id).append(point):
            self.counters["appends"] += 1
        for nid in targets:
            if nid != entry_node:
                self._send(nid, RECORD, (table_id, point))
        self.counters["cataloged"] += 1
        return CatalogAck(table_id, local, len(targets) - int(local), skipped)

    def query(self, entry_node: str, q_range: Range, q_time: TimeInterval) -> list[TrackPoint]:
        """Fan a query out to one replica per routed table and collate the rows.

        Each table is read from its lowest-id online, unflagged replica as
        that replica stands now; rows are deduplicated by record_key and
        sorted by (reported_at, device_id).
        """
        node = self._node(entry_node)
        if not node.online:
            raise NodeOfflineError(f"node {entry_node} is offline")
        rows: dict[str, TrackPoint] = {}
        for table_id in sorted(route_query(node.index, q_range, q_time)):
            d = node.index.get(table_id)
            source = self._serving_replica(d)
            if source is None:
                raise TableUnavailableError(table_id)
            store = self.nodes[source].stores.get(table_id)
            if store is None:
                continue
            for record in store.scan(q_range, q_time):
                rows[record.record_key] = record
        return sorted(rows.values(), key=lambda r: (r.reported_at, r.device_id, r.record_key))

    # ------------------------------------------------------------ membership

    def fail_node(self, node_id: str) -> int:
        """Take a node offline and flag its replicas; returns the number flagged."""
        node = self._node(node_id)
        if not node.online:
            return 0
        node.online = False
        kept = []
        for msg in self.messages:
            if msg.dest == node_id:
                self.counters["dropped"] += 1
            else:
                if msg.kind == UPDATE:
                    msg.payload = _flag_update(msg.payload, node_id)
                kept.append(msg)
        heapq.heapify(kept)
        self.messages = kept
        flagged = 0
        for nid in sorted(self.nodes):
            count = _flag_index(self.nodes[nid].index, node_id)
            if nid == self.coordinator_id():
                flagged = count
        self._log(f"FAIL {node_id} flagged={flagged}")
        return flagged

    def restore_node(self, node_id: str) -> int:
        """Bring a node back with a fresh index copy; returns the repairs started.

        Replicas flagged while it was away stay flagged for cataloging.
        Replicas of tables that have since closed are back-filled from a
        working replica and unflagged once the copy arrives.
        """
        node = self._node(node_id)
        if node.online:
            return 0
        cid = self.coordinator_id()
        node.online = True
        node.admitted = False
        if cid is not None:
            node.index = self.nodes[cid].index.copy()
        for tid in list(node.stores):
            d = node.index.descriptors.get(tid)
            if d is None or d.state is TableState.ARCHIVED:
                del node.stores[tid]
        repairs = 0
        for tid, d in sorted(node.index.descriptors.items()):
            if d.state is TableState.CLOSED and d.flagged(node_id):
                source = self._serving_replica(d)
                if source is not None:
                    self._send(node_id, REPAIR, (tid, source))
                    repairs += 1
        self._log(f"RESTORE {node_id} repairs={repairs}")
        return repairs

    def add_node(self, node_id: str, location: str) -> "Cluster":
        if node_id in self.nodes:
            raise DuplicateNodeError(f"node {node_id} already exists")
        ServerInfo(node_id, location)
        cid = self.coordinator_id()
        if cid is not None:
            index = self.nodes[cid].index.copy()
        else:
            index = MainIndex.fresh(self.config.key_space, [])
        self.nodes[node_id] = Node(node_id, location, index, admitted=False)
        self._log(f"ADD {node_id} {location}")
        return self

    def force_age_out(self) -> list[ScheduledUpdate]:
        """Admit waiting nodes and schedule a replacement for every LIVE table."""
        for nid in self.online_ids():
            self.nodes[nid].admitted = True
        cid = self.coordinator_id()
        if cid is None:
            return []
        index = self.nodes[cid].index
        stats = self.table_stats(index)
        try:
            updates = force_age_out(
                index, lambda n: self._place(n, index, stats), self.now, self.config
            )
        except PlacementError as exc:
            self._log(f"PLACEMENT-FAILED {exc}")
            return []
        for update in updates:
            self._broadcast(update, cid)
            self._log_schedule(update)
        self._log(f"FORCE_AGEOUT scheduled={len(updates)}")
        return updates

    # ------------------------------------------------------------ archival

    def archive_table(self, table_id: int, retention: Optional[int] = None) -> ArchiveFile:
        index = self.coordinator_index()
        d = index.get(table_id)
        source = self._serving_replica(d)
        if source is None and d.state is TableState.CLOSED:
            raise TableUnavailableError(table_id)
        store = self.nodes[source].stores.get(table_id) if source else None
        store = store if store is not None else TableStore(table_id)
        retention = self.config.retention if retention is None else retention
        archive = archive_table(index, store, retention, self.now)
        self._update_everywhere(index.get(table_id))
        for node in self.nodes.values():
            node.stores.pop(table_id, None)
        self._log(f"ARCHIVE table={table_id} records={len(archive.records)}")
        return archive

    def restore_table(self, archive: ArchiveFile) -> int:
        """Restore an archived table onto a single online replica."""
        index = self.coordinator_index()
        existing = index.descriptors.get(archive.table_id)
        target = None
        if existing is not None:
            target = next((r.node_id for r in sorted(existing.replicas, key=lambda r: r.node_id)
                           if r.node_id in self.nodes and self.nodes[r.node_id].online), None)
        if target is None:
            loads = self.server_loads()
            target = min(self.online_ids(), key=lambda nid: (loads.get(nid, 0.0), nid))
        table_id, store = restore_table(index, archive, replicas=(target,))
        self._update_everywhere(index.get(table_id))
        self.nodes[target].stores[table_id] = store
        self._log(f"RESTORE-TABLE table={table_id} node={target} records={len(store)}")
        return table_id

    # ------------------------------------------------------------ inspection

    def check_convergence(self) -> bool:
        """True once replication has quiesced and every online node agrees."""
        if self.messages:
            return False
        online = [self.nodes[nid] for nid in self.online_ids()]
        if not online:
            return True
        for node in online:
            if any(u.effective_at <= self.now for u in node.index.pending):
                return False
        reference = online[0].index.structure()
        if any(node.index.structure() != reference for node in online[1:]):
            return False
        for d in reference[0]:
            if d.state is TableState.ARCHIVED:
                continue
            key_sets = {
                self.nodes[r.node_id].stores[d.table_id].keys()
                if d.table_id in self.nodes[r.node_id].stores else frozenset()
                for r in d.replicas
                if not r.offline and r.node_id in self.nodes and self.nodes[r.node_id].online
            }
            if len(key_sets) > 1:
                return False
        return True

    def quiesce(self, max_steps: int = 1000) -> int:
        """Step until converged; returns the number of steps taken."""
        steps = 0
        while not self.check_convergence():
            if steps >= max_steps:
                raise RuntimeError(f"cluster did not converge within {max_steps} steps")
            self.step()
            steps += 1
        return steps

    def record_count(self, d: TableDescriptor) -> int:
        if d.state is TableState.ARCHIVED:
            return d.record_count
        return max(
            (len(self.nodes[r.node_id].stores.get(d.table_id, ()))
             for r in d.replicas if r.node_id in self.nodes),
            default=d.record_count,
        )

    def event_counts(self) -> dict[str, int]:
        """Splits and age-outs that have taken effect, read off the index lineage."""
        index = self.coordinator_index()
        children: Counter = Counter(
            d.parent_id for d in index.descriptors.values() if d.parent_id is not None
        )
        return {
            SPLIT: sum(1 for n in children.values() if n > 1),
            REPLACE: sum(1 for n in children.values() if n == 1),
        }

    def dump_index_lines(self, node_id: Optional[str] = None) -> list[str]:
        """One line per descriptor: id state range start end count replicas."""
        index = self._node(node_id).index if node_id else self.coordinator_index()
        lines = []
        for tid, d in sorted(index.descriptors.items()):
            end = "OPEN" if d.time_range.end is None else str(d.time_range.end)
            replicas = ",".join(r.node_id + ("!" if r.offline else "") for r in d.replicas) or "-"
            lines.append(
                f"{tid} {d.state.value} {d.range} {d.time_range.start} {end} "
                f"{self.record_count(d)} {replicas}"
            )
        return lines

    # --------------------------------------------------------- serialization

    def to_dict(self) -> dict[str, Any]:
        return {
            "config": asdict(self.config),
            "now": self.now,
            "seed": self.seed,
            "sync_delay": list(self.sync_delay),
            "evaluate_every": self.evaluate_every,
            "seq": self._seq,
            "rng": _rng_state_to_json(self._rng.getstate()),
            "counters": dict(sorted(self.counters.items())),
            "nodes": [
                {
                    "id": n.node_id,
                    "location": n.location,
                    "online": n.online,
                    "admitted": n.admitted,
                    "index": codec.index_to_dict(n.index),
                    "stores": {
                        str(tid): [codec.point_to_list(p) for p in store]
                        for tid, store in sorted(n.stores.items())
                    },
                }
                for _, n in sorted(self.nodes.items())
            ],
            "messages": [_message_to_dict(m) for m in sorted(self.messages)],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Cluster":
        config = PartitionConfig(**data["config"])
        cluster = cls.__new__(cls)
        cluster.config = config
        cluster.now = data["now"]
        cluster.seed = data["seed"]
        cluster.sync_delay = tuple(data["sync_delay"])
        cluster.evaluate_every = data["evaluate_every"]
        cluster._seq = data["seq"]
        cluster._rng = random.Random()
        cluster._rng.setstate(_rng_state_from_json(data["rng"]))
        cluster.counters = Counter(data["counters"])
        cluster.journal = []
        cluster.nodes = {}
        for nd in data["nodes"]:
            node = Node(nd["id"], nd["location"], codec.index_from_dict(nd["index"]),
                        nd["online"], nd["admitted"])
            for tid, rows in nd["stores"].items():
                node.stores[int(tid)] = TableStore(int(tid), (codec.point_from_list(r) for r in rows))
            cluster.nodes[node.node_id] = node
        cluster.messages = [_message_from_dict(m) for m in data["messages"]]
        heapq.heapify(cluster.messages)
        return cluster

    @classmethod
    def loads(cls, text: str) -> "Cluster":
        return cls.from_dict(json.loads(text))

    def __repr__(self) -> str:
        return (f"Cluster(now={self.now}, nodes={self.online_ids()}, "
                f"in_flight={len(self.messages)})")


def replay(cluster: Cluster, points: Iterable[TrackPoint], *, quiesce: bool = True,
           settle: bool = False) -> int:
    """Catalog ``points`` in time order, stepping the clock to each report time.

    Entry nodes rotate round-robin over the online nodes. With ``settle`` the
    tick of the last record is closed out and the clock runs one update lead
    further, so changes the final records triggered take effect. Returns the
    number of records cataloged.
    """
    count = 0
    for point in points:
        if point.reported_at < cluster.now:
            raise OutOfOrderError(
                f"record reported at {point.reported_at} arrived after tick {cluster.now}"
            )
        cluster.run_until(point.reported_at)
        online = cluster.online_ids()
        cluster.catalog(online[count % len(online)], point)
        count += 1
    if settle and count:
        cluster.run_until(cluster.now + 1 + cluster.config.update_lead)
    if quiesce:
        cluster.quiesce()
    return count


def _flag_index(index: MainIndex, node_id: str) -> int:
    flagged = 0
    for d in list(index.descriptors.values()):
        if any(r.node_id == node_id and not r.offline for r in d.replicas):
            index.put(d.with_flag(node_id, True))
            flagged += 1
    index.pending = [_flag_update(u, node_id) for u in index.pending]
    return flagged


def _flag_update(update: ScheduledUpdate, node_id: str) -> ScheduledUpdate:
    if not any(node_id in d.replica_nodes for d in update.opens):
        return update
    return ScheduledUpdate(
        update.effective_at,
        update.closes,
        tuple(d.with_flag(node_id, True) for d in update.opens),
        update.kind,
        update.issued_at,
    )


def _message_to_dict(m: Message) -> dict[str, Any]:
    if m.kind == RECORD:
        payload = [m.payload[0], codec.point_to_list(m.payload[1])]
    elif m.kind == UPDATE:
        payload = codec.update_to_dict(m.payload)
    else:
        payload = list(m.payload)
    return {"deliver_at": m.deliver_at, "seq": m.seq, "dest": m.dest, "kind": m.kind, "payload": payload}


def _message_from_dict(data: dict[str, Any]) -> Message:
    kind, raw = data["kind"], data["payload"]
    if kind == RECORD:
        payload = (raw[0], codec.point_from_list(raw[1]))
    elif kind == UPDATE:
        payload = codec.update_from_dict(raw)
    else:
        payload = (raw[0], raw[1])
    return Message(data["deliver_at"], data["seq"], data["dest"], kind, payload)


def _rng_state_to_json(state) -> list:
    version, internal, gauss = state
    return [version, list(internal), gauss]


def _rng_state_from_json(data) -> tuple:
    return (data[0], tuple(data[1]), data[2])
