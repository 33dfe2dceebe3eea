"""Load-factor arithmetic and replica placement for new tables.

A table's load factor compares how fast it actually grows with the rate a
table would grow at if it reached the optimum record count exactly at the
optimum age. Rates are plain floats (records per tick).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .engine import TableStats
from .errors import ConfigError, InsufficientLocationsError, InsufficientServersError
from .model import MainIndex, PartitionConfig

# Load a freshly placed table is assumed to add until it has stats of its own.
NEW_TABLE_LOAD = 1.0


@dataclass(frozen=True)
class ServerInfo:
    node_id: str
    location: str
    online: bool = True

    def __post_init__(self):
        if not self.node_id:
            raise ConfigError("node_id must be non-empty")
        if not self.location:
            raise ConfigError(f"node {self.node_id} needs a location")


def optimum_rate(config) -> float:
    if config.optimum_count <= 0 or config.optimum_age <= 0:
        raise ConfigError("optimum count and age must both be positive")
    return config.optimum_count / config.optimum_age


def growth_rate(stats: TableStats, now: int) -> float:
    # A table opened this tick has age 0; divide by one tick instead.
    return stats.record_count / max(stats.age(now), 1)


def load_factor(stats: TableStats, config, now: int) -> float:
    return growth_rate(stats, now) / optimum_rate(config)


def server_load(node_id: str, index: MainIndex, stats_set: Mapping[int, TableStats],
                config, now: int) -> float:
    """Sum of load factors over the LIVE tables with a working replica on ``node_id``."""
    total = 0.0
    for d in index.live():
        if any(r.node_id == node_id and not r.offline for r in d.replicas):
            stats = stats_set.get(d.table_id)
            if stats is not None:
                total += load_factor(stats, config, now)
    return total


def server_loads(servers: Iterable[ServerInfo], index: MainIndex, stats_set: Mapping[int, TableStats],
                 config, now: int) -> dict[str, float]:
    return {s.node_id: server_load(s.node_id, index, stats_set, config, now) for s in servers}


def place_replicas(new_table_count: int, servers: Sequence[ServerInfo], loads: Mapping[str, float],
                   config: PartitionConfig) -> list[list[str]]:
    """Choose K online nodes for each new table.

    Nodes are taken in order of (load, node_id), skipping a node only when
    its location is already covered and every remaining slot is needed to
    reach the required location count. After each table the chosen nodes'
    loads grow by ``NEW_TABLE_LOAD`` so siblings spread out. Each placement
    is returned sorted by node_id.
    """
    k, want_locations = config.replication_factor, config.location_count
    online = [s for s in servers if s.online]
    if len(online) < k:
        raise InsufficientServersError(f"need {k} online servers, have {len(online)}")
    if len({s.location for s in online}) < want_locations:
        raise InsufficientLocationsError(
            f"need {want_locations} locations, online servers span {len({s.location for s in online})}"
        )
    current = {s.node_id: float(loads.get(s.node_id, 0.0)) for s in online}
    placements = []
    for _ in range(new_table_count):
        ordered = sorted(online, key=lambda s: (current[s.node_id], s.node_id))
        chosen: list[ServerInfo] = []
        skipped: list[ServerInfo] = []
        for server in ordered:
            if len(chosen) == k:
                break
            covered = {c.location for c in chosen}
            still_needed = max(0, want_locations - len(covered))
            if server.location not in covered or k - len(chosen) > still_needed:
                chosen.append(server)
            else:
                skipped.append(server)
        for server in skipped:
            if len(chosen) == k:
                break
            chosen.append(server)
        for server in chosen:
            current[server.node_id] += NEW_TABLE_LOAD
        placements.append(sorted(s.node_id for s in chosen))
    return placements
