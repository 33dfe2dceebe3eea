"""JSON-friendly encoding of index structures.

Floats are left to ``json`` which writes ``repr`` and therefore round-trips
exactly, including the pole sentinel.
"""

from __future__ import annotations

from typing import Any

from .model import (
    GeoBox,
    KeyRange,
    MainIndex,
    Range,
    Replica,
    ScheduledUpdate,
    TableDescriptor,
    TableState,
    TimeInterval,
    TrackPoint,
)


def range_to_dict(rng: Range) -> dict[str, Any]:
    if isinstance(rng, GeoBox):
        return {"kind": "geo", "bounds": list(rng.bounds())}
    return {"kind": "alpha", "low": rng.low, "high": rng.high}


def range_from_dict(data: dict[str, Any]) -> Range:
    if data["kind"] == "geo":
        return GeoBox(*data["bounds"])
    return KeyRange(data["low"], data["high"])


def point_to_list(p: TrackPoint) -> list:
    return [p.device_id, p.lat, p.lon, p.reported_at]


def point_from_list(data: list) -> TrackPoint:
    return TrackPoint(data[0], data[1], data[2], data[3])


def descriptor_to_dict(d: TableDescriptor) -> dict[str, Any]:
    return {
        "id": d.table_id,
        "range": range_to_dict(d.range),
        "state": d.state.value,
        "time": [d.time_range.start, d.time_range.end],
        "replicas": [[r.node_id, r.offline] for r in d.replicas],
        "opened_at": d.opened_at,
        "parent": d.parent_id,
        "count": d.record_count,
    }


def descriptor_from_dict(data: dict[str, Any]) -> TableDescriptor:
    return TableDescriptor(
        table_id=data["id"],
        range=range_from_dict(data["range"]),
        state=TableState(data["state"]),
        time_range=TimeInterval(*data["time"]),
        replicas=tuple(Replica(n, bool(off)) for n, off in data["replicas"]),
        opened_at=data["opened_at"],
        parent_id=data["parent"],
        record_count=data["count"],
    )


def update_to_dict(u: ScheduledUpdate) -> dict[str, Any]:
    return {
        "effective_at": u.effective_at,
        "closes": list(u.closes),
        "opens": [descriptor_to_dict(d) for d in u.opens],
        "kind": u.kind,
        "issued_at": u.issued_at,
    }


def update_from_dict(data: dict[str, Any]) -> ScheduledUpdate:
    return ScheduledUpdate(
        effective_at=data["effective_at"],
        closes=tuple(data["closes"]),
        opens=tuple(descriptor_from_dict(d) for d in data["opens"]),
        kind=data["kind"],
        issued_at=data["issued_at"],
    )


def index_to_dict(index: MainIndex) -> dict[str, Any]:
    return {
        "key_space": index.key_space,
        "next_table_id": index.next_table_id,
        "descriptors": [descriptor_to_dict(d) for _, d in sorted(index.descriptors.items())],
        "pending": [update_to_dict(u) for u in index.pending],
    }


def index_from_dict(data: dict[str, Any]) -> MainIndex:
    return MainIndex(
        data["key_space"],
        [descriptor_from_dict(d) for d in data["descriptors"]],
        [update_from_dict(u) for u in data["pending"]],
        data["next_table_id"],
    )
