"""Event scripts for the cluster simulator.

One event per line; blank lines and ``#`` comments are ignored::

    TICK n                                  advance the clock to tick n
    CATALOG node lat lon device t           catalog a record reported at t
    QUERY node lat0 lat1 lon0 lon1 t0 t1    geo query (t1 may be OPEN)
    QUERY node LOW HIGH t0 t1               alphabet query (HIGH may be TOP)
    FAIL node | RESTORE node | ADD node location
    FORCE_AGEOUT
    QUIESCE                                 step until replication settles

``CATALOG`` advances the clock to ``t`` when ``t`` is in the future. The
run produces one log line per observable effect.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Optional

from .cluster import Cluster
from .errors import AdaptivePartitionError, ScriptError, TableUnavailableError
from .model import ALPHA, LAT_TOP, GeoBox, KeyRange, Range, TimeInterval, TrackPoint

ARITY = {
    "TICK": (1,),
    "CATALOG": (5,),
    "QUERY": (5, 7),
    "FAIL": (1,),
    "RESTORE": (1,),
    "ADD": (2,),
    "FORCE_AGEOUT": (0,),
    "QUIESCE": (0,),
}


@dataclass(frozen=True)
class Event:
    line: int
    op: str
    args: tuple


def query_box(lat_min: float, lat_max: float, lon_min: float, lon_max: float) -> GeoBox:
    """Build a query box; an upper latitude of 90 or more includes the pole."""
    return GeoBox(lat_min, LAT_TOP if lat_max >= 90.0 else lat_max, lon_min, lon_max)


def query_time(t0: int, t1: Optional[int]) -> TimeInterval:
    return TimeInterval(t0, t1)


def _tick(token: str) -> Optional[int]:
    if token.upper() == "OPEN":
        return None
    value = int(token)
    if value < 0:
        raise ValueError(f"negative tick {value}")
    return value


def parse_script(text: str, key_space: str = "geo") -> list[Event]:
    events = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        op, *args = line.split()
        op = op.upper()
        if op not in ARITY:
            raise ScriptError(f"unknown event {op!r}", lineno)
        if len(args) not in ARITY[op]:
            raise ScriptError(f"{op} takes {' or '.join(map(str, ARITY[op]))} arguments", lineno)
        try:
            events.append(Event(lineno, op, _convert(op, args, key_space)))
        except (ValueError, AdaptivePartitionError) as exc:
            raise ScriptError(str(exc), lineno) from exc
    return events


def _convert(op: str, args: list[str], key_space: str) -> tuple:
    if op == "TICK":
        return (int(args[0]),)
    if op == "CATALOG":
        node, lat, lon, device, t = args
        return (node, TrackPoint(device, float(lat), float(lon), int(t)))
    if op == "QUERY":
        node = args[0]
        if key_space == ALPHA:
            if len(args) != 5:
                raise ValueError("alphabet QUERY takes node LOW HIGH t0 t1")
            low, high = args[1].upper(), args[2].upper()
            rng: Range = KeyRange(low, None if high == "TOP" else high)
            t0, t1 = args[3], args[4]
        else:
            if len(args) != 7:
                raise ValueError("geo QUERY takes node lat0 lat1 lon0 lon1 t0 t1")
            rng = query_box(*(float(a) for a in args[1:5]))
            t0, t1 = args[5], args[6]
        start = _tick(t0)
        if start is None:
            raise ValueError("query start cannot be OPEN")
        return (node, rng, query_time(start, _tick(t1)))
    return tuple(args)


def result_digest(rows) -> str:
    body = "".join(r.record_key + "\n" for r in rows)
    return f"{zlib.crc32(body.encode('utf-8')):08x}"


def run_events(cluster: Cluster, events: list[Event]) -> list[str]:
    """Execute ``events`` against ``cluster`` and return the log lines."""
    log: list[str] = []

    def emit(text: str) -> None:
        log.extend(cluster.drain_journal())
        log.append(f"t={cluster.now} {text}")

    for ev in events:
        try:
            if ev.op == "TICK":
                (target,) = ev.args
                if target < cluster.now:
                    raise ScriptError(f"TICK {target} is in the past (now {cluster.now})", ev.line)
                cluster.run_until(target)
            elif ev.op == "CATALOG":
                node, point = ev.args
                if point.reported_at < cluster.now:
                    raise ScriptError(
                        f"record at {point.reported_at} is in the past (now {cluster.now})", ev.line
                    )
                cluster.run_until(point.reported_at)
                ack = cluster.catalog(node, point)
                emit(
                    f"CATALOG {node} {point.device_id} {point.lat:.6f} {point.lon:.6f} "
                    f"-> table={ack.table_id} local={int(ack.local_append)} sent={ack.messages}"
                )
            elif ev.op == "QUERY":
                node, rng, q_time = ev.args
                label = f"QUERY {node} {rng} {q_time}"
                try:
                    rows = cluster.query(node, rng, q_time)
                except TableUnavailableError as exc:
                    emit(f"{label} -> UNAVAILABLE table={exc.table_id}")
                else:
                    emit(f"{label} -> rows={len(rows)} digest={result_digest(rows)}")
            elif ev.op == "FAIL":
                cluster.fail_node(ev.args[0])
            elif ev.op == "RESTORE":
                cluster.restore_node(ev.args[0])
            elif ev.op == "ADD":
                cluster.add_node(*ev.args)
            elif ev.op == "FORCE_AGEOUT":
                cluster.force_age_out()
            elif ev.op == "QUIESCE":
                steps = cluster.quiesce()
                emit(f"QUIESCE steps={steps}")
        except ScriptError:
            raise
        except AdaptivePartitionError as exc:
            emit(f"REJECTED line={ev.line} {ev.op} {type(exc).__name__}: {exc}")
        log.extend(cluster.drain_journal())
    return log
