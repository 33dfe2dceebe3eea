"""Per-table record stores and the archive file format.

Archive files are line-oriented text::

    APV1 <table_id> <range...> <t_start> <t_end> <count> <crc32-hex>
    device_id,lat,lon,reported_at
    ...

``<range...>`` is ``geo lat_min lat_max lon_min lon_max`` (floats written
with ``repr`` so they round-trip) or ``alpha LOW HIGH`` with ``TOP`` for an
open upper key. The checksum is the CRC-32 of the body bytes.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

from .errors import (
    ArchivedTableError,
    ArchiveFormatError,
    ChecksumMismatchError,
    IdConflictError,
    NotEligibleError,
)
from .model import (
    GeoBox,
    KeyRange,
    MainIndex,
    Range,
    Replica,
    TableDescriptor,
    TableState,
    TimeInterval,
    TrackPoint,
    contains,
)

MAGIC = "APV1"


class TableStore:
    """Append-only record list for one table, idempotent on record_key."""

    def __init__(self, table_id: int, records: Iterable[TrackPoint] = ()):
        self.table_id = table_id
        self.records: list[TrackPoint] = []
        self._keys: set[str] = set()
        self.archived = False
        for r in records:
            self.append(r)

    def append(self, record: TrackPoint) -> bool:
        """Add ``record``; returns False if it was already present."""
        if self.archived:
            raise ArchivedTableError(f"table {self.table_id} is archived")
        key = record.record_key
        if key in self._keys:
            return False
        self._keys.add(key)
        self.records.append(record)
        return True

    def scan(self, q_range: Range, q_time: TimeInterval) -> list[TrackPoint]:
        return [r for r in self.records if q_time.contains_tick(r.reported_at) and contains(q_range, r)]

    def keys(self) -> frozenset[str]:
        return frozenset(self._keys)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[TrackPoint]:
        return iter(self.records)

    def __repr__(self) -> str:
        return f"TableStore(table_id={self.table_id}, records={len(self.records)})"


def format_record(record: TrackPoint) -> str:
    return f"{record.device_id},{record.lat:.6f},{record.lon:.6f},{record.reported_at}"


def parse_record(line: str) -> TrackPoint:
    parts = line.split(",")
    if len(parts) != 4:
        raise ValueError(f"expected 4 comma-separated fields, got {len(parts)}")
    device, lat, lon, tick = (p.strip() for p in parts)
    return TrackPoint(device, float(lat), float(lon), int(tick))


def _format_range(rng: Range) -> str:
    return str(rng)


def _parse_range(tokens: Sequence[str]) -> tuple[Range, int]:
    if tokens and tokens[0] == "geo":
        lat_min, lat_max, lon_min, lon_max = (float(t) for t in tokens[1:5])
        return GeoBox(lat_min, lat_max, lon_min, lon_max), 5
    if tokens and tokens[0] == "alpha":
        low, high = tokens[1], tokens[2]
        return KeyRange(low, None if high == "TOP" else high), 3
    raise ArchiveFormatError(f"unknown range kind {tokens[:1]}")


@dataclass(frozen=True)
class ArchiveFile:
    table_id: int
    range: Range
    time_range: TimeInterval
    records: tuple[TrackPoint, ...]

    @property
    def body(self) -> str:
        return "".join(format_record(r) + "\n" for r in self.records)

    @property
    def checksum(self) -> str:
        return f"{zlib.crc32(self.body.encode('utf-8')):08x}"

    def dumps(self) -> str:
        header = " ".join([
            MAGIC,
            str(self.table_id),
            _format_range(self.range),
            str(self.time_range.start),
            str(self.time_range.end),
            str(len(self.records)),
            self.checksum,
        ])
        return header + "\n" + self.body

    def write(self, path) -> Path:
        path = Path(path)
        path.write_bytes(self.dumps().encode("utf-8"))
        return path

    @classmethod
    def loads(cls, text: str) -> "ArchiveFile":
        header, sep, body = text.partition("\n")
        tokens = header.split()
        if not tokens or tokens[0] != MAGIC:
            raise ArchiveFormatError("missing APV1 header")
        try:
            table_id = int(tokens[1])
            rng, used = _parse_range(tokens[2:])
            rest = tokens[2 + used:]
            start, end, count, checksum = int(rest[0]), int(rest[1]), int(rest[2]), rest[3]
        except (IndexError, ValueError) as exc:
            raise ArchiveFormatError(f"malformed header: {exc}") from exc
        actual = f"{zlib.crc32(body.encode('utf-8')):08x}"
        if actual != checksum.lower():
            raise ChecksumMismatchError(f"body checksum {actual} does not match header {checksum}")
        lines = body.splitlines()
        if len(lines) != count:
            raise ArchiveFormatError(f"header says {count} records, body has {len(lines)}")
        try:
            records = tuple(parse_record(line) for line in lines)
        except ValueError as exc:
            raise ArchiveFormatError(f"bad record: {exc}") from exc
        return cls(table_id, rng, TimeInterval(start, end), records)

    @classmethod
    def read(cls, path) -> "ArchiveFile":
        return cls.loads(Path(path).read_bytes().decode("utf-8"))


def archive_table(index: MainIndex, store: TableStore, retention: int, now: int) -> ArchiveFile:
    """Snapshot a closed table past its retention window and mark it ARCHIVED.

    The caller is expected to drop ``store`` afterwards; it is flagged so
    further appends fail.
    """
    d = index.get(store.table_id)
    if d.state is not TableState.CLOSED:
        raise NotEligibleError(f"table {d.table_id} is {d.state.value}")
    if d.time_range.end + retention > now:
        raise NotEligibleError(
            f"table {d.table_id} closed at {d.time_range.end} is retained until {d.time_range.end + retention}"
        )
    archive = ArchiveFile(d.table_id, d.range, d.time_range, tuple(store.records))
    index.put(replace(d, state=TableState.ARCHIVED, record_count=len(store)))
    store.archived = True
    return archive


def restore_table(index: MainIndex, archive: ArchiveFile,
                  replicas: Sequence[str] = ()) -> tuple[int, TableStore]:
    """Bring an archived table back as CLOSED and rebuild its store."""
    existing: Optional[TableDescriptor] = index.descriptors.get(archive.table_id)
    if existing is not None:
        if existing.state is not TableState.ARCHIVED:
            raise IdConflictError(f"table {archive.table_id} is already {existing.state.value}")
        if existing.range != archive.range or existing.time_range != archive.time_range:
            raise IdConflictError(f"archive for table {archive.table_id} does not match its descriptor")
        restored = replace(
            existing,
            state=TableState.CLOSED,
            replicas=tuple(Replica(n) for n in replicas) or existing.replicas,
            record_count=len(archive.records),
        )
    else:
        restored = TableDescriptor(
            table_id=archive.table_id,
            range=archive.range,
            state=TableState.CLOSED,
            time_range=archive.time_range,
            replicas=tuple(Replica(n) for n in replicas),
            opened_at=archive.time_range.start,
            record_count=len(archive.records),
        )
        index.next_table_id = max(index.next_table_id, archive.table_id + 1)
    index.put(restored)
    return archive.table_id, TableStore(archive.table_id, archive.records)
