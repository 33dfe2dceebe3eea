"""Domain types for the main index and the pure range predicates over them.

Every interval in this module is half-open: lower bounds are inclusive and
upper bounds exclusive, for latitude, longitude, alphabet keys and ticks
alike. Latitude 90 is kept representable by giving the global box an upper
bound one ulp above 90 (``LAT_TOP``); for midpoint and area arithmetic that
sentinel is read back as exactly 90.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Union

from .errors import ConfigError, DegenerateSplitError, InvalidPointError, UsageError

LAT_TOP = math.nextafter(90.0, math.inf)
MIN_SPLIT_SPAN = 1e-6
ALPHABET = string.ascii_uppercase
OPEN = None

GEO = "geo"
ALPHA = "alpha"
KEY_SPACES = (GEO, ALPHA)


def _nominal_lat(value: float) -> float:
    return 90.0 if value == LAT_TOP else value


def quantize(degrees: float) -> float:
    """Round a coordinate to the micro-degree grid used by archive files."""
    return float(f"{degrees:.6f}")


@dataclass(frozen=True)
class TrackPoint:
    """One immutable device location report.

    Coordinates are quantized to six decimals on construction so that a
    record survives a text round trip with its ``record_key`` intact.
    """

    device_id: str
    lat: float
    lon: float
    reported_at: int

    def __post_init__(self):
        if not isinstance(self.device_id, str) or not self.device_id:
            raise InvalidPointError("device_id must be a non-empty string")
        if any(ch.isspace() or ch == "," for ch in self.device_id):
            raise InvalidPointError(f"device_id {self.device_id!r} contains a comma or whitespace")
        if isinstance(self.reported_at, bool) or not isinstance(self.reported_at, int):
            raise InvalidPointError(f"reported_at must be an integer tick, got {self.reported_at!r}")
        if self.reported_at < 0:
            raise InvalidPointError(f"reported_at must be non-negative, got {self.reported_at}")
        lat, lon = float(self.lat), float(self.lon)
        if not (math.isfinite(lat) and math.isfinite(lon)):
            raise InvalidPointError("coordinates must be finite")
        lat, lon = quantize(lat), quantize(lon)
        if not -90.0 <= lat <= 90.0:
            raise InvalidPointError(f"latitude {lat} outside [-90, 90]")
        if not -180.0 <= lon < 180.0:
            raise InvalidPointError(f"longitude {lon} outside [-180, 180)")
        object.__setattr__(self, "lat", lat)
        object.__setattr__(self, "lon", lon)

    @property
    def record_key(self) -> str:
        return f"{self.device_id}|{self.reported_at}|{self.lat:.6f}|{self.lon:.6f}"

    @property
    def letter(self) -> str:
        return self.device_id[0].upper()


@dataclass(frozen=True)
class GeoBox:
    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float

    kind = GEO

    def __post_init__(self):
        if not (self.lat_min < self.lat_max and self.lon_min < self.lon_max):
            raise UsageError(f"empty or inverted box {self}")

    @property
    def lat_span(self) -> float:
        return _nominal_lat(self.lat_max) - self.lat_min

    @property
    def lon_span(self) -> float:
        return self.lon_max - self.lon_min

    def area(self) -> Fraction:
        """Exact area in square degrees (the pole sentinel counts as 90)."""
        lat = Fraction(_nominal_lat(self.lat_max)) - Fraction(self.lat_min)
        return lat * (Fraction(self.lon_max) - Fraction(self.lon_min))

    def bounds(self) -> tuple[float, float, float, float]:
        return (self.lat_min, self.lat_max, self.lon_min, self.lon_max)

    def __str__(self) -> str:
        return f"geo {self.lat_min!r} {self.lat_max!r} {self.lon_min!r} {self.lon_max!r}"


GLOBAL_BOX = GeoBox(-90.0, LAT_TOP, -180.0, 180.0)


@dataclass(frozen=True)
class KeyRange:
    """Range over the first letter of an alphanumeric key; ``high=None`` is TOP."""

    low: str
    high: Optional[str] = None

    kind = ALPHA

    def __post_init__(self):
        if self.low not in ALPHABET or (self.high is not None and self.high not in ALPHABET):
            raise UsageError(f"key range bounds must be letters A-Z: {self}")
        if self.high is not None and not self.low < self.high:
            raise UsageError(f"empty or inverted key range {self}")

    @property
    def lo_index(self) -> int:
        return ALPHABET.index(self.low)

    @property
    def hi_index(self) -> int:
        return len(ALPHABET) if self.high is None else ALPHABET.index(self.high)

    def width(self) -> int:
        return self.hi_index - self.lo_index

    def __str__(self) -> str:
        return f"alpha {self.low} {self.high or 'TOP'}"


GLOBAL_KEYS = KeyRange("A", None)

Range = Union[GeoBox, KeyRange]


def global_range(key_space: str) -> Range:
    if key_space == GEO:
        return GLOBAL_BOX
    if key_space == ALPHA:
        return GLOBAL_KEYS
    raise ConfigError(f"unknown key space {key_space!r}")


@dataclass(frozen=True)
class TimeInterval:
    start: int
    end: Optional[int] = OPEN

    def __post_init__(self):
        if self.end is not None and not self.start < self.end:
            raise UsageError(f"empty or inverted time interval [{self.start}, {self.end})")

    @property
    def is_open(self) -> bool:
        return self.end is None

    def contains_tick(self, tick: int) -> bool:
        return self.start <= tick and (self.end is None or tick < self.end)

    def __str__(self) -> str:
        return f"[{self.start},{'OPEN' if self.end is None else self.end})"


ALL_TIME = TimeInterval(0, OPEN)


def contains(range_: Range, point) -> bool:
    """Half-open membership test.

    ``point`` is a TrackPoint, a ``(lat, lon)`` pair for a GeoBox or a
    single letter for a KeyRange.
    """
    if isinstance(range_, GeoBox):
        if isinstance(point, TrackPoint):
            lat, lon = point.lat, point.lon
        elif isinstance(point, tuple) and len(point) == 2:
            lat, lon = point
        else:
            raise UsageError(f"cannot test {point!r} against a geo box")
        return range_.lat_min <= lat < range_.lat_max and range_.lon_min <= lon < range_.lon_max
    if isinstance(range_, KeyRange):
        if isinstance(point, TrackPoint):
            letter = point.letter
        elif isinstance(point, str) and len(point) == 1:
            letter = point.upper()
        else:
            raise UsageError(f"cannot test {point!r} against a key range")
        if letter not in ALPHABET:
            raise UsageError(f"key {letter!r} is outside the A-Z alphabet")
        return range_.low <= letter and (range_.high is None or letter < range_.high)
    raise UsageError(f"unsupported range {range_!r}")


def intersects(a: Range, b: Range) -> bool:
    if isinstance(a, GeoBox) and isinstance(b, GeoBox):
        return (
            a.lat_min < b.lat_max
            and b.lat_min < a.lat_max
            and a.lon_min < b.lon_max
            and b.lon_min < a.lon_max
        )
    if isinstance(a, KeyRange) and isinstance(b, KeyRange):
        return a.lo_index < b.hi_index and b.lo_index < a.hi_index
    raise UsageError(f"key-space mismatch: {a!r} vs {b!r}")


def intersects_time(a: TimeInterval, b: TimeInterval) -> bool:
    a_end = math.inf if a.end is None else a.end
    b_end = math.inf if b.end is None else b.end
    return a.start < b_end and b.start < a_end


def range_within(inner: Range, outer: Range) -> bool:
    if isinstance(inner, GeoBox) and isinstance(outer, GeoBox):
        return (
            outer.lat_min <= inner.lat_min
            and inner.lat_max <= outer.lat_max
            and outer.lon_min <= inner.lon_min
            and inner.lon_max <= outer.lon_max
        )
    if isinstance(inner, KeyRange) and isinstance(outer, KeyRange):
        return outer.lo_index <= inner.lo_index and inner.hi_index <= outer.hi_index
    raise UsageError(f"key-space mismatch: {inner!r} vs {outer!r}")


def bisect_geo(box: GeoBox) -> tuple[GeoBox, GeoBox, GeoBox, GeoBox]:
    """Split a box at its lat/lon midpoints into (SW, SE, NW, NE)."""
    lat_hi = _nominal_lat(box.lat_max)
    if box.lat_span < MIN_SPLIT_SPAN or box.lon_span < MIN_SPLIT_SPAN:
        raise DegenerateSplitError(f"{box} is below the minimum split span")
    mid_lat = (box.lat_min + lat_hi) / 2
    mid_lon = (box.lon_min + box.lon_max) / 2
    if not (box.lat_min < mid_lat < lat_hi and box.lon_min < mid_lon < box.lon_max):
        raise DegenerateSplitError(f"{box} cannot be bisected in floating point")
    return (
        GeoBox(box.lat_min, mid_lat, box.lon_min, mid_lon),
        GeoBox(box.lat_min, mid_lat, mid_lon, box.lon_max),
        GeoBox(mid_lat, box.lat_max, box.lon_min, mid_lon),
        GeoBox(mid_lat, box.lat_max, mid_lon, box.lon_max),
    )


def bisect_key(key_range: KeyRange) -> tuple[KeyRange, KeyRange]:
    """Split at the median first letter; the lower half gets the smaller share."""
    width = key_range.width()
    if width < 2:
        raise DegenerateSplitError(f"{key_range} spans a single letter")
    mid = ALPHABET[key_range.lo_index + width // 2]
    return KeyRange(key_range.low, mid), KeyRange(mid, key_range.high)


def bisect(range_: Range) -> tuple[Range, ...]:
    if isinstance(range_, GeoBox):
        return bisect_geo(range_)
    if isinstance(range_, KeyRange):
        return bisect_key(range_)
    raise UsageError(f"unsupported range {range_!r}")


def split_depth(range_: Range) -> int:
    """Number of bisections separating ``range_`` from the global range."""
    if isinstance(range_, GeoBox):
        return round(math.log2(360.0 / range_.lon_span))
    return round(math.log2(len(ALPHABET) / range_.width()))


class TableState(str, Enum):
    LIVE = "LIVE"
    CLOSED = "CLOSED"
    ARCHIVED = "ARCHIVED"


@dataclass(frozen=True)
class Replica:
    node_id: str
    offline: bool = False


@dataclass(frozen=True)
class TableDescriptor:
    table_id: int
    range: Range
    state: TableState
    time_range: TimeInterval
    replicas: tuple[Replica, ...]
    opened_at: int
    parent_id: Optional[int] = None
    # Last known size; counts live in the stores, so equality ignores it.
    record_count: int = field(default=0, compare=False)

    @property
    def replica_nodes(self) -> tuple[str, ...]:
        return tuple(r.node_id for r in self.replicas)

    def flagged(self, node_id: str) -> bool:
        return any(r.node_id == node_id and r.offline for r in self.replicas)

    def with_flag(self, node_id: str, offline: bool) -> "TableDescriptor":
        replicas = tuple(
            Replica(r.node_id, offline) if r.node_id == node_id else r for r in self.replicas
        )
        return replace(self, replicas=replicas)


@dataclass(frozen=True)
class ScheduledUpdate:
    effective_at: int
    closes: tuple[int, ...]
    opens: tuple[TableDescriptor, ...]
    kind: str = "split"
    issued_at: int = 0

    @property
    def key(self) -> tuple[int, tuple[int, ...]]:
        return (self.effective_at, self.closes)


@dataclass(frozen=True)
class PartitionConfig:
    optimum_count: int = 1000
    optimum_age: int = 60
    replication_factor: int = 1
    location_count: int = 1
    update_lead: int = 2
    retention: int = 1440
    key_space: str = GEO

    def __post_init__(self):
        if self.optimum_count <= 0:
            raise ConfigError("optimum_count must be positive")
        if self.optimum_age <= 0:
            raise ConfigError("optimum_age must be positive")
        if self.replication_factor < 1:
            raise ConfigError("replication_factor must be at least 1")
        if self.location_count < 1:
            raise ConfigError("location_count must be at least 1")
        if self.replication_factor < self.location_count:
            raise ConfigError("replication_factor must be >= location_count")
        if self.update_lead < 1:
            raise ConfigError("update_lead must be at least 1 tick")
        if self.retention < 0:
            raise ConfigError("retention must be non-negative")
        if self.key_space not in KEY_SPACES:
            raise ConfigError(f"key_space must be one of {KEY_SPACES}")


class MainIndex:
    """The partition's map from key ranges and time ranges to tables.

    Holds every descriptor ever created (LIVE, CLOSED, ARCHIVED) plus the
    queue of future-dated updates. Mutated only through the engine
    functions; readers get a cached view of the LIVE tables.
    """

    def __init__(self, key_space: str = GEO, descriptors: Iterable[TableDescriptor] = (),
                 pending: Iterable[ScheduledUpdate] = (), next_table_id: int = 1):
        self.key_space = key_space
        self.descriptors: dict[int, TableDescriptor] = {d.table_id: d for d in descriptors}
        self.pending: list[ScheduledUpdate] = sorted(pending, key=lambda u: u.key)
        self.next_table_id = next_table_id
        self._live: Optional[list[TableDescriptor]] = None

    @classmethod
    def fresh(cls, key_space: str, replicas: Iterable[str]) -> "MainIndex":
        """A new partition: one LIVE table covering the whole key space from tick 0."""
        root = TableDescriptor(
            table_id=1,
            range=global_range(key_space),
            state=TableState.LIVE,
            time_range=TimeInterval(0, OPEN),
            replicas=tuple(Replica(n) for n in replicas),
            opened_at=0,
        )
        return cls(key_space, [root], next_table_id=2)

    def put(self, descriptor: TableDescriptor) -> None:
        self.descriptors[descriptor.table_id] = descriptor
        self._live = None

    def get(self, table_id: int) -> TableDescriptor:
        try:
            return self.descriptors[table_id]
        except KeyError:
            raise UsageError(f"unknown table {table_id}") from None

    def live(self) -> list[TableDescriptor]:
        if self._live is None:
            self._live = [
                d for _, d in sorted(self.descriptors.items()) if d.state is TableState.LIVE
            ]
        return self._live

    def pending_closes(self) -> set[int]:
        return {tid for u in self.pending for tid in u.closes}

    def enqueue(self, update: ScheduledUpdate) -> None:
        self.pending.append(update)
        self.pending.sort(key=lambda u: u.key)
        for d in update.opens:
            self.next_table_id = max(self.next_table_id, d.table_id + 1)

    def copy(self) -> "MainIndex":
        # Descriptors and updates are immutable, so a shallow copy is a snapshot.
        return MainIndex(self.key_space, self.descriptors.values(), self.pending, self.next_table_id)

    def structure(self) -> tuple:
        """Comparable snapshot used to check that two nodes agree."""
        return (
            tuple(d for _, d in sorted(self.descriptors.items())),
            tuple(self.pending),
        )

    def __len__(self) -> int:
        return len(self.descriptors)

    def __repr__(self) -> str:
        return (
            f"MainIndex(key_space={self.key_space!r}, tables={len(self.descriptors)}, "
            f"live={len(self.live())}, pending={len(self.pending)})"
        )


@dataclass(frozen=True)
class Issue:
    kind: str
    detail: str
    tables: tuple[int, ...] = ()


@dataclass
class ValidationReport:
    issues: list[Issue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def of_kind(self, kind: str) -> list[Issue]:
        return [i for i in self.issues if i.kind == kind]

    def __len__(self) -> int:
        return len(self.issues)

    def __iter__(self):
        return iter(self.issues)


@lru_cache(maxsize=1 << 16)
def _measure(range_: Range) -> Fraction:
    if isinstance(range_, GeoBox):
        return range_.area()
    return Fraction(range_.width())


def _exact_sum(values: Iterable[Fraction]) -> Fraction:
    """Sum fractions whose denominators are powers of two (every float is one)."""
    values = list(values)
    if not values:
        return Fraction(0)
    common = max(v.denominator for v in values)
    return Fraction(sum(v.numerator * (common // v.denominator) for v in values), common)


@lru_cache(maxsize=1 << 16)
def _overlap_measure(a: Range, b: Range) -> Fraction:
    if isinstance(a, GeoBox) and isinstance(b, GeoBox):
        lat = min(Fraction(_nominal_lat(a.lat_max)), Fraction(_nominal_lat(b.lat_max))) - max(
            Fraction(a.lat_min), Fraction(b.lat_min)
        )
        lon = min(Fraction(a.lon_max), Fraction(b.lon_max)) - max(
            Fraction(a.lon_min), Fraction(b.lon_min)
        )
        return lat * lon if lat > 0 and lon > 0 else Fraction(0)
    if isinstance(a, KeyRange) and isinstance(b, KeyRange):
        return Fraction(max(0, min(a.hi_index, b.hi_index) - max(a.lo_index, b.lo_index)))
    raise UsageError(f"key-space mismatch: {a!r} vs {b!r}")


def _overlapping_pairs(ranges: list[tuple[int, Range]]) -> list[tuple[int, int]]:
    def lo(r):
        return r.lon_min if isinstance(r, GeoBox) else r.lo_index

    def hi(r):
        return r.lon_max if isinstance(r, GeoBox) else r.hi_index

    ordered = sorted(ranges, key=lambda item: (lo(item[1]), item[0]))
    pairs = []
    for i, (tid_a, a) in enumerate(ordered):
        for tid_b, b in ordered[i + 1:]:
            if lo(b) >= hi(a):
                break
            if intersects(a, b):
                pairs.append(tuple(sorted((tid_a, tid_b))))
    return sorted(pairs)


def validate_index(index: MainIndex) -> ValidationReport:
    """Structural audit of an index; an empty report means well-formed.

    LIVE ranges must tile the key space exactly. With pairwise-disjoint
    half-open boxes inside the global range, equal total measure rules out
    gaps, so the check is exact arithmetic rather than sampling.
    """
    report = ValidationReport()
    universe = global_range(index.key_space)
    live = []
    for tid, d in sorted(index.descriptors.items()):
        if d.range.kind != universe.kind:
            report.issues.append(Issue("kind", f"table {tid} has a {d.range.kind} range", (tid,)))
            continue
        if d.state is TableState.LIVE:
            if not d.time_range.is_open:
                report.issues.append(Issue("live_end", f"LIVE table {tid} has a finite end", (tid,)))
            live.append((tid, d.range))
        elif d.time_range.is_open:
            report.issues.append(Issue("closed_open", f"{d.state.value} table {tid} has an open end", (tid,)))
        if not range_within(d.range, universe):
            report.issues.append(Issue("bounds", f"table {tid} extends past the key space", (tid,)))

    for a, b in _overlapping_pairs(live):
        report.issues.append(Issue("overlap", f"LIVE tables {a} and {b} overlap", (a, b)))
    covered = _exact_sum(_measure(r) for _, r in live)
    total = _measure(universe)
    if covered < total:
        report.issues.append(Issue("gap", f"LIVE tables leave {float(total - covered):.6g} uncovered"))
    elif covered > total and not report.of_kind("overlap"):
        report.issues.append(Issue("overlap", "LIVE tables cover more than the key space"))

    for update in index.pending:
        report.issues.extend(_audit_update(index, update))
    return report


def _audit_update(index: MainIndex, update: ScheduledUpdate) -> list[Issue]:
    issues = []
    closed = []
    for tid in update.closes:
        d = index.descriptors.get(tid)
        if d is None:
            issues.append(Issue("update", f"update closes unknown table {tid}", (tid,)))
        else:
            closed.append(d.range)
    opens = [(d.table_id, d.range) for d in update.opens]
    for a, b in _overlapping_pairs(opens):
        issues.append(Issue("update", f"update opens overlapping tables {a} and {b}", (a, b)))
    if len(closed) == len(update.closes):
        open_total = _exact_sum(_measure(r) for _, r in opens)
        close_total = _exact_sum(_measure(r) for r in closed)
        inside = _exact_sum(_overlap_measure(r, c) for _, r in opens for c in closed)
        if not (open_total == close_total == inside):
            issues.append(Issue(
                "update",
                f"update effective at {update.effective_at} does not conserve the closed ranges",
                update.closes,
            ))
    return issues
