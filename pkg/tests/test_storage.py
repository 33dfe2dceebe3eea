import random
import zlib
from dataclasses import replace

import pytest
from hypothesis import given, strategies as st

from adaptive_partition.errors import (
    ArchivedTableError,
    ArchiveFormatError,
    ChecksumMismatchError,
    IdConflictError,
    NotEligibleError,
)
from adaptive_partition.model import (
    ALL_TIME,
    GLOBAL_BOX,
    KeyRange,
    MainIndex,
    TableState,
    TimeInterval,
    TrackPoint,
)
from adaptive_partition.storage import (
    ArchiveFile,
    TableStore,
    archive_table,
    format_record,
    parse_record,
    restore_table,
)

from helpers import brute_force, random_box, random_point


def closed_index(end=1, key_space="geo"):
    index = MainIndex.fresh(key_space, ["n1"])
    d = index.get(1)
    index.put(replace(d, state=TableState.CLOSED, time_range=TimeInterval(0, end)))
    return index


def test_append_is_idempotent():
    store = TableStore(1)
    p = TrackPoint("dev", 1.5, 2.5, 0)
    assert store.append(p) is True
    assert store.append(TrackPoint("dev", 1.5, 2.5, 0)) is False
    assert len(store) == 1


def test_append_to_archived_store_fails():
    store = TableStore(1)
    store.archived = True
    with pytest.raises(ArchivedTableError):
        store.append(TrackPoint("dev", 0, 0, 0))


def test_scan_matches_linear_filter():
    rng = random.Random(3)
    records = [random_point(rng, rng.randrange(20)) for _ in range(2000)]
    store = TableStore(1, records)
    for _ in range(50):
        box = random_box(rng)
        t0 = rng.randrange(20)
        q_time = TimeInterval(t0, rng.choice([None, t0 + 3]))
        assert {r.record_key for r in store.scan(box, q_time)} == brute_force(records, box, q_time)


def test_record_line_format():
    p = TrackPoint("bus-7", -33.8688, 151.2093, 42)
    assert format_record(p) == "bus-7,-33.868800,151.209300,42"
    assert parse_record(format_record(p)) == p


@given(st.text("abcXYZ_-0123456789", min_size=1, max_size=12),
       st.floats(-90, 90), st.floats(-180, 179.9999), st.integers(0, 10**9))
def test_record_line_round_trip(device, lat, lon, t):
    p = TrackPoint(device, lat, lon, t)
    assert parse_record(format_record(p)).record_key == p.record_key


def test_archive_eligibility():
    index = closed_index(end=1)
    assert archive_table(index.copy(), TableStore(1), retention=10, now=12).table_id == 1
    with pytest.raises(NotEligibleError):
        archive_table(index.copy(), TableStore(1), retention=10, now=5)
    with pytest.raises(NotEligibleError):
        archive_table(MainIndex.fresh("geo", ["n1"]), TableStore(1), retention=0, now=100)


def test_archive_marks_table_and_store():
    index = closed_index()
    store = TableStore(1, [TrackPoint("a", 1, 1, 0), TrackPoint("b", 2, 2, 0)])
    archive = archive_table(index, store, retention=0, now=1)
    assert index.get(1).state is TableState.ARCHIVED
    assert index.get(1).record_count == 2
    assert store.archived
    assert [r.device_id for r in archive.records] == ["a", "b"]


def test_archive_header_is_bit_exact():
    archive = ArchiveFile(7, GLOBAL_BOX, TimeInterval(0, 5), (TrackPoint("a", 1, 2, 3),))
    body = "a,1.000000,2.000000,3\n"
    crc = f"{zlib.crc32(body.encode()):08x}"
    assert archive.dumps() == f"APV1 7 geo -90.0 90.00000000000001 -180.0 180.0 0 5 1 {crc}\n{body}"
    alpha = ArchiveFile(3, KeyRange("N"), TimeInterval(1, 4), ())
    assert alpha.dumps() == "APV1 3 alpha N TOP 1 4 0 00000000\n"


def test_archive_round_trip(tmp_path):
    rng = random.Random(5)
    records = tuple(random_point(rng, rng.randrange(4)) for _ in range(300))
    archive = ArchiveFile(9, KeyRange("A", "N"), TimeInterval(0, 4), records)
    path = archive.write(tmp_path / "t9.apv")
    assert ArchiveFile.read(path) == archive
    assert path.read_bytes() == archive.dumps().encode()


def test_corrupted_archive_rejected():
    text = ArchiveFile(1, GLOBAL_BOX, TimeInterval(0, 1), (TrackPoint("a", 1, 2, 0),)).dumps()
    with pytest.raises(ChecksumMismatchError):
        ArchiveFile.loads(text.replace("a,1.0", "b,1.0"))
    with pytest.raises(ArchiveFormatError):
        ArchiveFile.loads("APV2" + text[4:])
    with pytest.raises(ArchiveFormatError):
        ArchiveFile.loads(text.replace(" 0 1 1 ", " 0 1 2 "))


def test_restore_round_trip_and_conflicts():
    index = closed_index()
    records = [TrackPoint("a", 1, 1, 0), TrackPoint("b", -1, -1, 0)]
    archive = archive_table(index, TableStore(1, records), retention=0, now=1)
    tid, store = restore_table(index, archive, replicas=("n2",))
    assert tid == 1 and index.get(1).state is TableState.CLOSED
    assert index.get(1).replica_nodes == ("n2",)
    assert store.scan(GLOBAL_BOX, ALL_TIME) == records
    with pytest.raises(IdConflictError):
        restore_table(index, archive)


def test_restore_into_index_without_the_table():
    archive = ArchiveFile(12, GLOBAL_BOX, TimeInterval(3, 8), ())
    index = MainIndex.fresh("geo", ["n1"])
    restore_table(index, archive, replicas=("n1",))
    assert index.get(12).state is TableState.CLOSED
    assert index.next_table_id == 13
