"""Operator command line.

Exit codes: 0 success, 2 input or usage error, 3 a routed table had no
available replica.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path
from typing import Iterator, Optional, Sequence

from .cluster import Cluster, parse_nodes, replay
from .errors import (
    AdaptivePartitionError,
    ArchiveFormatError,
    ScriptError,
    TableUnavailableError,
)
from .model import ALPHA, KEY_SPACES, KeyRange, PartitionConfig, TimeInterval, TrackPoint
from .script import parse_script, query_box, run_events
from .storage import ArchiveFile, format_record

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_UNAVAILABLE = 3

log = logging.getLogger("adaptive_partition")


class InputError(Exception):
    pass


def _config_parser() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    g = parent.add_argument_group("partition settings")
    g.add_argument("--optimum-count", type=int, default=1000, help="records per table before it splits")
    g.add_argument("--optimum-age", type=int, default=60, help="maximum ticks a table stays live")
    g.add_argument("--replicas", type=int, default=1, help="copies of every table")
    g.add_argument("--locations", type=int, default=1, help="distinct locations among the copies")
    g.add_argument("--lead", type=int, default=2, help="ticks between scheduling and applying an update")
    g.add_argument("--retention", type=int, default=1440, help="ticks a closed table stays online")
    g.add_argument("--key-space", choices=KEY_SPACES, default="geo")
    g.add_argument("--nodes", default="n1:loc1", help="comma-separated id:location roster")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--sync-delay", type=int, default=1, help="message delivery delay in ticks")
    g.add_argument("--evaluate-every", type=int, default=1, help="evaluation cadence in ticks")
    return parent


def build_cluster(args) -> Cluster:
    config = PartitionConfig(
        optimum_count=args.optimum_count,
        optimum_age=args.optimum_age,
        replication_factor=args.replicas,
        location_count=args.locations,
        update_lead=args.lead,
        retention=args.retention,
        key_space=args.key_space,
    )
    return Cluster(config, parse_nodes(args.nodes), seed=args.seed,
                   sync_delay=args.sync_delay, evaluate_every=args.evaluate_every)


def read_points(path: Path) -> Iterator[TrackPoint]:
    """Yield records from a ``device_id,lat,lon,reported_at`` CSV, checking order."""
    last = -1
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if lineno == 1 and row[0].strip() == "device_id":
                continue
            if len(row) != 4:
                raise InputError(f"line {lineno}: expected 4 fields, got {len(row)}")
            try:
                point = TrackPoint(row[0].strip(), float(row[1]), float(row[2]), int(row[3]))
            except (ValueError, AdaptivePartitionError) as exc:
                raise InputError(f"line {lineno}: {exc}") from exc
            if point.reported_at < last:
                raise InputError(
                    f"line {lineno}: reported_at {point.reported_at} is earlier than {last}"
                )
            last = point.reported_at
            yield point


def load_state(path: Path) -> Cluster:
    try:
        return Cluster.loads(Path(path).read_text())
    except FileNotFoundError:
        raise InputError(f"state file {path} does not exist") from None
    except (ValueError, KeyError) as exc:
        raise InputError(f"state file {path} is not readable: {exc}") from exc


def save_state(cluster: Cluster, path: Optional[Path]) -> None:
    if path is not None:
        cluster.drain_journal()
        Path(path).write_text(cluster.dumps())


def _write(lines, output: Optional[Path]) -> None:
    text = "".join(line + "\n" for line in lines)
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


def cmd_ingest(args) -> int:
    cluster = build_cluster(args)
    count = replay(cluster, read_points(args.input), settle=True)
    save_state(cluster, args.state)
    index = cluster.coordinator_index()
    events = cluster.event_counts()
    _write([
        f"records {count}",
        f"tables {len(index)}",
        f"live {len(index.live())}",
        f"splits {events['split']}",
        f"age_outs {events['replace']}",
        f"now {cluster.now}",
    ], None)
    return EXIT_OK


def cmd_query(args) -> int:
    cluster = load_state(args.state)
    if cluster.config.key_space == ALPHA:
        if args.keys is None:
            raise InputError("alphabet partitions are queried with --keys LOW HIGH")
        low, high = (k.upper() for k in args.keys)
        rng = KeyRange(low, None if high == "TOP" else high)
    else:
        rng = query_box(*args.box) if args.box else query_box(-90.0, 90.0, -180.0, 180.0)
    t1 = None if args.t1 in (None, "OPEN") else int(args.t1)
    node = args.node or cluster.coordinator_id()
    rows = cluster.query(node, rng, TimeInterval(args.t0, t1))
    _write((format_record(r) for r in rows), args.output)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cluster = build_cluster(args)
    events = parse_script(Path(args.script).read_text(), cluster.config.key_space)
    lines = run_events(cluster, events)
    _write(lines, args.output)
    save_state(cluster, args.state)
    return EXIT_OK


def cmd_dump_index(args) -> int:
    cluster = load_state(args.state)
    _write(cluster.dump_index_lines(args.node), args.output)
    return EXIT_OK


def cmd_archive(args) -> int:
    cluster = load_state(args.state)
    archive = cluster.archive_table(args.table, args.retention)
    archive.write(args.output)
    save_state(cluster, args.state)
    _write([f"archived table {archive.table_id} records {len(archive.records)} -> {args.output}"], None)
    return EXIT_OK


def cmd_restore(args) -> int:
    cluster = load_state(args.state)
    try:
        archive = ArchiveFile.read(args.archive)
    except FileNotFoundError:
        raise InputError(f"archive {args.archive} does not exist") from None
    table_id = cluster.restore_table(archive)
    save_state(cluster, args.state)
    _write([f"restored table {table_id} records {len(archive.records)}"], None)
    return EXIT_OK


def cmd_stats(args) -> int:
    cluster = load_state(args.state)
    index = cluster.coordinator_index()
    loads = cluster.server_loads()
    lines = [f"now {cluster.now}", f"tables {len(index)}", f"live {len(index.live())}"]
    for nid, node in sorted(cluster.nodes.items()):
        live = sum(1 for d in index.live() if nid in d.replica_nodes)
        records = sum(len(s) for s in node.stores.values())
        lines.append(
            f"node {nid} location={node.location} online={int(node.online)} "
            f"admitted={int(node.admitted)} load={loads.get(nid, 0.0):.6f} "
            f"live_replicas={live} records={records}"
        )
    _write(lines, None)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adaptive-partition", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    config = _config_parser()

    p = sub.add_parser("ingest", parents=[config], help="replay a CSV of track points")
    p.add_argument("input", type=Path)
    p.add_argument("--state", type=Path, help="where to save the resulting cluster state")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("query", help="query an ingested state")
    p.add_argument("--state", type=Path, required=True)
    p.add_argument("--box", type=float, nargs=4, metavar=("LAT0", "LAT1", "LON0", "LON1"))
    p.add_argument("--keys", nargs=2, metavar=("LOW", "HIGH"))
    p.add_argument("--t0", type=int, default=0)
    p.add_argument("--t1", default=None, help="exclusive end tick or OPEN")
    p.add_argument("--node", default=None)
    p.add_argument("-o", "--output", type=Path)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("simulate", parents=[config], help="run an event script")
    p.add_argument("script", type=Path)
    p.add_argument("-o", "--output", type=Path)
    p.add_argument("--state", type=Path)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("dump-index", help="write one line per table descriptor")
    p.add_argument("--state", type=Path, required=True)
    p.add_argument("--node", default=None)
    p.add_argument("-o", "--output", type=Path)
    p.set_defaults(func=cmd_dump_index)

    p = sub.add_parser("archive", help="archive a closed table to a file")
    p.add_argument("--state", type=Path, required=True)
    p.add_argument("--table", type=int, required=True)
    p.add_argument("--retention", type=int, default=None)
    p.add_argument("-o", "--output", type=Path, required=True)
    p.set_defaults(func=cmd_archive)

    p = sub.add_parser("restore", help="restore an archived table")
    p.add_argument("--state", type=Path, required=True)
    p.add_argument("archive", type=Path)
    p.set_defaults(func=cmd_restore)

    p = sub.add_parser("stats", help="per-node load and table counts")
    p.add_argument("--state", type=Path, required=True)
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except TableUnavailableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNAVAILABLE
    except (InputError, ScriptError, ArchiveFormatError, AdaptivePartitionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
