"""Test oracles and random drivers shared across test modules."""

import random

from adaptive_partition.engine import (
    TableStats,
    apply_due_updates,
    evaluate,
    force_age_out,
    route_catalog,
    schedule_update,
)
from adaptive_partition.model import (
    GeoBox,
    KeyRange,
    LAT_TOP,
    MainIndex,
    PartitionConfig,
    TrackPoint,
    contains,
)

LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


def random_point(rng: random.Random, tick: int = 0, device: str | None = None) -> TrackPoint:
    return TrackPoint(
        device or f"{rng.choice(LETTERS).lower()}{rng.randrange(10**6)}",
        rng.uniform(-90.0, 90.0),
        rng.uniform(-180.0, 179.999999),
        tick,
    )


def random_box(rng: random.Random) -> GeoBox:
    lat = sorted(rng.uniform(-90.0, 90.0) for _ in range(2))
    lon = sorted(rng.uniform(-180.0, 180.0) for _ in range(2))
    return GeoBox(lat[0], lat[1] if lat[1] < 89.9 else LAT_TOP, lon[0], lon[1] + 1e-9)


def random_keys(rng: random.Random) -> KeyRange:
    lo, hi = sorted(rng.sample(range(27), 2))
    return KeyRange(LETTERS[lo], None if hi == 26 else LETTERS[hi])


def brute_force(records, q_range, q_time) -> set[str]:
    """Linear filter: the record keys any correct query must return."""
    return {r.record_key for r in records if q_time.contains_tick(r.reported_at) and contains(q_range, r)}


def evolve_index(rng: random.Random, steps: int, key_space: str = "geo",
                 config: PartitionConfig | None = None, check=None, batch: int = 80) -> MainIndex:
    """Drive a single index through random evaluate/schedule/apply/age-out steps.

    Each tick routes a random batch of points (half of them near a hot spot)
    so both splits and age-outs happen while the table count stays bounded.
    ``check`` is called with (index, now) after every step.
    """
    config = config or PartitionConfig(
        optimum_count=50, optimum_age=rng.randint(2, 8), update_lead=rng.randint(1, 3), key_space=key_space
    )
    index = MainIndex.fresh(key_space, ["n1"])
    place = lambda n: [["n1"]] * n  # noqa: E731
    hot = (rng.uniform(-60, 60), rng.uniform(-150, 150))
    counts: dict[int, int] = {}
    for now in range(steps):
        apply_due_updates(index, now)
        for _ in range(rng.randint(0, batch)):
            if rng.random() < 0.5:
                p = TrackPoint(rng.choice("ABC") + "x", hot[0] + rng.random(), hot[1] + rng.random(), now)
            else:
                p = random_point(rng, now)
            tid = route_catalog(index, p, now)
            counts[tid] = counts.get(tid, 0) + 1
        stats = [TableStats(d.table_id, counts.get(d.table_id, 0), d.opened_at) for d in index.live()]
        if rng.random() < 0.05:
            force_age_out(index, place, now, config)
        else:
            for p in evaluate(index, stats, config, now):
                schedule_update(index, p, place(len(p.ranges)), now, config)
        if check is not None:
            check(index, now)
    return index
