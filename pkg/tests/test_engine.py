import random
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from adaptive_partition.engine import (
    REPLACE,
    SPLIT,
    Proposal,
    TableStats,
    apply_due_updates,
    evaluate,
    force_age_out,
    receive_update,
    route_catalog,
    route_query,
    schedule_update,
)
from adaptive_partition.errors import DuplicateCloseError, IndexCorruptionError, UsageError
from adaptive_partition.model import (
    ALL_TIME,
    GLOBAL_BOX,
    GLOBAL_KEYS,
    KeyRange,
    MainIndex,
    PartitionConfig,
    TableState,
    TimeInterval,
    TrackPoint,
    bisect_geo,
    contains,
    validate_index,
)

from helpers import brute_force, evolve_index, random_box, random_point


def cfg(**kw):
    base = dict(optimum_count=1000, optimum_age=60, update_lead=1)
    base.update(kw)
    return PartitionConfig(**base)


def stats_for(index, count, now_opened=None):
    return [TableStats(d.table_id, count, d.opened_at if now_opened is None else now_opened)
            for d in index.live()]


# -- routing --------------------------------------------------------------


def test_route_catalog_fresh_index():
    index = MainIndex.fresh("geo", ["n1"])
    assert route_catalog(index, TrackPoint("d", 12.5, -3.25, 0), 0) == 1


def test_route_catalog_refuses_unapplied_update():
    index = MainIndex.fresh("geo", ["n1"])
    schedule_update(index, Proposal(SPLIT, 1, bisect_geo(GLOBAL_BOX)), [["n1"]] * 4, 0, cfg())
    assert route_catalog(index, TrackPoint("d", 1, 1, 0), 0) == 1
    with pytest.raises(IndexCorruptionError):
        route_catalog(index, TrackPoint("d", 1, 1, 1), 1)
    apply_due_updates(index, 1)
    assert route_catalog(index, TrackPoint("d", 1, 1, 1), 1) == 5  # NE quadrant


def test_route_query_skips_archived_and_disjoint_time():
    index = MainIndex.fresh("alpha", ["n1"])
    schedule_update(index, Proposal(REPLACE, 1, (GLOBAL_KEYS,)), [["n1"]], 0, cfg())
    apply_due_updates(index, 1)
    assert route_query(index, GLOBAL_KEYS, ALL_TIME) == {1, 2}
    assert route_query(index, GLOBAL_KEYS, TimeInterval(0, 1)) == {1}
    assert route_query(index, GLOBAL_KEYS, TimeInterval(1)) == {2}
    index.put(replace(index.get(1), state=TableState.ARCHIVED))
    assert route_query(index, GLOBAL_KEYS, ALL_TIME) == {2}


# -- evaluation -----------------------------------------------------------


def test_evaluate_splits_dense_table():
    index = MainIndex.fresh("geo", ["n1"])
    (p,) = evaluate(index, stats_for(index, 1001), cfg(), 0)
    assert p.kind == SPLIT and p.ranges == bisect_geo(GLOBAL_BOX)
    assert evaluate(index, stats_for(index, 1000), cfg(), 0) == []


def test_evaluate_replaces_old_table_accounting_for_lead():
    index = MainIndex.fresh("alpha", ["n1"])
    config = cfg(optimum_age=60, update_lead=1)
    assert evaluate(index, stats_for(index, 0), config, 58) == []
    (p,) = evaluate(index, stats_for(index, 0), config, 59)
    assert p == Proposal(REPLACE, 1, (GLOBAL_KEYS,))


def test_evaluate_age_rule_examples():
    index = MainIndex.fresh("alpha", ["n1"])
    config = cfg(optimum_count=100, optimum_age=3, update_lead=1)
    assert evaluate(index, [TableStats(1, 40, 0)], config, 1) == []
    (p,) = evaluate(index, [TableStats(1, 40, 0)], config, 3)
    assert p.kind == REPLACE


def test_evaluate_degenerate_split_becomes_replace():
    index = MainIndex.fresh("alpha", ["n1"])
    index.put(replace(index.get(1), range=KeyRange("A", "B")))
    (p,) = evaluate(index, [TableStats(1, 5000, 0)], cfg(), 0)
    assert p.kind == REPLACE


def test_evaluate_skips_pending_and_requires_stats():
    index = MainIndex.fresh("geo", ["n1"])
    schedule_update(index, Proposal(REPLACE, 1, (GLOBAL_BOX,)), [["n1"]], 0, cfg())
    assert evaluate(index, stats_for(index, 5000), cfg(), 0) == []
    with pytest.raises(UsageError):
        evaluate(MainIndex.fresh("geo", ["n1"]), [], cfg(), 0)


# -- scheduling -----------------------------------------------------------


def test_schedule_update_dates_and_numbers_children():
    index = MainIndex.fresh("geo", ["n1"])
    update = schedule_update(index, Proposal(SPLIT, 1, bisect_geo(GLOBAL_BOX)), [["n1"]] * 4, 7, cfg(update_lead=3))
    assert update.effective_at == 10
    assert [d.table_id for d in update.opens] == [2, 3, 4, 5]
    assert all(d.opened_at == 10 and d.parent_id == 1 for d in update.opens)
    assert index.next_table_id == 6
    assert validate_index(index).ok
    with pytest.raises(DuplicateCloseError):
        schedule_update(index, Proposal(REPLACE, 1, (GLOBAL_BOX,)), [["n1"]], 7, cfg())


def test_schedule_update_checks_placements():
    index = MainIndex.fresh("geo", ["n1", "n2"])
    with pytest.raises(UsageError):
        schedule_update(index, Proposal(REPLACE, 1, (GLOBAL_BOX,)), [["n1"]], 0, cfg(replication_factor=2))
    with pytest.raises(UsageError):
        schedule_update(index, Proposal(REPLACE, 1, (GLOBAL_BOX,)), [["n1", "n1"]], 0, cfg(replication_factor=2))


def test_single_index_lineage():
    """The root splits, one child splits again, the other ages out."""
    config = PartitionConfig(optimum_count=5, optimum_age=3, update_lead=1, key_space="alpha")
    index = MainIndex.fresh("alpha", ["n1"])
    counts = {1: 7, 2: 7}
    for now in range(0, 4):
        apply_due_updates(index, now)
        stats = [TableStats(d.table_id, counts.get(d.table_id, 0), d.opened_at) for d in index.live()]
        for p in evaluate(index, stats, config, now):
            schedule_update(index, p, [["n1"]] * len(p.ranges), now, config)
    apply_due_updates(index, 4)
    t1 = index.get(1)
    assert t1.state is TableState.CLOSED and str(t1.time_range) == "[0,1)"
    assert [index.get(i).range for i in (2, 3)] == [KeyRange("A", "N"), KeyRange("N")]
    assert index.get(3).state is TableState.CLOSED and str(index.get(3).time_range) == "[1,4)"
    assert index.get(2).state is TableState.CLOSED and str(index.get(2).time_range) == "[1,2)"
    assert [index.get(i).range for i in (4, 5)] == [KeyRange("A", "G"), KeyRange("G", "N")]
    assert index.get(6).parent_id == 3 and index.get(6).state is TableState.LIVE
    assert index.get(6).opened_at == 4


def test_force_age_out_replaces_every_live_table():
    index = MainIndex.fresh("geo", ["n1"])
    schedule_update(index, Proposal(SPLIT, 1, bisect_geo(GLOBAL_BOX)), [["n1"]] * 4, 0, cfg())
    apply_due_updates(index, 1)
    calls = []
    updates = force_age_out(index, lambda n: calls.append(n) or [["n1"]] * n, 1, cfg())
    assert calls == [4]
    assert sorted(u.closes[0] for u in updates) == [2, 3, 4, 5]
    apply_due_updates(index, 2)
    assert sorted(d.table_id for d in index.live()) == [6, 7, 8, 9]
    assert validate_index(index).ok


# -- replicated delivery ----------------------------------------------------


def test_receive_update_is_order_independent():
    base = MainIndex.fresh("alpha", ["n1"])
    a_idx, b_idx = base.copy(), base.copy()
    ua = schedule_update(a_idx, Proposal(REPLACE, 1, (GLOBAL_KEYS,)), [["n1"]], 3, cfg())
    ub = schedule_update(b_idx, Proposal(SPLIT, 1, (KeyRange("A", "N"), KeyRange("N"))), [["n1"]] * 2, 2, cfg())
    one, two = base.copy(), base.copy()
    for u in (ua, ub):
        receive_update(one, u)
    for u in (ub, ua):
        receive_update(two, u)
    assert one.pending == two.pending == [ub]
    assert receive_update(one, ub) is False


# -- random evolution oracles ------------------------------------------------


@pytest.mark.parametrize("key_space", ["geo", "alpha"])
def test_random_evolution_stays_exact(key_space):
    def check(index, now):
        report = validate_index(index)
        assert report.ok, list(report)

    for seed in range(20):
        evolve_index(random.Random(seed), 40, key_space, check=check)


@given(st.integers(0, 10**6))
@settings(max_examples=25, deadline=None)
def test_every_point_routes_to_one_live_table(seed):
    rng = random.Random(seed)
    index = evolve_index(rng, 25)
    now = 25
    apply_due_updates(index, now)
    index.pending = [u for u in index.pending if u.effective_at > now]
    for _ in range(50):
        p = random_point(rng, now)
        holders = [d.table_id for d in index.live() if contains(d.range, p)]
        assert len(holders) == 1
        assert route_catalog(index, p, now) == holders[0]


def test_query_routing_never_misses_a_record():
    rng = random.Random(11)
    config = PartitionConfig(optimum_count=40, optimum_age=6, update_lead=2)
    index = MainIndex.fresh("geo", ["n1"])
    stores: dict[int, list] = {1: []}
    records = []
    for now in range(60):
        for u in apply_due_updates(index, now):
            for d in u.opens:
                stores[d.table_id] = []
        for _ in range(rng.randint(0, 30)):
            p = random_point(rng, now)
            stores[route_catalog(index, p, now)].append(p)
            records.append(p)
        stats = [TableStats(d.table_id, len(stores[d.table_id]), d.opened_at) for d in index.live()]
        for prop in evaluate(index, stats, config, now):
            schedule_update(index, prop, [["n1"]] * len(prop.ranges), now, config)
    assert len(index) > 10
    for _ in range(200):
        box = random_box(rng)
        t0 = rng.randrange(60)
        q_time = TimeInterval(t0, rng.choice([None, t0 + rng.randint(1, 20)]))
        routed = route_query(index, box, q_time)
        got = {r.record_key for t in routed for r in stores[t] if q_time.contains_tick(r.reported_at) and contains(box, r)}
        assert got == brute_force(records, box, q_time)
