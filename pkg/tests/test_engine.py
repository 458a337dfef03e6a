import random

import pytest
from hypothesis import given, settings, strategies as st

from fifosim import Engine, Outcome, p1_threshold, run, simulate, simulate_reference, validate_grid
from fifosim.engine import TRACK_POLICIES

M, H, P1, P2, P3, D = Outcome.MISS, Outcome.HIT, Outcome.P1, Outcome.P2, Outcome.P3, Outcome.DUP


@pytest.mark.parametrize("a_x, expected", [(8, 13), (2, 1), (4, 5), (16, 29)])
def test_p1_threshold(a_x, expected):
    assert p1_threshold(a_x) == expected


def test_p1_threshold_rejects_direct_mapped():
    with pytest.raises(ValueError):
        p1_threshold(1)


def test_e1_per_access(e1_grid):
    engine = Engine(e1_grid)
    seen = [engine.process_access(b).outcomes for b in [0, 1, 0, 1]]
    assert seen == [
        [M, M, M, M],
        [M, M, M, M],
        # level 0: 0 is not the MRI, raises the flag; level 1 node 0 holds only 0.
        [H, H, H, P2],
        # level 0 flag now set: everything else is credited.
        [H, P3, P3, P3],
    ]
    report = engine.report()
    assert report.counts() == [(2, 2)] * 4
    assert report.totals()["p2_hits"] == 1
    assert report.totals()["p3_hits"] == 3
    assert engine.firings == {"p1": 0, "p2": 1, "p3": 1}


def test_e2_per_access(e2_grid):
    engine = Engine(e2_grid)
    seen = [engine.process_access(b).outcomes for b in [1, 2, 3, 1]]
    assert seen == [[M, M], [M, M], [M, M], [H, P1]]
    report = engine.report()
    assert report.counts() == [(1, 3), (1, 3)]
    assert [s.p1_hits for s in report.stats] == [0, 1]


def test_intersection_flag_on_global_miss(e2_grid):
    engine = Engine(e2_grid)
    engine.process_access(1)
    node = engine.node(0, 1)
    big = node.ways[1]
    assert big.distance(0) == 7  # handle 0 is block 1
    assert node.intersection_flags[node.ways[0].slot_of(0)] is True


def test_intersection_flag_false_when_close_to_cursor(e2_grid):
    engine = Engine(e2_grid)
    for b in [1, 2, 3, 4, 5]:
        engine.process_access(b)
    out = engine.process_access(1)
    assert out.outcomes == [M, H]
    node = engine.node(0, 1)
    h = engine.lut.lookup(1)
    assert node.ways[1].distance(h) == (0 - 5) % 8 == 3
    assert node.intersection_flags[node.ways[0].slot_of(h)] is False
    assert engine.update_intersection_flag(node, h) is False


def test_intersection_flag_false_when_absent_from_larger():
    grid = validate_grid(1, [1], [4, 8])
    engine = Engine(grid)
    for b in range(1, 10):
        engine.process_access(b)
    # Drop block 9 from the 8-way list by hand: the presence conjunct fails.
    h = engine.lut.lookup(9)
    engine.lut.set_presence(h, 1, False)
    assert engine.update_intersection_flag(engine.node(0, 9), h) is False


def test_mode_split():
    two = Engine(validate_grid(1, [1, 2], [2, 8]))
    assert all(n.track_flag is False and n.intersection_flags is None for lvl in two.levels for n in lvl)
    four = Engine(validate_grid(1, [1, 2], [4, 8]))
    assert all(n.track_flag is None and len(n.intersection_flags) == 4 for lvl in four.levels for n in lvl)
    with pytest.raises(RuntimeError):
        two.update_intersection_flag(two.levels[0][0], 0)


def test_duplicates_change_nothing(e1_grid):
    engine = Engine(e1_grid)
    engine.process_access(7)
    snapshot = repr([[(w.slots, w.cursor) for w in n.ways] for lvl in engine.levels for n in lvl])
    flags = [n.track_flag for lvl in engine.levels for n in lvl]
    for _ in range(2):
        assert engine.process_access(7).outcomes == [D] * 4
    assert repr([[(w.slots, w.cursor) for w in n.ways] for lvl in engine.levels for n in lvl]) == snapshot
    assert [n.track_flag for lvl in engine.levels for n in lvl] == flags
    stats = engine.report().stats
    assert all((s.accesses, s.hits, s.misses, s.dup_hits) == (3, 2, 1, 2) for s in stats)


def test_run_edge_cases(e1_grid):
    empty = run(Engine(e1_grid), [])
    assert all((s.accesses, s.hits, s.misses) == (0, 0, 0) for s in empty.stats)
    single = run(Engine(e1_grid), [42])
    assert all((s.hits, s.misses) == (0, 1) for s in single.stats)
    assert single.distinct_blocks == 1
    e1 = run(Engine(e1_grid), [0, 1, 0, 1])
    assert e1.totals()["p2_hits"] == 1 and e1.totals()["p3_hits"] == 3


def test_stream_error_propagates(e1_grid):
    def broken():
        yield 1
        raise OSError("disk gone")

    with pytest.raises(OSError):
        run(Engine(e1_grid), broken())


def test_outcome_attribution_helpers(e1_grid):
    engine = Engine(e1_grid)
    for b in [0, 1, 0]:
        out = engine.process_access(b)
    assert [out.verdict(c) for c in range(4)] == ["hit"] * 4
    assert [out.attribution(c) for c in range(4)] == ["normal", "normal", "normal", "p2"]
    assert engine.process_access(5).attribution(0) is None


def test_grid_larger_than_a_machine_word():
    grid = validate_grid(1, [2 ** i for i in range(20)], [2, 4, 8, 16])
    assert grid.num_configs == 80
    trace = [random.Random(1).randrange(300) for _ in range(3000)]
    report = simulate(grid, trace)
    assert report.counts() == simulate_reference(trace, grid)


def small_grids():
    sets = st.lists(st.sampled_from([1, 2, 4, 8, 16]), min_size=1, max_size=4, unique=True)
    assocs = st.lists(st.sampled_from([2, 4, 8, 16]), min_size=1, max_size=4, unique=True)
    return st.builds(lambda s, a: validate_grid(1, s, a), sets, assocs)


@settings(max_examples=150, deadline=None)
@given(small_grids(), st.lists(st.integers(0, 47), max_size=400))
def test_exact_against_reference_with_coherence(grid, trace):
    engine = Engine(grid)
    for b in trace:
        engine.process_access(b)
        engine.check_coherence()
    report = engine.report()
    assert report.counts() == simulate_reference(trace, grid)
    for s in report.stats:
        assert s.hits + s.misses == s.accesses == len(trace)
        assert s.p1_hits + s.p2_hits + s.p3_hits + s.dup_hits <= s.hits
    assert engine.insertion_flag_failures == 0


@settings(max_examples=60, deadline=None)
@given(small_grids(), st.lists(st.integers(0, 200), max_size=300))
def test_lut_table_tracks_distinct_blocks(grid, trace):
    engine = Engine(grid, lut_bits=3)
    engine.feed(trace)
    assert len(engine.lut) == len(set(trace))
    engine.lut.check_invariants()


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(0, 9), min_size=1, max_size=200))
def test_derived_mri_matches_last_insertion(trace):
    """The 2-way MRI read from the cursor equals an explicitly tracked last insert."""
    grid = validate_grid(1, [1, 2], [2, 4])
    engine = Engine(grid)
    last_inserted = {}
    for b in trace:
        before = {id(n): n.first.insert_count for lvl in engine.levels for n in lvl}
        engine.process_access(b)
        h = engine.lut.lookup(b)
        for lvl in engine.levels:
            for n in lvl:
                if n.first.insert_count != before[id(n)]:
                    last_inserted[id(n)] = h
                if id(n) in last_inserted:
                    assert n.first.slots[(n.first.cursor + 1) % 2] == last_inserted[id(n)]
                    assert n.first.mri() == last_inserted[id(n)]


def test_determinism():
    grid = validate_grid(4, [1, 4, 64], [2, 4, 8])
    rnd = random.Random(5)
    trace = [rnd.randrange(500) for _ in range(5000)]
    assert simulate(grid, trace).counts() == simulate(grid, trace).counts()
    assert simulate(grid, trace).stats == simulate(grid, trace).stats


@pytest.mark.parametrize("policy", ["literal", "mri_only"])
def test_flag_on_mri_hit_is_unsound(policy):
    """Raising the track flag on an MRI hit lets p3 credit an evicted block."""
    grid = validate_grid(1, [4], [2, 4])
    diverged = []
    for seed in range(40):
        rnd = random.Random(seed)
        trace = [rnd.randrange(40) for _ in range(2000)]
        expected = simulate_reference(trace, grid)
        assert simulate(grid, trace).counts() == expected
        engine = Engine(grid, track_policy=policy)
        engine.feed(trace)
        if engine.report().counts() != expected:
            diverged.append(seed)
    assert diverged, f"expected the {policy} policy to diverge on some trace"


def test_unknown_track_policy():
    assert "non_mri" in TRACK_POLICIES
    with pytest.raises(ValueError):
        Engine(validate_grid(1, [1], [2]), track_policy="sometimes")
