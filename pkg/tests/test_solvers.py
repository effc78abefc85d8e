from itertools import combinations, product

import pytest
from hypothesis import given, settings, strategies as st

from rmwb.instances import Coloring, LinearOrder, Poset, Tournament, random_instance
from rmwb.solvers import (IntervalSpec, NotTransitiveError, extendibility_depth, gap_of, in_interval,
                          interval_members, is_subinterval, is_minimal_interval, linear_sequence, longest_monotone,
                          max_homogeneous, max_transitive, minimal_intervals, one_point_extensions,
                          partition_extendible, poset_extremes)
from strategies import colorings, linear_orders, posets, tournaments


def subsets(vs):
    vs = list(vs)
    for r in range(len(vs), -1, -1):
        yield from combinations(vs, r)


def best_subset(n, ok):
    """Largest subset of [0,n) passing ``ok``, lexicographically least among those."""
    for r in range(n, -1, -1):
        for s in combinations(range(n), r):
            if ok(s):
                return s
    return ()


def homogeneous(c, s, color):
    return all(c.color(i, j) == color for i, j in combinations(s, 2))


def three_cycle():
    return Tournament(3, (1, 0, 1))  # 0→1, 1→2, 2→0


def transitive(n):
    return Tournament.from_function(n, lambda i, j: i < j)


# ---------------------------------------------------------------- maximisers


def test_max_homogeneous_examples():
    assert len(max_homogeneous(Coloring.from_function(5, lambda i, j: 0)).vertices) == 5
    assert len(max_homogeneous(Coloring(1, ())).vertices) == 1


@given(colorings(max_n=7))
def test_max_homogeneous_matches_brute_force(c):
    oracle = min((-len(s), s, color) for color in (0, 1) for s in subsets(range(c.n)) if homogeneous(c, s, color))
    got = max_homogeneous(c)
    assert (got.vertices, got.color) == (oracle[1], oracle[2])


def test_every_six_point_coloring_has_a_homogeneous_triple():
    for bits in product((0, 1), repeat=15):
        assert len(max_homogeneous(Coloring(6, bits)).vertices) >= 3


def test_five_point_pentagon_has_no_homogeneous_triple():
    c = Coloring.from_function(5, lambda i, j: int((j - i) % 5 in (1, 4)))
    assert len(max_homogeneous(c).vertices) == 2


def test_max_transitive_examples():
    assert max_transitive(transitive(5)).vertices == (0, 1, 2, 3, 4)
    assert max_transitive(three_cycle()).vertices == (0, 1)


@given(tournaments(max_n=7))
def test_max_transitive_matches_brute_force(t):
    assert max_transitive(t).vertices == best_subset(t.n, t.is_transitive)


def test_every_six_point_tournament_has_a_transitive_triple():
    for bits in product((0, 1), repeat=15):
        assert len(max_transitive(Tournament(6, bits)).vertices) >= 3


def test_transitive_log_bound():
    for seed in range(200):
        t = random_instance("tournament", 7, seed)
        assert len(max_transitive(t).vertices) >= 3
    for n in range(1, 6):
        for bits in product((0, 1), repeat=n * (n - 1) // 2):
            assert len(max_transitive(Tournament(n, bits)).vertices) >= n.bit_length()


def test_poset_extremes_examples():
    ch = Poset.from_relation(5, lambda i, j: i <= j)
    anti = Poset.from_relation(5, lambda i, j: i == j)
    two = Poset.from_relation(4, lambda i, j: i == j or (i, j) in ((0, 1), (2, 3)))
    sizes = lambda p: tuple(len(s.vertices) for s in poset_extremes(p))
    assert sizes(ch) == (5, 1)
    assert sizes(anti) == (1, 5)
    assert sizes(two) == (2, 2)


@given(posets(max_n=7), st.data())
def test_poset_extremes_match_brute_force(p, data):
    perm = data.draw(st.permutations(range(p.n)))
    q = Poset.from_relation(p.n, lambda i, j: p.leq(perm[i], perm[j]))
    chain, anti = poset_extremes(q)
    assert chain.vertices == best_subset(q.n, lambda s: all(q.comparable(i, j) for i, j in combinations(s, 2)))
    assert anti.vertices == best_subset(q.n, lambda s: not any(q.comparable(i, j) for i, j in combinations(s, 2)))


def test_mirsky_product_bound():
    for seed in range(500):
        n = 1 + seed % 20
        p = random_instance("poset", n, seed)
        chain, anti = poset_extremes(p)
        assert len(chain.vertices) * len(anti.vertices) >= n


def test_longest_monotone_examples():
    up, down = longest_monotone(LinearOrder.from_ranks(range(6)))
    assert len(up.vertices) == 6
    up, down = longest_monotone(LinearOrder.from_ranks(range(5, -1, -1)))
    assert len(down.vertices) == 6
    up, down = longest_monotone(LinearOrder.from_ranks((2, 0, 3, 1)))
    assert (len(up.vertices), len(down.vertices)) == (2, 2)


@given(linear_orders(max_n=9))
def test_longest_monotone_matches_brute_force(order):
    r = order.rank
    up, down = longest_monotone(order)
    assert up.vertices == best_subset(order.n, lambda s: all(r[a] < r[b] for a, b in zip(s, s[1:])))
    assert down.vertices == best_subset(order.n, lambda s: all(r[a] > r[b] for a, b in zip(s, s[1:])))


# ---------------------------------------------------------------- intervals


def test_one_point_extensions_examples():
    t = random_instance("tournament", 7, 3)
    assert one_point_extensions(t, set()) == frozenset(range(7))
    assert one_point_extensions(three_cycle(), {0, 1}) == frozenset()
    assert one_point_extensions(transitive(4), {0, 3}) == frozenset({1, 2})


def test_one_point_extensions_rejects_cycles():
    with pytest.raises(NotTransitiveError):
        one_point_extensions(three_cycle(), {0, 1, 2})


@given(tournaments(max_n=8), st.data())
def test_one_point_extensions_rechecked(t, data):
    f = set(data.draw(st.sampled_from([s for s in subsets(range(t.n)) if len(s) <= 3 and t.is_transitive(s)])))
    ext = one_point_extensions(t, f)
    assert not ext & f
    for a in range(t.n):
        if a not in f:
            assert (a in ext) == t.is_transitive(f | {a})


def test_minimal_intervals_examples():
    t = random_instance("tournament", 6, 11)
    (only,) = minimal_intervals(t, set())
    assert only.interval == IntervalSpec(None, None) and only.members == frozenset(range(6))
    assert all(not mi.members for mi in minimal_intervals(transitive(5), range(5)))
    # 3-cycle with F={0,1}: vertex 2 beats 0 and loses to 1, so it fits no gap
    mis = minimal_intervals(three_cycle(), {0, 1})
    assert [mi.interval for mi in mis] == [IntervalSpec(None, 0), IntervalSpec(0, 1), IntervalSpec(1, None)]
    assert all(not mi.members for mi in mis)


@given(tournaments(max_n=8), st.data())
def test_minimal_intervals_by_betweenness(t, data):
    f = set(data.draw(st.sampled_from([s for s in subsets(range(t.n)) if t.is_transitive(s)])))
    seq = linear_sequence(t, f)
    mis = minimal_intervals(t, f)
    assert len(mis) == len(f) + 1
    ends = [None] + seq + [None]
    for k, mi in enumerate(mis):
        assert mi.interval == IntervalSpec(ends[k], ends[k + 1])
        assert is_minimal_interval(t, f, mi.interval)
        assert interval_members(t, f, mi.interval) == mi.members
        for x in mi.members:
            assert in_interval(t, f, mi.interval, x)
            # beaten by every member before the gap, beats every member after it
            assert all(t.beats(y, x) for y in seq[:k]) and all(t.beats(x, y) for y in seq[k:])
    union = set().union(*(mi.members for mi in mis))
    assert sum(len(mi.members) for mi in mis) == len(union)
    assert union == one_point_extensions(t, f)


@given(st.integers(1, 8), st.data())
def test_minimal_intervals_partition_the_complement_in_transitive_tournaments(n, data):
    t = transitive(n)
    f = set(data.draw(st.sets(st.integers(0, n - 1))))
    mis = minimal_intervals(t, f)
    assert sorted(x for mi in mis for x in mi.members) == [x for x in range(n) if x not in f]


def test_gap_of_rejects_misfits():
    assert gap_of(three_cycle(), [0, 1], 2) is None
    assert gap_of(transitive(3), [0, 2], 1) == 1


# ---------------------------------------------------------------- extendibility


def depth_oracle(t, f, k):
    rest = [v for v in range(t.n) if v not in f]
    return max(len(s) for s in subsets(rest) if len(s) <= k and t.is_transitive(set(f) | set(s)))


def test_extendibility_examples():
    assert extendibility_depth(transitive(5), set(), 5) == 5
    assert extendibility_depth(three_cycle(), {0, 1}, 2) == 0


@given(tournaments(max_n=8), st.integers(0, 5), st.data())
def test_extendibility_matches_brute_force(t, k, data):
    f = set(data.draw(st.sampled_from([s for s in subsets(range(t.n)) if len(s) <= 3 and t.is_transitive(s)])))
    assert extendibility_depth(t, f, k) == depth_oracle(t, f, k)


@given(tournaments(max_n=8), st.integers(1, 5), st.data())
def test_monotone_extension_law(t, k, data):
    f = set(data.draw(st.sampled_from([s for s in subsets(range(t.n)) if len(s) <= 2 and t.is_transitive(s)])))
    d = extendibility_depth(t, f, k)
    for a in one_point_extensions(t, f):
        assert d >= extendibility_depth(t, f | {a}, k - 1)


def test_extendibility_rejects_cycles():
    with pytest.raises(NotTransitiveError):
        extendibility_depth(three_cycle(), {0, 1, 2}, 1)


def partition_oracle(t, f, j, k):
    best = None
    for r in range(len(j) + 1):
        for p in combinations(sorted(j), r):
            q = tuple(v for v in sorted(j) if v not in p)
            key = (-min(depth_oracle(t, set(f) | set(p), k), depth_oracle(t, set(f) | set(q), k)), p)
            best = key if best is None or key < best else best
    return best


def test_partition_extendible_examples():
    t = transitive(6)
    f = {0, 5}
    gap = IntervalSpec(0, 5)
    empty = partition_extendible(t, f, gap, set(), 2)
    assert (empty.p, empty.q) == (frozenset(), frozenset())
    single = partition_extendible(t, f, gap, {2}, 3)
    assert {single.p, single.q} == {frozenset(), frozenset({2})}
    other = single.depth_p if not single.p else single.depth_q
    assert other == extendibility_depth(t, f, 3)


def test_partition_extendible_preconditions():
    t = transitive(6)
    with pytest.raises(ValueError):
        partition_extendible(t, {0, 5}, IntervalSpec(0, 3), {1}, 2)
    with pytest.raises(ValueError):
        partition_extendible(t, {0, 3}, IntervalSpec(0, 3), {4}, 2)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_partition_extendible_matches_exhaustive_search(seed):
    t = random_instance("tournament", 9, seed)
    f = list(max_transitive(t).vertices[:2])
    mis = [mi for mi in minimal_intervals(t, f) if mi.members]
    if not mis:
        return
    mi = mis[seed % len(mis)]
    members = sorted(mi.members)
    j = max((s for s in subsets(members) if len(s) <= 3 and t.is_transitive(set(f) | set(s))), key=len)
    got = partition_extendible(t, f, mi.interval, j, 2)
    key, p = partition_oracle(t, f, j, 2)
    assert (min(got.depth_p, got.depth_q), tuple(sorted(got.p))) == (-key, p)
    assert got.p | got.q == frozenset(j) and not got.p & got.q
    for half, depth, interval in ((got.p, got.depth_p, got.interval_p), (got.q, got.depth_q, got.interval_q)):
        fh = set(f) | half
        inside = [m for m in minimal_intervals(t, fh) if m.members and is_subinterval(t, fh, m.interval, mi.interval)]
        if depth >= 1 and inside:
            assert interval == inside[0].interval
        else:
            # a half may extend only outside I, leaving no nonempty gap inside it
            assert interval is None
