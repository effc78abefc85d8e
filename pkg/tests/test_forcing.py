from itertools import permutations

import pytest
from hypothesis import given, settings, strategies as st

from engineered import KINDS, base_condition, settle_case
from rmwb.corpus import fire_twice_table, random_ground
from rmwb.families import Family, ShallowFamilyError, trivial_family
from rmwb.forcing import (AdsCondition, BadSetPredicate, DensityViolation, EmCondition, FunctionalTable,
                          GroundPosetCondition, PartitionTable, RequirementTable, SettleBounds, SplitPairError,
                          TableError, TreePreconditionError, UndefinedAValue, ads_extends, bounded_essential_ads,
                          bounded_essential_em, bounded_essential_in, em_extension_problems, em_problems,
                          empty_condition, extension_problems, ground_decide, ground_diagonalize, ground_extends, parse_functional, parse_ground, parse_table, partition_path_tree,
                          requirement_member, serialize_functional, serialize_ground, serialize_table,
                          settle_extend, settles_check, split_pair_select, split_pairs, validate_ads,
                          validate_em_extension, verify_diagonalize, verify_tree)
from rmwb.instances import InstanceFormatError, LinearOrder, Poset, Tournament, random_instance
from rmwb.solvers import IntervalSpec, minimal_intervals

seeds = st.integers(0, 2**32)


def ident(n):
    return LinearOrder.from_ranks(range(n))


def cond(order, sigma=(), tau=()):
    return AdsCondition(tuple(sigma), tuple(tau), order)


def cuts(order):
    """Every initial segment of the order."""
    return [set(order.order[:k]) for k in range(order.n + 1)]


# ---------------------------------------------------------------- ADS conditions


def test_validate_ads_examples():
    order = ident(5)
    empty = validate_ads(cond(order), cut={0, 1})
    assert empty.valid and empty.in_cut
    assert validate_ads(cond(order, (0, 1), (3, 2))).valid
    assert not validate_ads(cond(order, (1, 0))).valid
    assert not validate_ads(cond(order, (), (2, 3))).valid
    assert not validate_ads(cond(order, (3,), (2,))).valid


def test_validate_ads_cut_membership():
    order = ident(5)
    assert validate_ads(cond(order, (0, 1), (4,)), cut={0, 1, 2}).in_cut
    assert not validate_ads(cond(order, (0, 3), (4,)), cut={0, 1, 2}).in_cut


def test_split_pair_select_examples():
    order = ident(6)
    p = cond(order)
    v = {0, 1, 2}
    assert split_pair_select(p, cond(order, (1,)), cond(order, (), (4,)), v) == 0
    assert split_pair_select(p, cond(order, (1, 3)), cond(order, (), (5,)), v) == 1
    with pytest.raises(SplitPairError):
        split_pair_select(p, cond(order, (4,)), cond(order, (), (3,)), v)
    with pytest.raises(SplitPairError):
        split_pair_select(cond(order, (4,)), cond(order, (4, 5)), cond(order, (4,), (5,)), v)


def respects(q, v):
    return set(q.sigma) <= v and not set(q.tau) & v


def check_all_pairs(order, p, max_len):
    count = 0
    for q0, q1 in split_pairs(p, max_len):
        assert ads_extends(q0, p) and ads_extends(q1, p)
        for v in cuts(order):
            if not respects(p, v):
                continue
            i = split_pair_select(p, q0, q1, v)
            assert respects((q0, q1)[i], v)
            count += 1
    return count


def test_split_pair_select_exhaustive_small_orders():
    for n in range(1, 5):
        for perm in permutations(range(n)):
            order = LinearOrder.from_sequence(perm)
            assert check_all_pairs(order, cond(order), 3) > 0 or n == 1


def test_split_pair_select_ten_point_orders():
    for seed in range(2):
        order = random_instance("linorder", 10, seed)
        assert check_all_pairs(order, cond(order), 3) > 0
        low = order.order[0]
        assert check_all_pairs(order, cond(order, (low,)), 2) > 0


# ---------------------------------------------------------------- requirement tables


def test_requirement_member_examples():
    empty = RequirementTable("em")
    assert not requirement_member(empty, {0}, range(10), range(10))
    t = RequirementTable("em", frozenset({(frozenset({1, 2}), 2, 5)}))
    assert requirement_member(t, {1, 2}, {2}, {5})
    assert not requirement_member(t, {1, 2}, {2}, {4})
    assert requirement_member(t, {1, 2, 7}, {2}, {5})
    assert not requirement_member(t, {0, 1, 2}, {2}, {5})  # 0 is not above the recorded set


@st.composite
def em_tables(draw):
    entries = draw(st.sets(st.tuples(st.frozensets(st.integers(0, 6), max_size=3),
                                     st.integers(0, 5), st.integers(0, 5)), max_size=6))
    return RequirementTable("em", frozenset(entries))


@given(em_tables(), st.frozensets(st.integers(0, 6)), st.sets(st.integers(0, 5)), st.sets(st.integers(0, 5)),
       st.sets(st.integers(0, 5)), st.sets(st.integers(0, 5)))
def test_requirement_member_is_positive(table, obj, a, b, a2, b2):
    if requirement_member(table, obj, a, b):
        assert requirement_member(table, obj, a | a2, b | b2)


def test_a_values_must_persist():
    with pytest.raises(TableError):
        RequirementTable("em", a_map={(1,): 0, (1, 4): 3})
    t = RequirementTable("em", a_map={(1,): 2})
    assert t.a_value({1, 5}) == 2 and t.a_value({0, 1}) is None


@given(em_tables())
def test_table_round_trip(table):
    assert parse_table(serialize_table(table)) == table


def test_table_round_trip_other_flavors():
    for table in (RequirementTable("ads-full", frozenset({(((0, 2), (5, 4)), 1, 2)}), builtin=("size-at-least", "3")),
                  RequirementTable("ads-A-side", frozenset({((0, 1), 0, 0)})),
                  RequirementTable("em", a_map={(): 4}, builtin=("total",))):
        assert parse_table(serialize_table(table)) == table


@pytest.mark.parametrize("text, line", [
    ("rmwb-req v2\n", 1),
    ("rmwb-req v1\nflavor nope\n", 2),
    ("rmwb-req v1\nflavor em\n{1,2} 1\n", 3),
    ("rmwb-req v1\nflavor em\n(1,2) 1 2\n", 3),
    ("rmwb-req v1\nflavor em\nbuiltin size-at-least x\n", 3),
])
def test_table_parse_errors(text, line):
    with pytest.raises(InstanceFormatError) as err:
        parse_table(text)
    assert err.value.line == line


def test_functional_tables():
    text = "rmwb-fun v1\nkind poset\nout 5 edge 0 1 1 edge 1 0 0\nout 7\n"
    table = parse_functional(text)
    assert table.entries == ((((0, 1, 1), (1, 0, 0)), 5), ((), 7))
    assert parse_functional(serialize_functional(table)) == table
    with pytest.raises(InstanceFormatError):
        parse_functional("rmwb-fun v1\nkind poset\nout 5 not edge 0 1 1\n")
    with pytest.raises(InstanceFormatError):
        parse_functional("rmwb-fun v1\nkind coloring\nout 5 color 0 1 1 color 1 0 0\n")


# ---------------------------------------------------------------- bounded essentiality


def test_bounded_essential_ads():
    order = ident(5)
    p = cond(order)
    total = RequirementTable("ads-full", builtin=("total",))
    report = bounded_essential_ads(total, p, 2, 10, 1)
    assert report.holds
    x, row = report.witnesses[0]
    assert x == 0 and row[0][1] == ((0,), ())  # least split pair first
    assert not bounded_essential_ads(RequirementTable("ads-full"), p, 2, 10, 1).holds
    with pytest.raises(TableError):
        bounded_essential_ads(RequirementTable("em"), p, 1, 10, 1)


def test_bounded_essential_in_sequence():
    table = RequirementTable("ads-A-side", frozenset({((0, 1, 2), a, a) for a in range(1, 10)}))
    assert bounded_essential_in(table, (0, 1, 2, 3), 3, 10, 3).holds
    # b-values stop at 9, so y = 9 already has no witness at x = 0
    report = bounded_essential_in(table, (0, 1, 2, 3), 10, 10, 2)
    assert not report.holds and report.failing_x == 0
    assert not bounded_essential_in(table, (0, 2, 1), 3, 10, 1).holds


def test_bounded_essential_em_singletons():
    t = Tournament.from_function(8, lambda i, j: i < j)
    q = EmCondition(frozenset(), IntervalSpec(), trivial_family(t, 3))
    table = RequirementTable("em", frozenset((frozenset({v}), 0, b) for v in range(8) for b in range(1, 9)),
                             {(): 0})
    report = bounded_essential_em(table, q, 3, 9, 3)
    assert report.holds and [w[:2] for w in report.witnesses] == [(0, 0), (1, 0), (2, 0)]
    assert not bounded_essential_em(RequirementTable("em", a_map={(): 0}), q, 3, 9, 3).holds
    assert not bounded_essential_em(table, q, 9, 9, 3).holds


# ---------------------------------------------------------------- EM conditions


def grown(q, gap_index=None):
    """Add the least vertex and narrow to its fullest gap; the family is the gap's members."""
    t = q.ambient
    f = q.f | {min(q.family.levels[0][0])}
    gaps = sorted(minimal_intervals(t, f), key=lambda mi: -len(mi.members))
    mi = gaps[0] if gap_index is None else gaps[gap_index]
    reach = q.family.union()
    members = sorted(x for x in mi.members if x > max(f) and x in reach)
    levels = tuple((frozenset(members[:k + 1]),) for k in range(len(members)))
    return EmCondition(frozenset(f), mi.interval, Family(t, levels))


def test_em_extension_examples():
    q = base_condition(3)
    assert validate_em_extension(q, q)
    q1 = grown(q)
    assert not em_problems(q1)
    assert validate_em_extension(q1, q)


def test_em_extension_rejects_elements_below_f():
    t = Tournament.from_function(10, lambda i, j: i < j)
    q = EmCondition(frozenset({3}), IntervalSpec(3, None), Family(t, ((frozenset({4}),),)))
    q2 = EmCondition(frozenset({1, 3}), IntervalSpec(3, None), Family(t, ((frozenset({4}),),)))
    assert not em_problems(q) and not em_problems(q2)
    assert "does not lie above F" in " ".join(em_extension_problems(q2, q))


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_em_extension_composes(seed):
    q = base_condition(seed)
    size1 = RequirementTable("em", a_map={(): 0}, builtin=("size-at-least", "1"))
    q1, _ = settle_extend(q, size1, SettleBounds(3, 30, 6))
    if len(q1.family.levels) < 2:
        return
    size2 = RequirementTable("em", a_map={tuple(sorted(q1.f)): 0}, builtin=("size-at-least", "3"))
    try:
        q2, _ = settle_extend(q1, size2, SettleBounds(3, 30, 6))
    except ShallowFamilyError:
        return
    assert validate_em_extension(q2, q1) and validate_em_extension(q1, q)
    assert validate_em_extension(q2, q)


def test_em_problems_catch_bad_conditions():
    t = Tournament(3, (1, 0, 1))
    assert em_problems(EmCondition(frozenset({0, 1, 2}), IntervalSpec(), trivial_family(t, 1)))
    t = Tournament.from_function(6, lambda i, j: i < j)
    assert em_problems(EmCondition(frozenset({2}), IntervalSpec(2, None), trivial_family(t, 3)))


# ---------------------------------------------------------------- settling


def test_settles_check_examples():
    q = base_condition(5)
    empty = RequirementTable("em", a_map={(): 0})
    assert settles_check(q, empty, 0).settles
    member = RequirementTable("em", frozenset({(frozenset(), 0, 0)}), {(): 0})
    assert settles_check(q, member, 0).via == "member"
    v = 1
    one = RequirementTable("em", frozenset({(frozenset({v}), 0, 4)}), {(): 0})
    report = settles_check(q, one, 3)
    assert not report.settles and report.counterexample[2] == frozenset({v})
    assert settles_check(q, one, 4).settles
    with pytest.raises(UndefinedAValue):
        settles_check(q, RequirementTable("em"), 0)


def test_settle_extend_empty_table():
    q = base_condition(9)
    out, cert = settle_extend(q, RequirementTable("em", a_map={(): 0}), SettleBounds(4, 30, 8))
    assert cert.branch == "non-essential" and cert.x == 0 and cert.case == 1
    assert out.f == q.f and settles_check(out, RequirementTable("em", a_map={(): 0}), 0).settles


def test_settle_extend_total_table_is_already_met():
    q = base_condition(9)
    table = RequirementTable("em", a_map={(): 0}, builtin=("total",))
    out, cert = settle_extend(q, table, SettleBounds(4, 30, 8))
    assert cert.branch == "member" and out == q


@pytest.mark.parametrize("k", [1, 2, 3])
def test_settle_extend_size_builtin_is_essential(k):
    q = base_condition(20 + k)
    table = RequirementTable("em", a_map={(): 0}, builtin=("size-at-least", str(k)))
    out, cert = settle_extend(q, table, SettleBounds(4, 30, 8))
    assert cert.branch == "essential"
    assert len(out.f) >= k and table.accepts(out.f)
    assert validate_em_extension(out, q)


def test_settle_extend_second_extraction_case():
    t = random_instance("tournament", 24, 4)
    q = EmCondition(frozenset(), IntervalSpec(), trivial_family(t, 10))
    table = RequirementTable("em", frozenset({(frozenset({0, 8}), 0, 3), (frozenset({14}), 0, 0)}), {(): 0})
    out, cert = settle_extend(q, table, SettleBounds(6, 30, 10))
    assert (cert.branch, cert.case, cert.x, cert.detail) == ("non-essential", 2, 0, (0, 8))
    assert settles_check(out, table, 0).settles and validate_em_extension(out, q)


@pytest.mark.parametrize("kind", KINDS)
def test_settle_engineered_cases(kind):
    for seed in range(10):
        q, table, bounds = settle_case(kind, seed)
        if kind == "no-density":
            with pytest.raises(DensityViolation, match="density violation at horizon"):
                settle_extend(q, table, bounds)
            continue
        out, cert = settle_extend(q, table, bounds)
        assert validate_em_extension(out, q)
        if kind == "dense":
            assert cert.branch == "essential" and out.f and table.accepts(out.f)
        else:
            assert cert.branch == "non-essential" and settles_check(out, table, cert.x).settles


# ---------------------------------------------------------------- partition tree


def test_tree_accept_all():
    chain = [{1}, {1, 2}, {1, 2, 3}, {1, 2, 3, 4}]
    r = BadSetPredicate()
    result = partition_path_tree(chain, r)
    assert result.case == 1 and result.node == (0, frozenset())
    assert result.extracted == frozenset({1, 2, 3, 4})
    assert verify_tree(chain, r, result) == []


def test_tree_growing_labels():
    chain = [{1}, {1, 2}, {1, 2, 3}, {1, 2, 3, 4}]
    table = PartitionTable({1: [{1}], 2: [{1}, {2}], 3: [{1, 3}, {2}], 4: [{1, 3}, {2, 4}]})
    result = partition_path_tree(chain, table)
    assert result.case == 2 and result.increases == 2
    assert result.extracted == frozenset({1, 3})
    assert verify_tree(chain, table, result) == []


def test_tree_preconditions():
    chain = [{1}, {1, 2}, {1, 2, 3}]
    with pytest.raises(TreePreconditionError):
        partition_path_tree(chain, PartitionTable({1: [{1}], 3: [{1, 2, 3}]}))
    with pytest.raises(TreePreconditionError):
        partition_path_tree([{1}, {1}], BadSetPredicate())
    with pytest.raises(TreePreconditionError):
        partition_path_tree([], BadSetPredicate())


@settings(max_examples=60, deadline=None)
@given(st.lists(st.frozensets(st.integers(0, 7), min_size=2, max_size=3), max_size=4), st.integers(3, 6))
def test_tree_bad_sets_avoided(bad, m):
    chain = [set(range(k + 1)) for k in range(m)]
    r = BadSetPredicate(bad)
    try:
        result = partition_path_tree(chain, r)
    except TreePreconditionError:
        return
    assert verify_tree(chain, r, result) == []
    assert r.safe(result.extracted)


# ---------------------------------------------------------------- ground conditions


def chain2():
    return Poset.from_relation(2, lambda i, j: i <= j)


def test_ground_decide_examples():
    out = ground_decide(empty_condition("poset"), 0)
    assert out.poset.n == 1 and out.b_star == {0}
    c = GroundPosetCondition(chain2(), frozenset({0}))
    assert ground_decide(c, 0) == c
    out = ground_decide(GroundPosetCondition(chain2()), 0)
    assert out.b_star == {0, 1}
    out = ground_decide(empty_condition("coloring"), 0)
    assert out.coloring.n == 1 and out.b_star == {0}
    with pytest.raises(ValueError):
        ground_decide(GroundPosetCondition(chain2()), 3)


@settings(max_examples=100, deadline=None)
@given(seeds, st.sampled_from(["poset", "coloring"]), st.integers(1, 9), st.data())
def test_ground_decide_places_and_extends(seed, kind, n, data):
    c = random_ground(kind, n, seed)
    i = data.draw(st.integers(0, n))
    out = ground_decide(c, i)
    assert i in out.a_star | out.b_star
    assert extension_problems(out, c) == []


def test_ground_diagonalize_examples():
    for kind in ("poset", "coloring"):
        c = empty_condition(kind)
        table = FunctionalTable(kind, (((), 5), ((), 9)))
        result = ground_diagonalize(c, table, 20)
        assert result.success and (result.a, result.b) == (5, 9)
        assert 5 in result.condition.a_star and 9 in result.condition.b_star
        assert result.points_used == 10
        assert verify_diagonalize(c, table, result) == []
        empty = ground_diagonalize(c, FunctionalTable(kind), 20)
        assert not empty.success and empty.exhausted_round == 1
        broke = ground_diagonalize(c, table, 0)
        assert not broke.success and broke.points_used == 0
        half = ground_diagonalize(c, table, 7)
        assert not half.success and half.exhausted_round == 2


def test_ground_diagonalize_respects_clauses():
    c = GroundPosetCondition(chain2(), frozenset({0}))
    table = FunctionalTable("poset", ((((0, 1, 0),), 4), (((0, 1, 1),), 3), ((), 6)))
    result = ground_diagonalize(c, table, 10)
    assert (result.a, result.b) == (3, 6)
    with pytest.raises(ValueError):
        ground_diagonalize(c, FunctionalTable("coloring"), 3)


@settings(max_examples=100, deadline=None)
@given(seeds, st.sampled_from(["poset", "coloring"]), st.integers(1, 9))
def test_ground_diagonalize_fire_twice(seed, kind, n):
    c = random_ground(kind, n, seed)
    table = fire_twice_table(c, seed)
    result = ground_diagonalize(c, table, 20)
    assert result.success
    assert verify_diagonalize(c, table, result) == []
    assert ground_extends(result.condition, c)


@given(seeds, st.sampled_from(["poset", "coloring"]), st.integers(1, 9))
def test_ground_round_trip(seed, kind, n):
    c = random_ground(kind, n, seed)
    assert parse_ground(serialize_ground(c)) == c


def test_ground_parse_errors():
    body = "poset 2\n1 1\n0 1\n"
    with pytest.raises(InstanceFormatError):
        parse_ground("rmwb-ground v1\nA 1\nB\n" + body)  # A* not downward closed
    with pytest.raises(InstanceFormatError):
        parse_ground("rmwb-ground v1\nA 0\n" + body)
    with pytest.raises(InstanceFormatError):
        parse_ground("rmwb-ground v0\n")
