"""Exact solvers and interval analysis for small instances.

Every maximiser returns the lexicographically least optimum, so results do not
depend on search order.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional

from .instances import Coloring, LinearOrder, Poset, Tournament, mask_is_transitive, mask_members, to_mask
from .reductions import SolutionSet, longest_increasing


class NotTransitiveError(ValueError):
    pass


def _lex_max_clique(adj, n: int) -> int:
    """Lexicographically least maximum clique as a bitmask.

    Candidates are visited in increasing vertex order with include-first
    branching, so the first clique reaching a new best size is lex-least.
    """
    best = [0, 0]  # size, mask

    def grow(chosen: int, size: int, cand: int):
        if size > best[0]:
            best[0], best[1] = size, chosen
        while cand:
            if size + cand.bit_count() <= best[0]:
                return
            low = cand & -cand
            v = low.bit_length() - 1
            cand ^= low
            grow(chosen | low, size + 1, cand & adj[v])

    grow(0, 0, (1 << n) - 1)
    return best[1]


def max_homogeneous(c: Coloring) -> SolutionSet:
    results = []
    for color in (0, 1):
        vs = tuple(mask_members(_lex_max_clique(c.masks[color], c.n)))
        results.append((-len(vs), vs, color))
    _, vs, color = min(results)
    return SolutionSet("homogeneous", vs, color)


def max_transitive(t: Tournament, candidates: Optional[Iterable[int]] = None) -> SolutionSet:
    out = t.out_masks
    n = t.n
    pool = (1 << n) - 1 if candidates is None else to_mask(candidates)
    best = [0, 0]

    def grow(chosen: int, size: int, cand: int):
        if size > best[0]:
            best[0], best[1] = size, chosen
        while cand:
            if size + cand.bit_count() <= best[0]:
                return
            low = cand & -cand
            cand ^= low
            nxt = chosen | low
            # keep only vertices that still extend the enlarged set
            rest = 0
            m = cand
            while m:
                b = m & -m
                if mask_is_transitive(out, nxt | b):
                    rest |= b
                m ^= b
            grow(nxt, size + 1, rest)

    grow(0, 0, pool)
    return SolutionSet("transitive", tuple(mask_members(best[1])))


def _longest_chain_len(m: Poset, mask: int) -> int:
    down = m.down_masks
    length = {}
    for v in sorted(mask_members(mask), key=lambda v: down[v].bit_count()):
        below = down[v] & mask & ~(1 << v)
        length[v] = 1 + max((length[u] for u in mask_members(below)), default=0)
    return max(length.values(), default=0)


def poset_extremes(m: Poset) -> tuple:
    """Longest chain and maximum antichain, each lexicographically least."""
    down = m.down_masks
    comparable = [(m.rows[v] | down[v]) & ~(1 << v) for v in range(m.n)]
    full = (1 << m.n) - 1
    target = _longest_chain_len(m, full)
    chain, allowed = [], full
    while len(chain) < target:
        for v in mask_members(allowed):
            rest = allowed & comparable[v] & ~((1 << (v + 1)) - 1)
            if len(chain) + 1 + _longest_chain_len(m, rest) == target:
                chain.append(v)
                allowed = rest
                break
    incomparable = [full & ~(m.rows[v] | down[v]) for v in range(m.n)]
    antichain = mask_members(_lex_max_clique(incomparable, m.n))
    return SolutionSet("chain", tuple(chain)), SolutionSet("antichain", tuple(antichain))


def longest_monotone(order: LinearOrder) -> tuple:
    up = longest_increasing(order.rank)
    down = longest_increasing([-r for r in order.rank])
    return SolutionSet("ascending", tuple(up)), SolutionSet("descending", tuple(down))


# ---------------------------------------------------------------- intervals

@dataclass(frozen=True)
class IntervalSpec:
    """Gap between two points; ``None`` stands for −∞ (low) or +∞ (high)."""

    low: Optional[int] = None
    high: Optional[int] = None

    def describe(self) -> str:
        lo = "-inf" if self.low is None else str(self.low)
        hi = "+inf" if self.high is None else str(self.high)
        return f"({lo},{hi})"


@dataclass(frozen=True)
class MinimalInterval:
    interval: IntervalSpec
    members: frozenset


def _require_transitive(t: Tournament, f) -> list:
    fs = sorted(set(f))
    if not t.is_transitive(fs):
        raise NotTransitiveError(f"{fs} is not transitive")
    return fs


def linear_sequence(t: Tournament, f) -> list:
    """Members of a transitive set in beats order (least first)."""
    fs = _require_transitive(t, f)
    return sorted(fs, key=lambda v: -sum(t.beats(v, u) for u in fs))


def one_point_extensions(t: Tournament, f, candidates: Optional[Iterable[int]] = None) -> frozenset:
    fs = _require_transitive(t, f)
    base = to_mask(fs)
    pool = range(t.n) if candidates is None else candidates
    return frozenset(a for a in pool if not base >> a & 1
                     and mask_is_transitive(t.out_masks, base | 1 << a))


def between(t: Tournament, a: Optional[int], b: Optional[int], x: int) -> bool:
    """Plain betweenness: T(a,x) and T(x,b) with virtual endpoints."""
    return (a is None or t.beats(a, x)) and (b is None or t.beats(x, b))


def gap_of(t: Tournament, seq: list, x: int) -> Optional[int]:
    """Index of the gap of ``seq`` that ``x`` fits into transitively, else None."""
    k = 0
    while k < len(seq) and t.beats(seq[k], x):
        k += 1
    if all(t.beats(x, y) for y in seq[k:]):
        return k
    return None


def minimal_intervals(t: Tournament, f) -> list:
    """The ``|F|+1`` gaps of ``F`` with the vertices that fit transitively into each.

    A vertex outside ``F`` whose addition breaks transitivity belongs to no gap.
    """
    seq = linear_sequence(t, f)
    ends = [None] + seq + [None]
    members = [set() for _ in range(len(seq) + 1)]
    fset = set(seq)
    for x in range(t.n):
        if x in fset:
            continue
        k = gap_of(t, seq, x)
        if k is not None:
            members[k].add(x)
    return [MinimalInterval(IntervalSpec(ends[k], ends[k + 1]), frozenset(members[k]))
            for k in range(len(seq) + 1)]


def is_minimal_interval(t: Tournament, f, interval: IntervalSpec) -> bool:
    seq = linear_sequence(t, f)
    ends = [None] + seq + [None]
    return any(ends[k] == interval.low and ends[k + 1] == interval.high
               for k in range(len(seq) + 1))


def interval_members(t: Tournament, f, interval: IntervalSpec) -> frozenset:
    for mi in minimal_intervals(t, f):
        if mi.interval == interval:
            return mi.members
    raise ValueError(f"{interval.describe()} is not a minimal interval")


def in_interval(t: Tournament, f, interval: IntervalSpec, x: int) -> bool:
    seq = linear_sequence(t, f)
    k = gap_of(t, seq, x) if x not in seq else None
    if k is None:
        return False
    ends = [None] + seq + [None]
    return ends[k] == interval.low and ends[k + 1] == interval.high


def is_subinterval(t: Tournament, f_new, inner: IntervalSpec, outer: IntervalSpec) -> bool:
    """Whether ``inner`` lies inside ``outer`` in the order of the transitive set ``f_new``."""
    seq = linear_sequence(t, f_new)
    pos = {v: i for i, v in enumerate(seq)}
    lo = lambda v: -1 if v is None else pos.get(v)
    hi = lambda v: len(seq) if v is None else pos.get(v)
    points = [lo(outer.low), lo(inner.low), hi(inner.high), hi(outer.high)]
    if any(p is None for p in points):
        return False
    return points[0] <= points[1] < points[2] <= points[3]


def extendibility_depth(t: Tournament, f, k: int, candidates: Optional[Iterable[int]] = None) -> int:
    """Largest ``d <= k`` with a transitive superset of ``F`` of size ``|F|+d``."""
    fs = _require_transitive(t, f)
    out = t.out_masks
    base = to_mask(fs)
    pool = (1 << t.n) - 1 if candidates is None else to_mask(candidates)
    pool &= ~base
    start = 0
    m = pool
    while m:
        b = m & -m
        if mask_is_transitive(out, base | b):
            start |= b
        m ^= b
    best = [0]

    def grow(chosen: int, depth: int, cand: int):
        if depth > best[0]:
            best[0] = depth
        if best[0] >= k:
            return
        while cand:
            if depth + cand.bit_count() <= best[0]:
                return
            low = cand & -cand
            cand ^= low
            nxt = chosen | low
            rest = 0
            m2 = cand
            while m2:
                b2 = m2 & -m2
                if mask_is_transitive(out, nxt | b2):
                    rest |= b2
                m2 ^= b2
            grow(nxt, depth + 1, rest)
            if best[0] >= k:
                return

    grow(base, 0, start)
    return min(best[0], k)


@dataclass(frozen=True)
class PartitionResult:
    p: frozenset
    q: frozenset
    depth_p: int
    depth_q: int
    interval_p: Optional[IntervalSpec]
    interval_q: Optional[IntervalSpec]


def _surviving_interval(t: Tournament, f_new, outer: IntervalSpec) -> Optional[IntervalSpec]:
    for mi in minimal_intervals(t, f_new):
        if mi.members and is_subinterval(t, f_new, mi.interval, outer):
            return mi.interval
    return None


def partition_extendible(t: Tournament, f, interval: IntervalSpec, j, k: int) -> PartitionResult:
    fs = _require_transitive(t, f)
    js = sorted(set(j))
    if not is_minimal_interval(t, fs, interval):
        raise ValueError(f"{interval.describe()} is not a minimal interval of F")
    members = interval_members(t, fs, interval)
    if not set(js) <= members:
        raise ValueError("J must lie inside the interval")
    if not t.is_transitive(set(fs) | set(js)):
        raise NotTransitiveError("F ∪ J is not transitive")
    best = None
    for r in range(len(js) + 1):
        for p in combinations(js, r):
            q = tuple(v for v in js if v not in p)
            dp = extendibility_depth(t, set(fs) | set(p), k)
            dq = extendibility_depth(t, set(fs) | set(q), k)
            key = (-min(dp, dq), p)
            if best is None or key < best[0]:
                best = (key, p, q, dp, dq)
    _, p, q, dp, dq = best
    fp, fq = set(fs) | set(p), set(fs) | set(q)
    return PartitionResult(
        frozenset(p), frozenset(q), dp, dq,
        _surviving_interval(t, fp, interval) if dp >= 1 else None,
        _surviving_interval(t, fq, interval) if dq >= 1 else None,
    )
