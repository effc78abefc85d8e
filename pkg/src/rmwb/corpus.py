"""Seeded corpus builders for families and ground conditions."""

from __future__ import annotations

from .families import Family
from .instances import Tournament, mask_members, random_instance
from .prng import XorShift64Star


def random_family(depth: int, seed: int, n: int = 40, max_branch: int = 3,
                  max_width: int = 6, block: int = 3, ambient: Tournament = None) -> Family:
    """A family whose levels grow by blocks of at most ``block`` fresh vertices.

    Parents may receive no children once a level is full, which leaves dead
    branches; at least one child is always produced.
    """
    if ambient is None:
        ambient = random_instance("tournament", n, seed)
    n = ambient.n
    if block * depth > n:
        raise ValueError(f"{depth} levels of width {block} need {block * depth} vertices")
    rng = XorShift64Star(seed ^ 0xF00D)
    top = -1

    def fresh():
        nonlocal top
        w = 1 + rng.below(block)
        start = top + 1
        top += w
        return list(range(start, start + w))

    def subsets(points, count):
        out = []
        tries = 0
        limit = (1 << len(points)) - 1
        while len(out) < min(count, limit) and tries < 8 * count:
            tries += 1
            m = 1 + rng.below(limit)
            s = frozenset(points[i] for i in mask_members(m))
            if s not in out:
                out.append(s)
        return out

    pts = fresh()
    levels = [subsets(pts, 1 + rng.below(2))]
    for _ in range(depth - 1):
        pts = fresh()
        nxt = []
        for parent in levels[-1]:
            if len(nxt) >= max_width:
                break
            for add in subsets(pts, 1 + rng.below(max_branch)):
                if len(nxt) < max_width:
                    nxt.append(parent | add)
        levels.append(nxt)
    return Family(ambient, tuple(levels))


def random_ground(kind: str, n: int, seed: int):
    """A valid ground condition: A* a down-closed seed set, B* the up-closure of points outside it."""
    from .forcing.ground import GroundColoringCondition, GroundPosetCondition

    rng = XorShift64Star(seed ^ 0x6A0D)
    inst = random_instance(kind, n, seed)
    picks = [rng.below(n) for _ in range(rng.below(3))]
    if kind == "poset":
        a_star = frozenset().union(*(inst.down(p) for p in picks)) if picks else frozenset()
        rest = [v for v in range(n) if v not in a_star]
        b_star = frozenset()
        for _ in range(rng.below(3)):
            if rest:
                b_star |= inst.up(rest[rng.below(len(rest))])
        return GroundPosetCondition(inst, a_star, b_star)
    if kind == "coloring":
        a_star = frozenset(picks)
        b_star = frozenset(v for v in (rng.below(n) for _ in range(rng.below(3))) if v not in a_star)
        return GroundColoringCondition(inst, a_star, b_star)
    raise ValueError(f"ground conditions are posets or colorings, not {kind!r}")


def fire_twice_table(cond, seed: int):
    """A functional table with two satisfiable outputs beyond the domain plus decoys.

    Live entries test only relations already decided in ``cond``; decoys
    contradict one of them or point inside the domain.
    """
    from .forcing.ground import GroundPosetCondition
    from .forcing.tables import FunctionalTable

    rng = XorShift64Star(seed ^ 0x7AB1E)
    poset = isinstance(cond, GroundPosetCondition)
    inst = cond.poset if poset else cond.coloring
    n = inst.n

    def value(i, j):
        return int(inst.leq(i, j)) if poset else inst.color(i, j)

    pairs = [(i, j) for i in range(n) for j in range(n) if i != j and (poset or i < j)]

    def clauses(count):
        out = []
        for _ in range(count):
            if pairs:
                i, j = pairs[rng.below(len(pairs))]
                out.append((i, j, value(i, j)))
        return tuple(dict.fromkeys(out))

    first = n + rng.below(4)
    second = first + 1 + rng.below(4)
    entries = [(clauses(rng.below(3)), first), (clauses(rng.below(3)), second)]
    if pairs:
        i, j = pairs[rng.below(len(pairs))]
        entries.append((((i, j, 1 - value(i, j)),), n + rng.below(3)))
    entries.append(((), rng.below(n)))
    return FunctionalTable("poset" if poset else "coloring", tuple(entries))
