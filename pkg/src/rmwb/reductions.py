"""Instance translations between the principles and the matching solution pullbacks."""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from itertools import combinations
from typing import Optional

from .instances import Coloring, LinearOrder, Poset, Tournament, InstanceFormatError

SOLUTION_KINDS = ("homogeneous", "chain", "antichain", "ascending", "descending", "transitive")


class SolutionError(ValueError):
    """A solution set fails the property its kind claims."""


@dataclass(frozen=True)
class SolutionSet:
    kind: str
    vertices: tuple
    color: Optional[int] = None

    def __post_init__(self):
        if self.kind not in SOLUTION_KINDS:
            raise ValueError(f"unknown solution kind {self.kind!r}")
        if (self.kind == "homogeneous") != (self.color is not None):
            raise ValueError("a color is required exactly for homogeneous sets")
        if any(a >= b for a, b in zip(self.vertices, self.vertices[1:])):
            raise ValueError("vertices must be strictly increasing")

    def __len__(self):
        return len(self.vertices)


def solution_holds(instance, sol: SolutionSet) -> bool:
    vs = sol.vertices
    if vs and (vs[0] < 0 or vs[-1] >= instance.n):
        return False
    pairs = combinations(vs, 2)
    if sol.kind == "homogeneous":
        return isinstance(instance, Coloring) and all(instance.color(x, y) == sol.color for x, y in pairs)
    if sol.kind == "transitive":
        return isinstance(instance, Tournament) and instance.is_transitive(vs)
    if sol.kind in ("chain", "antichain"):
        if not isinstance(instance, Poset):
            return False
        want = sol.kind == "chain"
        return all(instance.comparable(x, y) == want for x, y in pairs)
    if not isinstance(instance, LinearOrder):
        return False
    if sol.kind == "ascending":
        return all(instance.precedes(x, y) for x, y in zip(vs, vs[1:]))
    return all(instance.precedes(y, x) for x, y in zip(vs, vs[1:]))


def check_solution(instance, sol: SolutionSet) -> SolutionSet:
    if not solution_holds(instance, sol):
        raise SolutionError(f"{sol.kind} claim fails for {sol.vertices}")
    return sol


def poset_to_coloring(m: Poset) -> Coloring:
    return Coloring.from_function(m.n, lambda x, y: 0 if m.comparable(x, y) else 1)


def homogeneous_to_chain_antichain(m: Poset, h: SolutionSet) -> SolutionSet:
    if h.kind != "homogeneous" or not solution_holds(poset_to_coloring(m), h):
        raise SolutionError("not homogeneous for the comparability coloring")
    out = SolutionSet("chain" if h.color == 0 else "antichain", h.vertices)
    return check_solution(m, out)


def linear_to_poset(order: LinearOrder) -> Poset:
    return Poset.from_relation(order.n, lambda x, y: x <= y and order.rank[x] <= order.rank[y])


def solution_to_monotone(order: LinearOrder, s: SolutionSet) -> SolutionSet:
    if s.kind not in ("chain", "antichain") or not solution_holds(linear_to_poset(order), s):
        raise SolutionError(f"not a {s.kind} of the derived poset")
    out = SolutionSet("ascending" if s.kind == "chain" else "descending", s.vertices)
    return check_solution(order, out)


def coloring_to_tournament(c: Coloring) -> Tournament:
    # bit 1 means T(i, j) for i < j, which is exactly c(i, j) = 1
    return Tournament(c.n, c.bits)


def tournament_to_coloring(t: Tournament) -> Coloring:
    return Coloring(t.n, tuple(1 - b for b in t.bits))


def induced_order(t: Tournament, s: SolutionSet) -> LinearOrder:
    """Order of ``s.vertices`` under the beats relation, indexed by position in ``s``."""
    if not t.is_transitive(s.vertices):
        raise SolutionError("set is not transitive")
    vs = s.vertices
    # in a transitive set the rank is the number of members beating you
    return LinearOrder(len(vs), tuple(sum(t.beats(u, v) for u in vs) for v in vs))


def longest_increasing(values) -> list:
    """Positions of the lexicographically least longest strictly increasing subsequence.

    Patience sorting from the right gives the best length starting at each
    position; one greedy pass from the left then takes the earliest usable one.
    """
    n = len(values)
    tails, best = [], [0] * n
    for i in range(n - 1, -1, -1):
        k = bisect_left(tails, -values[i])
        if k == len(tails):
            tails.append(-values[i])
        else:
            tails[k] = -values[i]
        best[i] = k + 1
    out, need, last = [], len(tails), None
    for i, v in enumerate(values):
        if need and best[i] == need and (last is None or v > last):
            out.append(i)
            need -= 1
            last = v
    return out


def transitive_to_homogeneous(c: Coloring, s: SolutionSet) -> SolutionSet:
    t = coloring_to_tournament(c)
    ranks = induced_order(t, s).rank
    up = longest_increasing(ranks)
    down = longest_increasing([-r for r in ranks])
    if len(up) >= len(down):
        out = SolutionSet("homogeneous", tuple(s.vertices[i] for i in up), 1)
    else:
        out = SolutionSet("homogeneous", tuple(s.vertices[i] for i in down), 0)
    return check_solution(c, out)


# ---------------------------------------------------------------- solution files


def serialize_solution(sol: SolutionSet) -> bytes:
    kind = f"kind {sol.kind}" + (f" color {sol.color}" if sol.color is not None else "")
    return ("rmwb-sol v1\n" + kind + "\n" + " ".join(map(str, sol.vertices)) + "\n").encode("ascii")


def parse_solution(text) -> SolutionSet:
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("ascii")
    lines = [(i, l.strip()) for i, l in enumerate(text.split("\n"), start=1)
             if not l.strip().startswith("#")]
    while lines and not lines[-1][1]:
        lines.pop()
    if len(lines) < 2 or lines[0][1] != "rmwb-sol v1":
        raise InstanceFormatError("expected 'rmwb-sol v1' header", 1)
    number, head = lines[1]
    parts = head.split()
    if len(parts) not in (2, 4) or parts[0] != "kind" or parts[1] not in SOLUTION_KINDS:
        raise InstanceFormatError(f"bad kind line {head!r}", number)
    color = None
    if len(parts) == 4:
        if parts[2] != "color" or parts[3] not in ("0", "1"):
            raise InstanceFormatError(f"bad color clause {head!r}", number)
        color = int(parts[3])
    body = lines[2][1] if len(lines) > 2 else ""
    if len(lines) > 3:
        raise InstanceFormatError("trailing content", lines[3][0])
    try:
        return SolutionSet(parts[1], tuple(int(v) for v in body.split()), color)
    except ValueError as exc:
        raise InstanceFormatError(str(exc), lines[2][0] if len(lines) > 2 else number) from exc
