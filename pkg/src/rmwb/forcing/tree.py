"""Labelled partition tree over a chain ``S_1 ⊂ … ⊂ S_m`` and extraction of a safe infinite-in-the-limit set.

Nodes at level ``n`` are the halves of accepted partitions of ``S_n``; a node's
parent is the node labelled by its restriction to ``S_{n-1}``. Level 0 holds a
single root labelled ``∅``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..families import _persists_long_enough, set_key


class TreePreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class BadSetPredicate:
    """Accept ``P ∪ Q`` iff neither half contains a recorded bad set."""

    bad: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "bad", frozenset(frozenset(b) for b in self.bad))

    def safe(self, half) -> bool:
        half = frozenset(half)
        return not any(b <= half for b in self.bad)

    def accepts(self, p, q, level: int) -> bool:
        return self.safe(p) and self.safe(q)


@dataclass(frozen=True)
class PartitionTable:
    """Explicitly accepted partitions, one collection of halves per level."""

    levels: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "levels", {int(k): frozenset(frozenset(h) for h in v)
                                            for k, v in dict(self.levels).items()})

    def accepts(self, p, q, level: int) -> bool:
        halves = self.levels.get(level, frozenset())
        return frozenset(p) in halves or frozenset(q) in halves


@dataclass
class TreeResult:
    levels: list                # levels[n]: {label: parent label}
    extracted: frozenset
    case: int
    node: tuple                 # (level, label) the extraction was read from
    increases: int = 0


def _check_chain(chain: Sequence) -> list:
    chain = [frozenset(s) for s in chain]
    if not chain:
        raise TreePreconditionError("the chain is empty")
    prev = frozenset()
    for n, s in enumerate(chain, start=1):
        if not prev < s:
            raise TreePreconditionError(f"S_{n} does not properly extend S_{n - 1}")
        prev = s
    return chain


def _halves(s: frozenset):
    items = sorted(s)
    for mask in range(1 << len(items)):
        p = frozenset(items[i] for i in range(len(items)) if mask >> i & 1)
        yield p, s - p


def build_tree(chain: Sequence, r) -> list:
    chain = _check_chain(chain)
    levels = [{frozenset(): None}]
    for n, s in enumerate(chain, start=1):
        below = chain[n - 2] if n > 1 else frozenset()
        level = {}
        for p, q in _halves(s):
            if not r.accepts(p, q, n):
                continue
            for label in (p, q):
                parent = label & below
                if parent not in levels[-1]:
                    raise TreePreconditionError(
                        f"accepted partition at level {n} restricts to an unaccepted one")
                level[label] = parent
        if not level:
            raise TreePreconditionError(f"no accepted partition of S_{n} (level {n})")
        levels.append(level)
    return levels


def partition_path_tree(chain: Sequence, r) -> TreeResult:
    levels = build_tree(chain, r)
    chain = [frozenset(s) for s in chain]
    m = len(chain)
    top = chain[-1]
    # case 1: a label that reappears at every later level, for long enough
    for n in range(m + 1):
        if not _persists_long_enough(n, m + 1):
            break
        for label in sorted(levels[n], key=set_key):
            if all(label in levels[k] for k in range(n, m + 1)):
                return TreeResult(levels, top - label, 1, (n, label))
    # case 2: follow the path whose labels grow most often
    best = None
    for label in sorted(levels[m], key=set_key):
        path, cur = [], label
        for k in range(m, -1, -1):
            path.append(cur)
            cur = levels[k][cur]
        grows = sum(1 for a, b in zip(path[1:], path) if a < b)
        if best is None or grows > best[0]:
            best = (grows, label)
    return TreeResult(levels, best[1], 2, (m, best[1]), best[0])


def verify_tree(chain: Sequence, r, result: TreeResult) -> list:
    """Independent re-check that the extraction is a safe half at every level it covers."""
    chain = [frozenset(s) for s in chain]
    out = []
    ext = result.extracted
    if not ext <= chain[-1]:
        out.append("extraction leaves the chain")
    if not r.accepts(ext, chain[-1] - ext, len(chain)):
        out.append("extraction is not a half of an accepted top partition")
    if result.case == 1:
        n, label = result.node
        for k in range(max(n, 1), len(chain) + 1):
            if not r.accepts(label, chain[k - 1] - label, k):
                out.append(f"label does not persist at level {k}")
                break
    if isinstance(r, BadSetPredicate) and not r.safe(ext):
        out.append("extraction contains a bad set")
    return out
