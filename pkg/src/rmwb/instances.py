"""Instance types, seeded generation, tail-stability reports and the v1 text format.

Vertices are always ``0..n-1``. Pair data for colorings and tournaments is
stored row-major: pair ``(i, j)`` with ``i < j`` sits at ``pair_index(n, i, j)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional

from .prng import XorShift64Star

KINDS = ("tournament", "coloring", "poset", "linorder")


class InstanceFormatError(ValueError):
    """Malformed or axiom-violating instance text."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


def pair_index(n: int, i: int, j: int) -> int:
    return i * (2 * n - i - 1) // 2 + (j - i - 1)


def _check_bits(n: int, bits: tuple) -> None:
    if n < 0:
        raise ValueError("vertex count must be non-negative")
    if len(bits) != n * (n - 1) // 2:
        raise ValueError(f"expected {n * (n - 1) // 2} pair values, got {len(bits)}")
    if any(b not in (0, 1) for b in bits):
        raise ValueError("pair values must be 0 or 1")


@dataclass(frozen=True)
class Coloring:
    n: int
    bits: tuple

    def __post_init__(self):
        _check_bits(self.n, self.bits)

    @classmethod
    def from_function(cls, n: int, fn) -> "Coloring":
        return cls(n, tuple(fn(i, j) for i in range(n) for j in range(i + 1, n)))

    def color(self, x: int, y: int) -> int:
        if x == y:
            raise ValueError("no color on the diagonal")
        if x > y:
            x, y = y, x
        return self.bits[pair_index(self.n, x, y)]

    @cached_property
    def masks(self) -> tuple:
        """Per color, per vertex: bitmask of neighbours joined with that color."""
        m = [[0] * self.n, [0] * self.n]
        k = 0
        for i in range(self.n):
            for j in range(i + 1, self.n):
                c = self.bits[k]
                m[c][i] |= 1 << j
                m[c][j] |= 1 << i
                k += 1
        return (tuple(m[0]), tuple(m[1]))


@dataclass(frozen=True)
class Tournament:
    """``bits[pair_index(n, i, j)] == 1`` iff ``T(i, j)`` for ``i < j``."""

    n: int
    bits: tuple

    def __post_init__(self):
        _check_bits(self.n, self.bits)

    @classmethod
    def from_function(cls, n: int, beats) -> "Tournament":
        return cls(n, tuple(1 if beats(i, j) else 0 for i in range(n) for j in range(i + 1, n)))

    def beats(self, x: int, y: int) -> bool:
        if x == y:
            return False
        if x < y:
            return self.bits[pair_index(self.n, x, y)] == 1
        return self.bits[pair_index(self.n, y, x)] == 0

    @cached_property
    def out_masks(self) -> tuple:
        out = [0] * self.n
        k = 0
        for i in range(self.n):
            for j in range(i + 1, self.n):
                if self.bits[k]:
                    out[i] |= 1 << j
                else:
                    out[j] |= 1 << i
                k += 1
        return tuple(out)

    def is_transitive(self, vertices: Iterable[int]) -> bool:
        return mask_is_transitive(self.out_masks, to_mask(vertices))

    def restrict(self, vertices: Iterable[int]) -> "Tournament":
        vs = sorted(vertices)
        return Tournament.from_function(len(vs), lambda a, b: self.beats(vs[a], vs[b]))


def to_mask(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def mask_members(mask: int) -> list:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def mask_is_transitive(out_masks, mask: int) -> bool:
    # a tournament is transitive iff its score sequence is 0..k-1
    seen = 0
    m = mask
    while m:
        low = m & -m
        v = low.bit_length() - 1
        s = (out_masks[v] & mask).bit_count()
        if seen >> s & 1:
            return False
        seen |= 1 << s
        m ^= low
    return True


@dataclass(frozen=True)
class Poset:
    """``rows[i]`` is the bitmask of all ``j`` with ``i ⪯ j``."""

    n: int
    rows: tuple

    def __post_init__(self):
        problem = poset_axiom_problem(self.n, self.rows)
        if problem:
            raise ValueError(problem[1])

    @classmethod
    def from_relation(cls, n: int, leq) -> "Poset":
        return cls(n, tuple(sum(1 << j for j in range(n) if leq(i, j)) for i in range(n)))

    def leq(self, x: int, y: int) -> bool:
        return bool(self.rows[x] >> y & 1)

    def comparable(self, x: int, y: int) -> bool:
        return self.leq(x, y) or self.leq(y, x)

    @property
    def order_respecting(self) -> bool:
        return all(self.rows[i] & ((1 << i) - 1) == 0 for i in range(self.n))

    @cached_property
    def down_masks(self) -> tuple:
        down = [0] * self.n
        for i in range(self.n):
            for j in mask_members(self.rows[i]):
                down[j] |= 1 << i
        return tuple(down)

    def up(self, x: int) -> frozenset:
        return frozenset(mask_members(self.rows[x]))

    def down(self, x: int) -> frozenset:
        return frozenset(mask_members(self.down_masks[x]))


def poset_axiom_problem(n: int, rows) -> Optional[tuple]:
    """Return ``(row, message)`` for the first axiom failure, else None."""
    if len(rows) != n:
        return (None, f"expected {n} rows, got {len(rows)}")
    full = (1 << n) - 1
    for i in range(n):
        if rows[i] & ~full:
            return (i, f"row {i} names a vertex outside [0,{n})")
        if not rows[i] >> i & 1:
            return (i, f"reflexivity fails at {i}")
    for i in range(n):
        for j in mask_members(rows[i]):
            if j != i and rows[j] >> i & 1:
                return (i, f"antisymmetry fails for {i},{j}")
            if rows[j] & ~rows[i]:
                k = mask_members(rows[j] & ~rows[i])[0]
                return (i, f"transitivity fails: {i}⪯{j}⪯{k} but not {i}⪯{k}")
    return None


@dataclass(frozen=True)
class LinearOrder:
    """``rank[v]`` is the ≺-position of ``v``; rank 0 is ≺-least."""

    n: int
    rank: tuple

    def __post_init__(self):
        if len(self.rank) != self.n or sorted(self.rank) != list(range(self.n)):
            raise ValueError("rank must be a permutation of [0,n)")

    @classmethod
    def from_ranks(cls, rank) -> "LinearOrder":
        return cls(len(rank), tuple(rank))

    @classmethod
    def from_sequence(cls, order) -> "LinearOrder":
        """Build from the vertices listed ≺-least first."""
        rank = [0] * len(order)
        for pos, v in enumerate(order):
            rank[v] = pos
        return cls(len(order), tuple(rank))

    @cached_property
    def order(self) -> tuple:
        seq = [0] * self.n
        for v, r in enumerate(self.rank):
            seq[r] = v
        return tuple(seq)

    def precedes(self, x: int, y: int) -> bool:
        return self.rank[x] < self.rank[y]


# ---------------------------------------------------------------- generation


def random_instance(kind: str, n: int, seed: int):
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = XorShift64Star(seed)
    pairs = n * (n - 1) // 2
    if kind == "coloring":
        return Coloring(n, tuple(rng.next_bit() for _ in range(pairs)))
    if kind == "tournament":
        return Tournament(n, tuple(rng.next_bit() for _ in range(pairs)))
    if kind == "linorder":
        rank = list(range(n))
        for i in range(n - 1, 0, -1):
            j = rng.below(i + 1)
            rank[i], rank[j] = rank[j], rank[i]
        return LinearOrder(n, tuple(rank))
    if kind == "poset":
        rows = [1 << i for i in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                if rng.next_bit():
                    rows[i] |= 1 << j
        # closure: processing from the top keeps every row already closed
        for i in range(n - 1, -1, -1):
            acc = rows[i]
            for j in mask_members(rows[i] & ~(1 << i)):
                acc |= rows[j]
            rows[i] = acc
        return Poset(n, tuple(rows))
    raise ValueError(f"unknown kind {kind!r}")


# ---------------------------------------------------------------- text format


def kind_of(x) -> str:
    for kind, cls in (("tournament", Tournament), ("coloring", Coloring),
                      ("poset", Poset), ("linorder", LinearOrder)):
        if isinstance(x, cls):
            return kind
    raise TypeError(f"not an instance: {type(x).__name__}")


def serialize_instance(x) -> bytes:
    kind = kind_of(x)
    lines = ["rmwb v1", f"kind {kind}", f"n {x.n}"]
    if kind in ("tournament", "coloring"):
        k = 0
        for i in range(x.n - 1):
            width = x.n - 1 - i
            lines.append("".join(str(b) for b in x.bits[k:k + width]))
            k += width
    elif kind == "poset":
        for i in range(x.n):
            lines.append("".join("1" if x.rows[i] >> j & 1 else "0" for j in range(x.n)))
    else:
        lines.append(" ".join(str(v) for v in x.order))
    return ("\n".join(lines) + "\n").encode("ascii")


def _content_lines(text) -> list:
    if isinstance(text, (bytes, bytearray)):
        try:
            text = text.decode("ascii")
        except UnicodeDecodeError as exc:
            raise InstanceFormatError("instance text must be ASCII") from exc
    out = []
    for number, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        out.append((number, line.strip()))
    return out


def parse_instance(text):
    lines = _content_lines(text)
    return parse_instance_lines(lines)


def parse_instance_lines(lines: list):
    """Parse from ``(line_number, content)`` pairs; used for embedded blocks too."""
    if len(lines) < 3:
        raise InstanceFormatError("truncated header", lines[-1][0] if lines else 1)
    (l1, h1), (l2, h2), (l3, h3) = lines[:3]
    if h1 != "rmwb v1":
        raise InstanceFormatError(f"expected 'rmwb v1', got {h1!r}", l1)
    parts = h2.split()
    if len(parts) != 2 or parts[0] != "kind" or parts[1] not in KINDS:
        raise InstanceFormatError(f"bad kind line {h2!r}", l2)
    kind = parts[1]
    parts = h3.split()
    if len(parts) != 2 or parts[0] != "n" or not parts[1].isdigit() or int(parts[1]) < 1:
        raise InstanceFormatError(f"bad size line {h3!r}", l3)
    n = int(parts[1])
    body = lines[3:]
    last = lines[-1][0]

    if kind in ("tournament", "coloring"):
        if len(body) != n - 1:
            raise InstanceFormatError(f"expected {n - 1} body lines, got {len(body)}", last)
        bits = []
        for i, (number, line) in enumerate(body):
            if len(line) != n - 1 - i or set(line) - {"0", "1"}:
                raise InstanceFormatError(f"expected {n - 1 - i} characters in {{0,1}}", number)
            bits.extend(1 if ch == "1" else 0 for ch in line)
        cls = Tournament if kind == "tournament" else Coloring
        return cls(n, tuple(bits))

    if kind == "poset":
        if len(body) != n:
            raise InstanceFormatError(f"expected {n} body lines, got {len(body)}", last)
        rows = []
        for number, line in body:
            if len(line) != n or set(line) - {"0", "1"}:
                raise InstanceFormatError(f"expected {n} characters in {{0,1}}", number)
            rows.append(sum(1 << j for j, ch in enumerate(line) if ch == "1"))
        problem = poset_axiom_problem(n, rows)
        if problem:
            row, message = problem
            raise InstanceFormatError(message, body[row][0] if row is not None else last)
        return Poset(n, tuple(rows))

    if len(body) != 1:
        raise InstanceFormatError(f"expected 1 body line, got {len(body)}", last)
    number, line = body[0]
    tokens = line.split()
    if not all(t.isdigit() for t in tokens):
        raise InstanceFormatError("vertex ids must be naturals", number)
    order = [int(t) for t in tokens]
    if sorted(order) != list(range(n)):
        raise InstanceFormatError(f"body must list each of 0..{n - 1} once", number)
    return LinearOrder.from_sequence(order)


# ---------------------------------------------------------------- stability


@dataclass(frozen=True)
class StabilityReport:
    kind: str
    tail_start: int
    a_star: frozenset
    b_star: frozenset
    c_star: frozenset
    unresolved: frozenset


def default_tau(n: int) -> int:
    return (n + 1) // 2


def stability_report(x, tau: Optional[int] = None) -> StabilityReport:
    """Classify each vertex by its behaviour on the tail ``[max(v+1, tau), n)``.

    colorings: a_star = all color 0, b_star = all color 1.
    tournaments: a_star = beats the whole tail, b_star = beaten by the whole tail.
    posets: a_star = below the tail, b_star = incomparable, c_star = above.

    The tail start is clamped to ``n-1`` so only the last vertex ever has an
    empty tail; an empty tail is filed under a_star.
    """
    kind = kind_of(x)
    if kind == "linorder":
        raise TypeError("stability is defined for colorings, tournaments and posets")
    n = x.n
    if tau is None:
        tau = default_tau(n)
    if tau < 0 or tau > n:
        raise ValueError(f"tail start {tau} outside [0,{n}]")
    start = min(tau, n - 1)
    classes = ([], [], [], [])
    for v in range(n):
        tail = range(max(v + 1, start), n)
        if not tail:
            classes[0].append(v)
            continue
        if kind == "coloring":
            tests = (lambda y: x.color(v, y) == 0, lambda y: x.color(v, y) == 1)
        elif kind == "tournament":
            tests = (lambda y: x.beats(v, y), lambda y: x.beats(y, v))
        else:
            tests = (lambda y: x.leq(v, y), lambda y: not x.comparable(v, y),
                     lambda y: x.leq(y, v))
        for slot, test in enumerate(tests):
            if all(test(y) for y in tail):
                classes[slot].append(v)
                break
        else:
            classes[3].append(v)
    return StabilityReport(kind, tau, *(frozenset(c) for c in classes))


@dataclass(frozen=True)
class StableishReport:
    cut: frozenset
    method: str
    threshold: Optional[int] = None
    heuristic: bool = False
    max_of_cut: Optional[int] = None
    min_of_complement: Optional[int] = None

    @property
    def witnesses(self) -> tuple:
        return (self.max_of_cut, self.min_of_complement)


def stableish_classify(order: LinearOrder, cut: Optional[Iterable[int]] = None,
                       threshold: Optional[int] = None) -> StableishReport:
    if (cut is None) == (threshold is None):
        raise ValueError("give exactly one of cut or threshold")
    if cut is not None:
        cut = frozenset(cut)
        if any(not 0 <= v < order.n for v in cut):
            raise ValueError("cut names a vertex outside the order")
        positions = sorted(order.rank[v] for v in cut)
        if positions != list(range(len(cut))):
            raise ValueError("cut is not ≺-downward closed")
        method, heuristic = "explicit", False
    else:
        cut = frozenset(v for v in range(order.n) if order.rank[v] < threshold)
        method, heuristic = "threshold", True
    k = len(cut)
    top = order.order[k - 1] if k else None
    bottom = order.order[k] if k < order.n else None
    return StableishReport(cut, method, threshold, heuristic, top, bottom)


def extract_monotone_from_cut(order: LinearOrder, report: StableishReport, side: str) -> tuple:
    """Greedy ℕ-increasing walk that is ≺-ascending in the cut or ≺-descending outside it."""
    if side == "ascending":
        pool = sorted(report.cut)
        better = lambda cur, v: order.precedes(cur, v)
    elif side == "descending":
        pool = sorted(set(range(order.n)) - report.cut)
        better = lambda cur, v: order.precedes(v, cur)
    else:
        raise ValueError("side must be 'ascending' or 'descending'")
    if not pool:
        raise ValueError(f"{side} side is empty")
    seq = [pool[0]]
    for v in pool[1:]:
        if better(seq[-1], v):
            seq.append(v)
    return tuple(seq)
