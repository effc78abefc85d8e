"""Ground conditions ``(F, A*, B*)`` over order-respecting posets and ``(c, A*, B*)`` over colorings."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Union

from ..instances import Coloring, InstanceFormatError, Poset, mask_members, parse_instance_lines, serialize_instance
from .tables import FunctionalTable


@dataclass(frozen=True)
class GroundPosetCondition:
    poset: Poset
    a_star: frozenset = frozenset()
    b_star: frozenset = frozenset()


@dataclass(frozen=True)
class GroundColoringCondition:
    coloring: Coloring
    a_star: frozenset = frozenset()
    b_star: frozenset = frozenset()


GroundCondition = Union[GroundPosetCondition, GroundColoringCondition]


def empty_condition(kind: str) -> GroundCondition:
    if kind == "poset":
        return GroundPosetCondition(Poset(0, ()))
    return GroundColoringCondition(Coloring(0, ()))


def _instance(cond):
    return cond.poset if isinstance(cond, GroundPosetCondition) else cond.coloring


def ground_problems(cond: GroundCondition) -> list:
    inst = _instance(cond)
    out = []
    if cond.a_star & cond.b_star:
        out.append("A* and B* overlap")
    if any(not 0 <= v < inst.n for v in cond.a_star | cond.b_star):
        out.append("A* or B* leaves the domain")
        return out
    if isinstance(cond, GroundPosetCondition):
        if not inst.order_respecting:
            out.append("poset is not order respecting")
        for a in cond.a_star:
            if not inst.down(a) <= cond.a_star:
                out.append(f"A* is not downward closed at {a}")
        for b in cond.b_star:
            if not inst.up(b) <= cond.b_star:
                out.append(f"B* is not upward closed at {b}")
    return out


def extension_problems(new: GroundCondition, old: GroundCondition) -> list:
    if type(new) is not type(old):
        return ["flavors differ"]
    out = [f"new: {p}" for p in ground_problems(new)] + [f"old: {p}" for p in ground_problems(old)]
    fn, fo = _instance(new), _instance(old)
    if fn.n < fo.n:
        return out + ["domain shrank"]
    if isinstance(new, GroundPosetCondition):
        if any(fn.leq(i, j) != fo.leq(i, j) for i in range(fo.n) for j in range(fo.n)):
            out.append("old part of the poset changed")
    else:
        if any(fn.color(i, j) != fo.color(i, j) for i in range(fo.n) for j in range(i + 1, fo.n)):
            out.append("old part of the coloring changed")
    if not old.a_star <= new.a_star or not old.b_star <= new.b_star:
        out.append("A* or B* shrank")
    for x in range(fo.n, fn.n):
        for a in old.a_star:
            ok = fn.leq(a, x) if isinstance(new, GroundPosetCondition) else fn.color(a, x) == 0
            if not ok:
                out.append(f"new point {x} violates the clause for {a} in A*")
        for b in old.b_star:
            ok = not fn.leq(b, x) if isinstance(new, GroundPosetCondition) else fn.color(b, x) == 1
            if not ok:
                out.append(f"new point {x} violates the clause for {b} in B*")
    return out


def ground_extends(new: GroundCondition, old: GroundCondition) -> bool:
    return not extension_problems(new, old)


def _grow_poset(poset: Poset, downs: list) -> Poset:
    """Append points whose down-sets (within all earlier points) are given."""
    n = poset.n
    down_masks = list(poset.down_masks)
    for k, req in enumerate(downs):
        p = n + k
        mask = 1 << p
        for j in req:
            mask |= down_masks[j]
        down_masks.append(mask)
    total = n + len(downs)
    rows = [0] * total
    for j in range(total):
        for i in mask_members(down_masks[j]):
            rows[i] |= 1 << j
    return Poset(total, tuple(rows))


def _grow_coloring(c: Coloring, columns: list) -> Coloring:
    n = c.n
    total = n + len(columns)
    colors = {}
    for k, col in enumerate(columns):
        for j, v in enumerate(col):
            colors[(j, n + k)] = v
    return Coloring.from_function(total, lambda i, j: c.color(i, j) if j < n else colors[(i, j)])


def _one_point(cond: GroundCondition) -> GroundCondition:
    """Extend by the least point consistent with the extension clauses."""
    if isinstance(cond, GroundPosetCondition):
        return replace(cond, poset=_grow_poset(cond.poset, [set(cond.a_star)]))
    col = [1 if j in cond.b_star else 0 for j in range(cond.coloring.n)]
    return replace(cond, coloring=_grow_coloring(cond.coloring, [col]))


def ground_decide(cond: GroundCondition, i: int) -> GroundCondition:
    inst = _instance(cond)
    if not 0 <= i <= inst.n:
        raise ValueError(f"vertex {i} is neither in nor next to the domain [0,{inst.n})")
    if i in cond.a_star or i in cond.b_star:
        return cond
    if i == inst.n:
        cond = _one_point(cond)
    if isinstance(cond, GroundPosetCondition):
        return replace(cond, b_star=cond.b_star | cond.poset.up(i))
    return replace(cond, b_star=cond.b_star | {i})


# ---------------------------------------------------------------- diagonalisation


def _least_extension(cond: GroundCondition, table: FunctionalTable, clauses, x: int):
    """The smallest extension satisfying ``clauses`` with ``x`` in its domain, or None."""
    inst = _instance(cond)
    n = inst.n
    top = max([x] + [max(i, j) for i, j, _ in clauses])
    total = top + 1 if top >= n else n
    poset = isinstance(cond, GroundPosetCondition)
    want = {}
    for i, j, v in clauses:
        key = (i, j) if poset else (min(i, j), max(i, j))
        want[key] = v
    for (i, j), v in want.items():
        if max(i, j) < n:
            if (int(inst.leq(i, j)) if poset else (inst.color(i, j) if i != j else -1)) != v:
                return None
    if poset:
        downs, down_masks = [], list(inst.down_masks)
        for p in range(n, total):
            if want.get((p, p), 1) == 0:
                return None
            if any(v == 1 and i > j and (i >= n or j >= n) for (i, j), v in want.items()):
                return None
            req = set(cond.a_star) | {i for (i, j), v in want.items() if j == p and v == 1 and i < p}
            mask = 1 << p
            for j in req:
                mask |= down_masks[j]
            below = set(mask_members(mask))
            if below & cond.b_star:
                return None
            if any(want.get((i, p)) == 0 for i in below):
                return None
            down_masks.append(mask)
            downs.append(req)
        return replace(cond, poset=_grow_poset(inst, downs))
    columns = []
    for p in range(n, total):
        col = []
        for j in range(p):
            forced = 0 if j in cond.a_star else 1 if j in cond.b_star else None
            clause = want.get((j, p))
            if forced is not None and clause is not None and clause != forced:
                return None
            col.append(forced if forced is not None else clause if clause is not None else 0)
        columns.append(col)
    if any(i == j for (i, j) in want):
        return None
    return replace(cond, coloring=_grow_coloring(inst, columns))


def _search(cond: GroundCondition, table: FunctionalTable, budget: int):
    """Least-cost extension making some ``x`` beyond the domain fire."""
    n = _instance(cond).n
    best = None
    for idx, (clauses, x) in enumerate(table.entries):
        if x < n:
            continue
        ext = _least_extension(cond, table, clauses, x)
        if ext is None:
            continue
        cost = _instance(ext).n - n
        if cost > budget or not table.fires(_instance(ext), x):
            continue
        key = (cost, x, idx)
        if best is None or key < best[0]:
            best = (key, ext, x)
    return best


@dataclass(frozen=True)
class DiagonalizeResult:
    success: bool
    condition: GroundCondition
    a: Optional[int] = None
    b: Optional[int] = None
    points_used: int = 0
    exhausted_round: Optional[int] = None


def ground_diagonalize(cond: GroundCondition, table: FunctionalTable, budget: int) -> DiagonalizeResult:
    expected = "poset" if isinstance(cond, GroundPosetCondition) else "coloring"
    if table.kind != expected:
        raise ValueError(f"{table.kind} table cannot act on a {expected} condition")
    used = 0
    current = cond
    found = []
    for round_no in (1, 2):
        hit = _search(current, table, budget - used)
        if hit is None:
            return DiagonalizeResult(False, cond, points_used=used, exhausted_round=round_no)
        (cost, x, _), ext, _ = hit
        used += cost
        if round_no == 1:
            absorb = ext.poset.down(x) if expected == "poset" else {x}
            current = replace(ext, a_star=ext.a_star | absorb)
        else:
            absorb = ext.poset.up(x) if expected == "poset" else {x}
            current = replace(ext, b_star=ext.b_star | absorb)
        found.append(x)
    return DiagonalizeResult(True, current, found[0], found[1], used)


def verify_diagonalize(cond: GroundCondition, table: FunctionalTable, result: DiagonalizeResult) -> list:
    out = extension_problems(result.condition, cond)
    if result.success:
        inst = _instance(result.condition)
        if result.a not in result.condition.a_star or result.b not in result.condition.b_star:
            out.append("witnesses not absorbed")
        if not (table.fires(inst, result.a) and table.fires(inst, result.b)):
            out.append("table does not fire on the witnesses")
    return out


# ---------------------------------------------------------------- file format


def serialize_ground(cond: GroundCondition) -> bytes:
    inst = _instance(cond)
    head = ["rmwb-ground v1",
            "A " + " ".join(map(str, sorted(cond.a_star))),
            "B " + " ".join(map(str, sorted(cond.b_star)))]
    return ("\n".join(l.rstrip() for l in head) + "\n").encode("ascii") + serialize_instance(inst)


def parse_ground(text) -> GroundCondition:
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("ascii")
    lines = [(i, l.strip()) for i, l in enumerate(text.split("\n"), start=1)
             if l.strip() and not l.strip().startswith("#")]
    if not lines or lines[0][1] != "rmwb-ground v1":
        raise InstanceFormatError("expected 'rmwb-ground v1' header", 1)
    sets = {}
    for number, line in lines[1:3]:
        parts = line.split()
        if not parts or parts[0] not in ("A", "B") or not all(p.isdigit() for p in parts[1:]):
            raise InstanceFormatError(f"bad set line {line!r}", number)
        sets[parts[0]] = frozenset(int(p) for p in parts[1:])
    if set(sets) != {"A", "B"}:
        raise InstanceFormatError("need one A line and one B line", lines[0][0])
    inst = parse_instance_lines(lines[3:])
    if isinstance(inst, Poset):
        cond = GroundPosetCondition(inst, sets["A"], sets["B"])
    elif isinstance(inst, Coloring):
        cond = GroundColoringCondition(inst, sets["A"], sets["B"])
    else:
        raise InstanceFormatError("ground conditions embed a poset or a coloring", lines[3][0])
    problems = ground_problems(cond)
    if problems:
        raise InstanceFormatError(problems[0], lines[1][0])
    return cond
