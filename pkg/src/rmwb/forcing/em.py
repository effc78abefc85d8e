"""Conditions ``(F, I, S)`` for transitive subtournaments and the settle machinery.

``F`` is a finite transitive set, ``I`` one of its gaps, and ``S`` a family of
sets inside that gap and above ``F``. Requirement tables here have the ``em``
flavor; the query ``F ∪ F′ ∈ K`` with bounds is answered by
``RequirementTable.accepts``.

Throughout, the last level of the family stands in for "arbitrarily far":
the settle search reads the window ``(x, x+n+2)`` at level ``n`` but the
unbounded window ``(x, ∞)`` at the last level.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..families import (Family, FamilyError, ShallowFamilyError, family_leq, family_split, predecessor,
                        prepend, set_key, surviving, validate_family, _persists_long_enough)
from ..instances import mask_is_transitive, to_mask
from ..solvers import IntervalSpec, in_interval, is_minimal_interval, is_subinterval, linear_sequence
from .tables import RequirementTable, TableError


class DensityViolation(RuntimeError):
    """The table is essential at the bounds yet no in-table split realises density."""

    def __init__(self, message: str = "density violation at horizon"):
        super().__init__(message)


class UndefinedAValue(ValueError):
    pass


@dataclass(frozen=True)
class EmCondition:
    f: frozenset
    interval: IntervalSpec
    family: Family

    @property
    def ambient(self):
        return self.family.ambient


def em_problems(q: EmCondition) -> list:
    t = q.ambient
    out = []
    if not t.is_transitive(q.f):
        return ["F is not transitive"]
    if not is_minimal_interval(t, q.f, q.interval):
        out.append(f"{q.interval.describe()} is not a minimal interval of F")
        return out
    report = validate_family(q.family)
    if not report.ok:
        out.append("S is not a family: " + report.first())
    if q.family.depth < 1:
        out.append("S has no levels")
    top = max(q.f, default=-1)
    for n, lv in enumerate(q.family.levels):
        for e in lv:
            if any(x <= top for x in e):
                out.append(f"level {n} set {set_key(e)} is not above F")
            stray = [x for x in e if not in_interval(t, q.f, q.interval, x)]
            if stray:
                out.append(f"level {n} set {set_key(e)} leaves the interval at {stray[0]}")
    return out


def validate_em(q: EmCondition) -> bool:
    return not em_problems(q)


def em_extension_problems(q2: EmCondition, q1: EmCondition) -> list:
    out = [f"new condition: {p}" for p in em_problems(q2)]
    out += [f"old condition: {p}" for p in em_problems(q1)]
    if out:
        return out
    if not q1.f <= q2.f:
        return ["F is not contained in F′"]
    new = q2.f - q1.f
    if new and q1.f and min(new) <= max(q1.f):
        out.append("F′∖F does not lie above F")
    if not is_subinterval(q2.ambient, q2.f, q2.interval, q1.interval):
        out.append("I′ is not inside I")
    try:
        if not family_leq(prepend(new, q2.family), q1.family):
            out.append("(F′∖F)+S′ is not below S")
    except FamilyError as exc:
        out.append(str(exc))
    return out


def validate_em_extension(q2: EmCondition, q1: EmCondition) -> bool:
    return not em_extension_problems(q2, q1)


# ---------------------------------------------------------------- table queries


def _good_masks(table: RequirementTable, q: EmCondition, e, a_ok, b_ok) -> list:
    """Bitmasks over ``sorted(e)`` of transitive ``F′ ⊆ E`` with ``F ∪ F′`` accepted."""
    t = q.ambient
    out_masks = t.out_masks
    elems = sorted(e)
    base = to_mask(q.f)
    goods = []
    for m in range(1 << len(elems)):
        chosen = {elems[i] for i in range(len(elems)) if m >> i & 1}
        whole = base | to_mask(chosen)
        if not mask_is_transitive(out_masks, whole):
            continue
        if table.accepts(q.f | chosen, a_ok, b_ok):
            goods.append(m)
    return goods


def _side_good(goods: list, side: int) -> bool:
    return any(g & ~side == 0 for g in goods)


def _first_bad_partition(goods: list, size: int) -> Optional[int]:
    """A mask ``P`` such that neither ``P`` nor its complement contains a good set."""
    full = (1 << size) - 1
    for p in range(1 << size):
        if not _side_good(goods, p) and not _side_good(goods, full & ~p):
            return p
    return None


def level_dense(table: RequirementTable, q: EmCondition, n: int, a_ok, b_ok) -> bool:
    """Every partition of every set at level ``n`` has a side with an accepted extension."""
    for e in q.family.levels[n]:
        goods = _good_masks(table, q, e, a_ok, b_ok)
        if _first_bad_partition(goods, len(e)) is not None:
            return False
    return True


def _require_a(table: RequirementTable, q: EmCondition) -> int:
    if table.flavor != "em":
        raise TableError("settling needs an em table")
    a = table.a_value(q.f)
    if a is None:
        raise UndefinedAValue(f"a-value undefined for {set_key(q.f)}")
    return a


@dataclass
class EmEssentialReport:
    holds: bool
    failing_x: Optional[int] = None
    witnesses: list = field(default_factory=list)


def bounded_essential_em(table: RequirementTable, q: EmCondition, x_range: int,
                         set_bound: int, level_bound: int) -> EmEssentialReport:
    """∀x ∃B>x ∃n: every partition of every set at level n has an accepted side.

    The largest admissible ``B = (x, set_bound)`` is used (membership is
    positive); witnesses record ``(x, n, b-values used)``.
    """
    a = table.a_value(q.f)
    if a is None:
        return EmEssentialReport(False, 0)
    a_ok = lambda v: v == a
    report = EmEssentialReport(True)
    for x in range(x_range):
        b_ok = lambda b, x=x: x < b < set_bound
        level = next((n for n in range(min(level_bound, q.family.depth))
                      if level_dense(table, q, n, a_ok, b_ok)), None)
        if level is None:
            return EmEssentialReport(False, x)
        used = sorted({b for _, av, b in table.entries if av == a and b_ok(b)})
        report.witnesses.append((x, level, tuple(used)))
    return report


@dataclass
class SettleReport:
    settles: bool
    via: Optional[str]
    counterexample: Optional[tuple] = None


def settles_check(q: EmCondition, table: RequirementTable, x: int, depth: Optional[int] = None) -> SettleReport:
    a = _require_a(table, q)
    if table.accepts(q.f):
        return SettleReport(True, "member")
    d = q.family.depth if depth is None else min(depth, q.family.depth)
    alive = surviving(q.family, d)
    a_ok = lambda v: v == a
    b_ok = lambda b: b > x
    for n in range(d):
        for e in sorted(alive[n], key=set_key):
            goods = _good_masks(table, q, e, a_ok, b_ok)
            if goods:
                elems = sorted(e)
                witness = frozenset(elems[i] for i in range(len(elems)) if goods[0] >> i & 1)
                return SettleReport(False, None, (n, e, witness))
    return SettleReport(True, "clamp")


# ---------------------------------------------------------------- settle_extend


@dataclass(frozen=True)
class SettleCertificate:
    branch: str
    x: Optional[int] = None
    level: Optional[int] = None
    split_set: Optional[frozenset] = None
    side: Optional[int] = None
    added: Optional[frozenset] = None
    case: Optional[int] = None
    detail: tuple = ()


@dataclass(frozen=True)
class SettleBounds:
    """Quantifier clamps. ``a_star``/``b_star`` restrict the values density may use; None allows all."""

    x_range: int
    set_bound: int
    level_bound: int
    depth: Optional[int] = None
    a_star: Optional[frozenset] = None
    b_star: Optional[frozenset] = None

    def a_ok(self, a: int) -> bool:
        return self.a_star is None or a in self.a_star

    def b_ok(self, b: int) -> bool:
        return self.b_star is None or b in self.b_star


def settle_extend(q: EmCondition, table: RequirementTable, bounds: SettleBounds, audit: bool = True) -> tuple:
    a = _require_a(table, q)
    problems = em_problems(q)
    if problems:
        raise ValueError("invalid condition: " + problems[0])
    depth = q.family.depth if bounds.depth is None else min(bounds.depth, q.family.depth)
    if table.accepts(q.f):
        return q, SettleCertificate("member")
    ess = bounded_essential_em(table, q, bounds.x_range, bounds.set_bound, bounds.level_bound)
    if ess.holds:
        out, cert = _essential_branch(q, table, bounds, depth)
        x = None
    else:
        out, cert = _non_essential_branch(q, table, ess.failing_x, a, depth)
        x = ess.failing_x
    if audit:
        issues = em_extension_problems(out, q)
        check = settles_check(out, table, x if x is not None else 0)
        if issues or not check.settles:
            raise AssertionError("settle audit failed: " + (issues[0] if issues else f"{check}"))
    return out, cert


def _essential_branch(q: EmCondition, table: RequirementTable, bounds: SettleBounds, depth: int) -> tuple:
    t = q.ambient
    a_ok, b_ok = bounds.a_ok, bounds.b_ok
    level = next((n for n in range(min(bounds.level_bound, depth))
                  if level_dense(table, q, n, a_ok, b_ok)), None)
    if level is None:
        raise DensityViolation()
    alive = surviving(q.family, depth)[level]
    if not alive:
        raise ShallowFamilyError(f"no set at level {level} survives to depth {depth}")
    e = min(alive, key=set_key)
    split = family_split(q.family, level, e, depth)
    chosen = None
    for side, half in enumerate((split.e0, split.e1)):
        goods = _good_masks(table, q, half, a_ok, b_ok)
        if goods:
            elems = sorted(half)
            cands = sorted((frozenset(elems[i] for i in range(len(elems)) if g >> i & 1) for g in goods),
                           key=lambda s: (len(s), set_key(s)))
            chosen = (side, cands[0])
            break
    if chosen is None:
        raise DensityViolation("density violation at horizon: the split halves carry no accepted extension")
    side, added = chosen
    f_new = q.f | added
    seq = [v for v in linear_sequence(t, f_new) if v in added]
    low, high = q.interval.low, q.interval.high
    interval = IntervalSpec(seq[-1], high) if side == 0 else IntervalSpec(low, seq[0])
    out = EmCondition(frozenset(f_new), interval, split.family)
    return out, SettleCertificate("essential", level=level, split_set=e, side=side, added=added,
                                  detail=(split.e0, split.e1))


def _window(x: int, n: int, depth: int):
    if n == depth - 1:
        return lambda b: b > x
    return lambda b: x < b < x + n + 2


def _non_essential_branch(q: EmCondition, table: RequirementTable, x: int, a: int, depth: int) -> tuple:
    fam = q.family
    a_ok = lambda v: v == a
    # nodes of the left-half tree: (level, split set, left half)
    nodes = [dict() for _ in range(depth)]
    for n in range(depth):
        b_ok = _window(x, n, depth)
        for e in fam.levels[n]:
            elems = sorted(e)
            goods = _good_masks(table, q, e, a_ok, b_ok)
            full = (1 << len(elems)) - 1
            for p in range(1 << len(elems)):
                if _side_good(goods, p) or _side_good(goods, full & ~p):
                    continue
                half = frozenset(elems[i] for i in range(len(elems)) if p >> i & 1)
                other = e - half
                if n == 0:
                    label = min(half, other, key=set_key)
                else:
                    parent_set = predecessor(fam, n - 1, e)
                    parents = nodes[n - 1].get(parent_set, {})
                    options = [h for h in (half, other) if (h & parent_set) in parents]
                    if not options:
                        continue
                    label = min(options, key=set_key)
                nodes[n].setdefault(e, {})[label] = None
    # keep only nodes with a descendant at the last level
    alive = [set() for _ in range(depth)]
    alive[depth - 1] = {(e, lab) for e, labs in nodes[depth - 1].items() for lab in labs}
    for n in range(depth - 1, 0, -1):
        for e, lab in alive[n]:
            pe = predecessor(fam, n - 1, e)
            alive[n - 1].add((pe, lab & pe))
    if not alive[0]:
        raise ShallowFamilyError(f"no settling subfamily survives to depth {depth} at x={x}")

    def descendants_with_label(n0, e0, lab):
        out = {n0: {e0}}
        for n in range(n0 + 1, depth):
            out[n] = {e for e, l in alive[n] if l == lab and predecessor(fam, n - 1, e) in out[n - 1]}
        return out

    for n in range(depth):
        if not _persists_long_enough(n, depth):
            break
        for e0, lab in sorted(alive[n], key=lambda el: (set_key(el[1]), set_key(el[0]))):
            chain = descendants_with_label(n, e0, lab)
            if all(chain[m] for m in range(n, depth)):
                levels = tuple(tuple(e - lab for e in chain[m]) for m in range(n, depth))
                out = EmCondition(q.f, q.interval, Family(fam.ambient, levels))
                return out, SettleCertificate("non-essential", x=x, case=1, level=n, split_set=e0,
                                              detail=(lab,))
    chosen = [0]
    labels_at = lambda n: {lab for _, lab in alive[n]}
    while True:
        prev = labels_at(chosen[-1])
        nxt = next((m for m in range(chosen[-1] + 1, depth) if not prev & labels_at(m)), None)
        if nxt is None:
            break
        chosen.append(nxt)
    if len(chosen) < 2:
        raise ShallowFamilyError(f"depth {depth} certifies neither extraction case")
    levels = tuple(tuple(labels_at(m)) for m in chosen)
    out = EmCondition(q.f, q.interval, Family(fam.ambient, levels))
    return out, SettleCertificate("non-essential", x=x, case=2, detail=tuple(chosen))
