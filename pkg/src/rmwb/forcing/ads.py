"""Conditions ``(σ, τ)`` for ascending/descending sequences, split pairs and bounded essentiality."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from typing import Optional

from ..instances import LinearOrder
from .tables import RequirementTable, TableError


@dataclass(frozen=True)
class AdsCondition:
    sigma: tuple
    tau: tuple
    order: LinearOrder


@dataclass
class AdsReport:
    valid: bool
    in_cut: Optional[bool]
    reasons: list = field(default_factory=list)


def _ascending(order: LinearOrder, seq) -> bool:
    return all(order.precedes(x, y) for x, y in zip(seq, seq[1:]))


def ads_problems(p: AdsCondition) -> list:
    order = p.order
    out = []
    if any(not 0 <= v < order.n for v in p.sigma + p.tau):
        out.append("vertex outside the order")
        return out
    if not _ascending(order, p.sigma):
        out.append("σ is not ascending")
    if not _ascending(order, p.tau[::-1]):
        out.append("τ is not descending")
    if p.sigma and p.tau and not order.precedes(p.sigma[-1], p.tau[-1]):
        out.append("last(σ) does not precede last(τ)")
    return out


def validate_ads(p: AdsCondition, cut=None) -> AdsReport:
    reasons = ads_problems(p)
    in_cut = None
    if cut is not None:
        cut = set(cut)
        in_cut = set(p.sigma) <= cut and not set(p.tau) & cut
        if not in_cut:
            reasons.append("condition crosses the cut")
    return AdsReport(not ads_problems(p), in_cut, reasons)


def ads_extends(q: AdsCondition, p: AdsCondition) -> bool:
    return q.sigma[:len(p.sigma)] == p.sigma and q.tau[:len(p.tau)] == p.tau


class SplitPairError(ValueError):
    pass


def split_blocks(p: AdsCondition, q0: AdsCondition, q1: AdsCondition) -> tuple:
    """Return the new blocks ``(σ′, τ′)`` or raise if the shape is wrong."""
    for q in (p, q0, q1):
        problems = ads_problems(q)
        if problems:
            raise SplitPairError(problems[0])
    if q0.tau != p.tau or q0.sigma[:len(p.sigma)] != p.sigma:
        raise SplitPairError("q0 must only extend σ")
    if q1.sigma != p.sigma or q1.tau[:len(p.tau)] != p.tau:
        raise SplitPairError("q1 must only extend τ")
    s_new, t_new = q0.sigma[len(p.sigma):], q1.tau[len(p.tau):]
    if not s_new or not t_new:
        raise SplitPairError("both new blocks must be nonempty")
    if not p.order.precedes(s_new[-1], t_new[-1]):
        raise SplitPairError("σ′ does not precede τ′")
    return s_new, t_new


def split_pair_select(p: AdsCondition, q0: AdsCondition, q1: AdsCondition, cut) -> int:
    split_blocks(p, q0, q1)
    cut = set(cut)
    if not validate_ads(p, cut).in_cut:
        raise SplitPairError("p itself crosses the cut")
    if validate_ads(q0, cut).in_cut:
        return 0
    if not validate_ads(q1, cut).in_cut:
        # impossible for an initial segment; reaching here means the cut is not one
        raise SplitPairError("neither side respects the cut; is the cut downward closed?")
    return 1


def split_pairs(p: AdsCondition, max_len: int):
    """All split pairs below ``p`` with new blocks of length at most ``max_len``."""
    order = p.order
    n = order.n
    for ls in range(1, max_len + 1):
        for s_new in permutations(range(n), ls):
            q0 = AdsCondition(p.sigma + s_new, p.tau, order)
            if ads_problems(q0):
                continue
            for lt in range(1, max_len + 1):
                for t_new in permutations(range(n), lt):
                    if not order.precedes(s_new[-1], t_new[-1]):
                        continue
                    q1 = AdsCondition(p.sigma, p.tau + t_new, order)
                    if not ads_problems(q1):
                        yield q0, q1


@dataclass
class EssentialReport:
    holds: bool
    failing_x: Optional[int] = None
    witnesses: list = field(default_factory=list)


def _member_code(table: RequirementTable, q: AdsCondition):
    if table.flavor == "ads-full":
        return (q.sigma, q.tau)
    if table.flavor == "ads-A-side":
        return q.sigma
    if table.flavor == "ads-D-side":
        return q.tau
    raise TableError("an em table cannot judge sequence conditions")


def _used(table, code, a_ok, b_ok):
    if table.builtin_accepts(code):
        return (None, None)
    w = table.witnesses(code, a_ok, b_ok)
    return (w[0][1], w[0][2]) if w else None


def bounded_essential_ads(table: RequirementTable, p: AdsCondition, x_range: int,
                          set_bound: int, level_bound: int) -> EssentialReport:
    """∀x ∃A>x ∀y ∃B>y: some split pair below ``p`` lies in the table at ``(A, B)``.

    By positivity the largest admissible ``A = (x, set_bound)`` and ``B`` are
    tried; reported witnesses list the ``a``/``b`` values actually used.
    """
    pairs = list(split_pairs(p, level_bound))
    report = EssentialReport(True)
    for x in range(x_range):
        a_ok = lambda a, x=x: x < a < set_bound
        row = []
        for y in range(x_range):
            b_ok = lambda b, y=y: y < b < set_bound
            if not (x + 1 < set_bound and y + 1 < set_bound):
                return EssentialReport(False, x)
            found = None
            for q0, q1 in pairs:
                u0 = _used(table, _member_code(table, q0), a_ok, b_ok)
                u1 = u0 and _used(table, _member_code(table, q1), a_ok, b_ok)
                if u0 and u1:
                    found = (y, (q0.sigma, q0.tau), (q1.sigma, q1.tau), u0, u1)
                    break
            if found is None:
                return EssentialReport(False, x)
            row.append(found)
        report.witnesses.append((x, row))
    return report


def bounded_essential_in(table: RequirementTable, seq: tuple, x_range: int,
                         set_bound: int, level_bound: int) -> EssentialReport:
    """Half-requirement shape: ∀n ∀x ∃A>x ∀y ∃B>y ∃m>n with the prefix of length m accepted."""
    if table.flavor not in ("ads-A-side", "ads-D-side"):
        raise TableError("essential-in-a-sequence needs a half-requirement table")
    report = EssentialReport(True)
    for n in range(level_bound):
        for x in range(x_range):
            a_ok = lambda a, x=x: x < a < set_bound
            for y in range(x_range):
                b_ok = lambda b, y=y: y < b < set_bound
                hit = next((m for m in range(n + 1, len(seq) + 1)
                            if x + 1 < set_bound and y + 1 < set_bound
                            and _used(table, tuple(seq[:m]), a_ok, b_ok)), None)
                if hit is None:
                    return EssentialReport(False, x)
                report.witnesses.append((n, x, y, hit))
    return report
