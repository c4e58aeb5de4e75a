"""Iterative rounding for laminar knapsack covering.

Input: knapsacks 1..T with capacities C and costs K, a laminar family of
intervals each demanding some capacity inside it, and a fractional opening
vector y whose all-ones periods are already locked into the solution.  The
solver repeatedly re-optimizes a shrinking LP to a vertex, permanently
discards periods that hit 0 and selects periods that hit 1, and returns a
selected set covering every requirement at cost at most the fractional cost
of the input y.

Active intervals live in one of two pools, mirroring the two row shapes of
the LP: "mass" rows ask the capped fractional capacity inside the interval
to reach twice the remaining requirement; "count" rows ask the fractional
openings of large-enough periods to reach one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional

from . import lp_core
from .errors import InvariantError
from .intervals import cap_within

Interval = tuple[int, int]
Trace = Optional[Callable[[str], None]]


@dataclass
class LaminarFamily:
    """A laminar set of (a, b] intervals over [T], with containment links."""

    T: int
    members: tuple[Interval, ...]
    parent: dict[Interval, Optional[Interval]]
    children: dict[Interval, tuple[Interval, ...]]
    coverable: dict[Interval, Fraction] = field(default_factory=dict)

    @classmethod
    def from_intervals(cls, T: int, intervals: Iterable[Interval],
                       coverable: dict | None = None) -> "LaminarFamily":
        members = sorted(set(intervals), key=lambda ab: (ab[0], -ab[1]))
        for a, b in members:
            if not (0 <= a < b <= T):
                raise ValueError(f"interval ({a}, {b}] outside [0, {T}]")
        if (0, T) not in members:
            raise ValueError("the root interval (0, T] must be a member")
        parent: dict[Interval, Optional[Interval]] = {}
        children: dict[Interval, list[Interval]] = {m: [] for m in members}
        stack: list[Interval] = []
        for iv in members:
            a, b = iv
            while stack and stack[-1][1] <= a:
                stack.pop()
            if stack:
                pa, pb = stack[-1]
                if not (pa <= a and b <= pb):
                    raise ValueError(f"intervals ({pa},{pb}] and ({a},{b}] cross")
                parent[iv] = stack[-1]
                children[stack[-1]].append(iv)
            else:
                parent[iv] = None
            stack.append(iv)
        return cls(T=T, members=tuple(members), parent=parent,
                   children={m: tuple(c) for m, c in children.items()},
                   coverable=dict(coverable or {}))

    def is_binary_with_unit_leaves(self) -> bool:
        for m in self.members:
            kids = self.children[m]
            if not kids:
                if m[1] - m[0] != 1:
                    return False
            else:
                if len(kids) != 2:
                    return False
                (a, b), (la, lb), (ra, rb) = m, kids[0], kids[1]
                if not (la == a and lb == ra and rb == b):
                    return False
        return True

    def render_tree(self) -> str:
        lines: list[str] = []

        def walk(iv: Interval, depth: int) -> None:
            mark = self.coverable.get(iv)
            note = f"  coverable={mark}" if mark is not None else ""
            lines.append("  " * depth + f"({iv[0]}, {iv[1]}]{note}")
            for kid in self.children[iv]:
                walk(kid, depth + 1)

        for m in self.members:
            if self.parent[m] is None:
                walk(m, 0)
        return "\n".join(lines)


@dataclass(frozen=True)
class LaminarKcInstance:
    T: int
    C: tuple[Fraction, ...]
    K: tuple[Fraction, ...]
    family: LaminarFamily
    R: dict[Interval, Fraction]  # positive requirements, keyed by member

    def check(self) -> None:
        for iv, value in self.R.items():
            if iv not in self.family.children:
                raise ValueError(f"requirement on non-member interval {iv}")
            if value <= 0:
                raise ValueError(f"requirement on {iv} must be positive")


@dataclass
class RoundingState:
    instance: LaminarKcInstance
    discarded: set[int]
    selected: set[int]
    remaining: dict[Interval, Fraction]
    mass_active: set[Interval]
    count_active: set[Interval]
    y: list[Fraction]

    def active(self) -> list[Interval]:
        return sorted(self.mass_active | self.count_active)


def _count_row_holds(iv: Interval, need: Fraction, y, selected, C) -> bool:
    """Fractional openings of periods with capacity >= need reach one."""
    a, b = iv
    total = Fraction(0)
    for s in range(a + 1, b + 1):
        if s not in selected and C[s - 1] >= need:
            total += y[s - 1]
    return total >= 1


def _mass_row_holds(iv: Interval, need: Fraction, y, selected, C) -> bool:
    a, b = iv
    total = Fraction(0)
    for s in range(a + 1, b + 1):
        if s not in selected:
            total += min(C[s - 1], need) * y[s - 1]
    return total >= 2 * need


def init_state(inst: LaminarKcInstance, y, locked, residual: dict) -> RoundingState:
    """Set up the rounding state; rejects inputs that break the contract."""
    inst.check()
    y = [Fraction(v) for v in y]
    if len(y) != inst.T:
        raise ValueError("y must have one entry per period")
    locked = frozenset(locked)
    if locked != {s for s in range(1, inst.T + 1) if y[s - 1] == 1}:
        raise InvariantError("locked set must be exactly the all-ones periods of y")
    for iv in inst.R:
        want = max(inst.R[iv] - cap_within(inst.C, iv[0], iv[1], locked), Fraction(0))
        if residual.get(iv, Fraction(0)) != want:
            raise InvariantError(f"residual for {iv} inconsistent with R and locked")
    remaining: dict[Interval, Fraction] = {}
    mass_active: set[Interval] = set()
    count_active: set[Interval] = set()
    for iv in sorted(inst.R):
        need = residual.get(iv, Fraction(0))
        if need <= 0:
            continue
        count_ok = _count_row_holds(iv, need, y, locked, inst.C)
        if not count_ok and not _mass_row_holds(iv, need, y, locked, inst.C):
            raise InvariantError(f"input y fails both cover conditions on {iv}")
        remaining[iv] = need
        (count_active if count_ok else mass_active).add(iv)
    return RoundingState(instance=inst, discarded=set(), selected=set(locked),
                         remaining=remaining, mass_active=mass_active,
                         count_active=count_active, y=y)


def dedup(state: RoundingState, trace: Trace = None) -> None:
    """Drop active intervals whose residual support duplicates another's.

    When two active intervals contain exactly the same undecided periods,
    the one with the larger remaining requirement implies the other; on a
    tie the lexicographically larger interval is dropped.
    """
    def undecided(iv: Interval) -> frozenset[int]:
        return frozenset(s for s in range(iv[0] + 1, iv[1] + 1)
                         if s not in state.discarded and s not in state.selected)

    groups: dict[frozenset[int], list[Interval]] = {}
    for iv in state.active():
        groups.setdefault(undecided(iv), []).append(iv)
    for group in groups.values():
        if len(group) < 2:
            continue
        keep = max(group, key=lambda iv: (state.remaining[iv], -iv[0], -iv[1]))
        for iv in group:
            if iv != keep:
                state.mass_active.discard(iv)
                state.count_active.discard(iv)
                del state.remaining[iv]
                if trace:
                    trace(f"event=drop iv={iv} kept={keep}")


def build_iter_lp(state: RoundingState, inst: LaminarKcInstance | None = None
                  ) -> lp_core.LinearProgram:
    """The shrinking LP: min K.y subject to the active interval rows."""
    inst = inst or state.instance
    lp = lp_core.LinearProgram(
        num_vars=inst.T,
        objective=[Fraction(k) for k in inst.K],
        bounds=[
            (Fraction(0), Fraction(0)) if s in state.discarded else
            (Fraction(1), Fraction(1)) if s in state.selected else
            (Fraction(0), Fraction(1))
            for s in range(1, inst.T + 1)
        ],
    )
    for a, b in sorted(state.mass_active):
        need = state.remaining[(a, b)]
        coeffs = {s - 1: min(inst.C[s - 1], need)
                  for s in range(a + 1, b + 1) if s not in state.selected}
        lp.add_row(coeffs, lp_core.GE, 2 * need)
    for a, b in sorted(state.count_active):
        need = state.remaining[(a, b)]
        coeffs = {s - 1: Fraction(1)
                  for s in range(a + 1, b + 1)
                  if s not in state.selected and inst.C[s - 1] >= need}
        lp.add_row(coeffs, lp_core.GE, 1)
    return lp


def _assert_state_feasible(state: RoundingState, where: str) -> None:
    lp = build_iter_lp(state)
    if not lp_core.is_feasible(lp, state.y):
        raise InvariantError(f"current y infeasible for the rounding LP ({where})")


def solve(inst: LaminarKcInstance, y, locked, residual: dict,
          trace: Trace = None) -> frozenset[int]:
    """Round y to a selected set covering every member requirement.

    Guarantees, all checked before returning: the selection contains every
    locked period, covers each requirement, and costs no more than K.y for
    the input y.  The outer loop fixes at least one new period per round and
    therefore runs at most T times.
    """
    state = init_state(inst, y, locked, residual)
    input_budget = sum((state.y[s - 1] * inst.K[s - 1] for s in range(1, inst.T + 1)),
                      Fraction(0))
    prev_cost = input_budget
    rounds = 0
    while state.mass_active or state.count_active:
        rounds += 1
        if rounds > inst.T:
            raise InvariantError("rounding exceeded its T-iteration bound")
        if trace:
            trace(f"iter={rounds} event=head active={len(state.active())}")
        for iv in state.active():  # remaining must track the selected capacity
            want = inst.R[iv] - cap_within(inst.C, iv[0], iv[1], state.selected)
            if state.remaining[iv] != want or want <= 0:
                raise InvariantError(f"stale remaining requirement on {iv}")
        _assert_state_feasible(state, "loop head")
        dedup(state, trace)
        lp = build_iter_lp(state)
        sol = lp_core.solve_to_vertex(lp)
        if sol.status != lp_core.OPTIMAL:
            raise InvariantError(f"rounding LP came back {sol.status}")
        cost = sol.objective_value
        if cost > prev_cost:
            raise InvariantError("rounding LP cost increased")
        prev_cost = cost
        state.y = list(sol.values)
        if trace:
            trace(f"iter={rounds} event=lp cost={cost}")

        fixed_before = len(state.discarded) + len(state.selected)
        for s in range(1, inst.T + 1):
            if s not in state.discarded and state.y[s - 1] == 0:
                state.discarded.add(s)
                if trace:
                    trace(f"iter={rounds} event=discard s={s}")
        while True:
            pick = next((s for s in range(1, inst.T + 1)
                         if s not in state.selected and state.y[s - 1] == 1), None)
            if pick is None:
                break
            state.selected.add(pick)
            if trace:
                trace(f"iter={rounds} event=select s={pick}")
            for iv in state.active():
                a, b = iv
                if not (a < pick <= b):
                    continue
                state.remaining[iv] -= inst.C[pick - 1]
                if trace:
                    trace(f"iter={rounds} event=update iv={iv} left={state.remaining[iv]}")
                if state.remaining[iv] <= 0:
                    state.mass_active.discard(iv)
                    state.count_active.discard(iv)
                    del state.remaining[iv]
                    if trace:
                        trace(f"iter={rounds} event=retire iv={iv}")
                elif iv in state.mass_active and _count_row_holds(
                        iv, state.remaining[iv], state.y, state.selected, inst.C):
                    state.mass_active.discard(iv)
                    state.count_active.add(iv)
                    if trace:
                        trace(f"iter={rounds} event=migrate iv={iv}")
            _assert_state_feasible(state, "after select")
        if len(state.discarded) + len(state.selected) == fixed_before:
            raise InvariantError("vertex solution fixed no new period")

    selected = frozenset(state.selected)
    if not selected >= frozenset(locked):
        raise InvariantError("selection lost a locked period")
    for iv, need in inst.R.items():
        if cap_within(inst.C, iv[0], iv[1], selected) < need:
            raise InvariantError(f"requirement on {iv} left uncovered")
    cost = sum((inst.K[s - 1] for s in selected), Fraction(0))
    if cost > input_budget:
        raise InvariantError("selection costs more than the fractional budget")
    return selected
