"""Instance model for capacitated multi-item lot sizing.

An instance has T periods and N items.  Placing an order at period s costs
K_s and provides C_s units of capacity for that period; item i needs d_i
units delivered by its deadline r_i, and a unit of item i ordered at period
s <= r_i pays a holding cost h_i(s).  Holding costs are stored as explicit
per-item tables, non-increasing in s with h_i(r_i) = 0.

All quantities are exact rationals.  Rationals serialize as "p/q" strings.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .errors import InstanceFormatError


def parse_rat(text) -> Fraction:
    """Parse "p/q" (or a bare integer / int value) into an exact Fraction."""
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, Fraction):
        return text
    if not isinstance(text, str):
        raise InstanceFormatError(f"expected rational string, got {text!r}")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise InstanceFormatError(f"bad rational {text!r}: {exc}") from None


def format_rat(value: Fraction) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class CmilsInstance:
    T: int
    N: int
    K: tuple[Fraction, ...]  # ordering cost per period
    C: tuple[Fraction, ...]  # capacity per period
    d: tuple[Fraction, ...]  # demand per item
    r: tuple[int, ...]       # deadline per item
    h: tuple[tuple[Fraction, ...], ...]  # h[i-1][s-1], s in 1..r_i

    def order_cost(self, s: int) -> Fraction:
        return self.K[s - 1]

    def cap(self, s: int) -> Fraction:
        return self.C[s - 1]

    def demand(self, i: int) -> Fraction:
        return self.d[i - 1]

    def deadline(self, i: int) -> int:
        return self.r[i - 1]

    def hold(self, i: int, s: int) -> Fraction:
        return self.h[i - 1][s - 1]

    def periods(self) -> range:
        return range(1, self.T + 1)

    def items(self) -> range:
        return range(1, self.N + 1)

    def total_demand(self) -> Fraction:
        return sum(self.d, Fraction(0))


@dataclass(frozen=True)
class FractionalSolution:
    """An (x, y) pair: x[(s, i)] is the fraction of item i ordered at s."""

    x: Mapping[tuple[int, int], Fraction]
    y: tuple[Fraction, ...]

    def x_val(self, s: int, i: int) -> Fraction:
        return self.x.get((s, i), Fraction(0))

    def x_prefix(self, i: int, t: int) -> Fraction:
        """Sum of x[s, i] over s <= t (zero when t <= 0)."""
        total = Fraction(0)
        for s in range(1, t + 1):
            total += self.x.get((s, i), Fraction(0))
        return total


@dataclass(frozen=True)
class OrderSchedule:
    orders: frozenset[int]
    assignment: Mapping[tuple[int, int], Fraction]  # (s, i) -> units
    ordering_cost: Fraction
    holding_cost: Fraction
    total_cost: Fraction


def validate(inst: CmilsInstance) -> list[str]:
    """Return every violated structural invariant; empty means valid."""
    bad: list[str] = []
    if inst.T < 1:
        bad.append("T must be a positive integer")
    if inst.N < 1:
        bad.append("N must be a positive integer")
    for name, seq, want in (("K", inst.K, inst.T), ("C", inst.C, inst.T),
                            ("d", inst.d, inst.N), ("r", inst.r, inst.N),
                            ("h", inst.h, inst.N)):
        if len(seq) != want:
            bad.append(f"{name} has length {len(seq)}, expected {want}")
    if len(inst.K) == inst.T:
        for s in inst.periods():
            if inst.order_cost(s) < 0:
                bad.append(f"K[{s}] is negative")
    if len(inst.C) == inst.T:
        for s in inst.periods():
            if inst.cap(s) <= 0:
                bad.append(f"C[{s}] must be strictly positive")
    if len(inst.d) == inst.N:
        for i in inst.items():
            if inst.demand(i) <= 0:
                bad.append(f"d[{i}] must be strictly positive")
    if len(inst.r) == inst.N:
        for i in inst.items():
            if not (1 <= inst.deadline(i) <= inst.T):
                bad.append(f"r[{i}] = {inst.deadline(i)} outside [1, {inst.T}]")
    if len(inst.h) == inst.N and len(inst.r) == inst.N:
        for i in inst.items():
            ri = inst.deadline(i)
            if not (1 <= ri <= inst.T):
                continue
            tab = inst.h[i - 1]
            if len(tab) != ri:
                bad.append(f"h[{i}] has length {len(tab)}, expected r_{i} = {ri}")
                continue
            if any(tab[s] < 0 for s in range(ri)):
                bad.append(f"h[{i}] has a negative entry")
            if any(tab[s] < tab[s + 1] for s in range(ri - 1)):
                bad.append(f"h[{i}] is not non-increasing")
            if tab[ri - 1] != 0:
                bad.append(f"h[{i}] must end at 0 (h_i(r_i)=0), got {tab[ri - 1]}")
    return bad


def check_feasible(inst: CmilsInstance, sched: OrderSchedule) -> tuple[bool, list[str]]:
    """Check a schedule against the instance: deadlines, coverage, capacity."""
    bad: list[str] = []
    for (s, i), qty in sched.assignment.items():
        if qty < 0:
            bad.append(f"assignment[{s},{i}] is negative")
        if qty > 0:
            if s not in sched.orders:
                bad.append(f"assignment[{s},{i}] > 0 but period {s} has no order")
            if not (1 <= i <= inst.N):
                bad.append(f"assignment references unknown item {i}")
                continue
            if s > inst.deadline(i):
                bad.append(f"assignment[{s},{i}] > 0 past deadline r_{i}={inst.deadline(i)}")
    for i in inst.items():
        got = sum((q for (s, j), q in sched.assignment.items() if j == i), Fraction(0))
        if got != inst.demand(i):
            bad.append(f"item {i}: assigned {got}, demand {inst.demand(i)}")
    for s in sorted(sched.orders):
        if not (1 <= s <= inst.T):
            bad.append(f"order at unknown period {s}")
            continue
        used = sum((q for (t, _i), q in sched.assignment.items() if t == s), Fraction(0))
        if used > inst.cap(s):
            bad.append(f"period {s}: load {used} exceeds capacity {inst.cap(s)}")
    return (not bad, bad)


def cost(inst: CmilsInstance, sched: OrderSchedule) -> tuple[Fraction, Fraction, Fraction]:
    """Ordering, holding and total cost of a feasible schedule."""
    ok, bad = check_feasible(inst, sched)
    if not ok:
        raise ValueError("infeasible schedule: " + "; ".join(bad))
    ordering = sum((inst.order_cost(s) for s in sched.orders), Fraction(0))
    holding = Fraction(0)
    for (s, i), qty in sched.assignment.items():
        if qty:
            holding += qty * inst.hold(i, s)
    return ordering, holding, ordering + holding


def make_schedule(inst: CmilsInstance, orders, assignment) -> OrderSchedule:
    """Package an order set plus unit assignment, computing its costs."""
    sched = OrderSchedule(orders=frozenset(orders),
                          assignment=dict(assignment),
                          ordering_cost=Fraction(0),
                          holding_cost=Fraction(0),
                          total_cost=Fraction(0))
    ordering, holding, total = cost(inst, sched)
    return OrderSchedule(orders=sched.orders, assignment=sched.assignment,
                         ordering_cost=ordering, holding_cost=holding,
                         total_cost=total)


def hcost(inst: CmilsInstance, x: Mapping[tuple[int, int], Fraction]) -> Fraction:
    """Holding cost of a fractional assignment: sum_i d_i sum_s x[s,i] h_i(s)."""
    total = Fraction(0)
    for (s, i), frac in x.items():
        if frac and s <= inst.deadline(i):
            total += inst.demand(i) * frac * inst.hold(i, s)
    return total


def prefix_feasible(inst: CmilsInstance, orders=None) -> bool:
    """True iff every deadline-prefix demand fits in the prefix capacity.

    Item i may only use periods <= r_i, so usable periods always form a
    prefix and this condition is exact for the given order set.
    """
    chosen = set(inst.periods()) if orders is None else set(orders)
    prefix_cap = Fraction(0)
    due: dict[int, Fraction] = {}
    for i in inst.items():
        due[inst.deadline(i)] = due.get(inst.deadline(i), Fraction(0)) + inst.demand(i)
    cum_demand = Fraction(0)
    for t in inst.periods():
        if t in chosen:
            prefix_cap += inst.cap(t)
        cum_demand += due.get(t, Fraction(0))
        if cum_demand > prefix_cap:
            return False
    return True


def gen_random(seed: int, *, T: int, N: int,
               capacity_range: tuple[int, int] = (3, 12),
               cost_range: tuple[int, int] = (1, 20),
               demand_range: tuple[int, int] = (1, 8),
               slack_factor: Fraction = Fraction(3, 2)) -> CmilsInstance:
    """Deterministic random instance, feasible by construction.

    Holding tables are suffix sums of non-negative per-period rates, so they
    are non-increasing and end at zero.  Capacities are bumped until every
    deadline prefix holds slack_factor times the demand due by then.
    """
    if Fraction(slack_factor) < 1:
        raise ValueError("slack_factor must be >= 1")
    for name, (lo, hi) in (("capacity_range", capacity_range),
                           ("cost_range", cost_range),
                           ("demand_range", demand_range)):
        if lo > hi or hi < 1:
            raise ValueError(f"{name} is empty or non-positive")
    rng = random.Random(seed)
    K = tuple(Fraction(rng.randint(*cost_range)) for _ in range(T))
    C = [Fraction(max(1, rng.randint(*capacity_range))) for _ in range(T)]
    d = tuple(Fraction(max(1, rng.randint(*demand_range))) for _ in range(N))
    r = tuple(rng.randint(1, T) for _ in range(N))
    h = []
    for i in range(N):
        rates = [Fraction(rng.randint(0, 3)) for _ in range(r[i] - 1)]
        table = []
        tail = Fraction(0)
        for s in range(r[i] - 1, -1, -1):
            table.append(tail)
            if s > 0:
                tail += rates[s - 1]
        h.append(tuple(reversed(table)))
    # enforce the prefix-capacity slack so the instance is always feasible
    slack = Fraction(slack_factor)
    cum_demand = Fraction(0)
    prefix_cap = Fraction(0)
    for t in range(1, T + 1):
        cum_demand += sum((d[i] for i in range(N) if r[i] == t), Fraction(0))
        prefix_cap += C[t - 1]
        need = slack * cum_demand
        if prefix_cap < need:
            deficit = need - prefix_cap
            bump = Fraction(-(-deficit.numerator // deficit.denominator))  # ceil
            C[t - 1] += bump
            prefix_cap += bump
    return CmilsInstance(T=T, N=N, K=K, C=tuple(C), d=d, r=r, h=tuple(h))


def gen_kc_gap(R) -> CmilsInstance:
    """Two-period knapsack-cover gap embed: C=(R-1, R), K=(0, 1), one demand R."""
    R = Fraction(R)
    if R < 2:
        raise ValueError("R must be >= 2")
    return CmilsInstance(T=2, N=1,
                         K=(Fraction(0), Fraction(1)),
                         C=(R - 1, R),
                         d=(R,), r=(2,),
                         h=((Fraction(0), Fraction(0)),))


# ---------------------------------------------------------------------------
# JSON interchange

def to_json_dict(inst: CmilsInstance) -> dict:
    return {
        "T": inst.T,
        "N": inst.N,
        "K": [format_rat(v) for v in inst.K],
        "C": [format_rat(v) for v in inst.C],
        "items": [
            {"d": format_rat(inst.d[i]), "r": inst.r[i],
             "h": [format_rat(v) for v in inst.h[i]]}
            for i in range(inst.N)
        ],
    }


def from_json_dict(doc: dict) -> CmilsInstance:
    def need(obj, key, where):
        if key not in obj:
            raise InstanceFormatError(f"missing field {key!r} in {where}")
        return obj[key]

    T = need(doc, "T", "instance")
    N = need(doc, "N", "instance")
    if not isinstance(T, int) or not isinstance(N, int):
        raise InstanceFormatError("T and N must be integers")
    K = tuple(parse_rat(v) for v in need(doc, "K", "instance"))
    C = tuple(parse_rat(v) for v in need(doc, "C", "instance"))
    items = need(doc, "items", "instance")
    if len(items) != N:
        raise InstanceFormatError(f"items has length {len(items)}, expected N={N}")
    d, r, h = [], [], []
    for idx, item in enumerate(items, start=1):
        d.append(parse_rat(need(item, "d", f"items[{idx}]")))
        rv = need(item, "r", f"items[{idx}]")
        if not isinstance(rv, int):
            raise InstanceFormatError(f"items[{idx}].r must be an integer")
        r.append(rv)
        h.append(tuple(parse_rat(v) for v in need(item, "h", f"items[{idx}]")))
    return CmilsInstance(T=T, N=N, K=K, C=C, d=tuple(d), r=tuple(r), h=tuple(h))


def save(inst: CmilsInstance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(to_json_dict(inst), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load(path) -> CmilsInstance:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return from_json_dict(doc)


def schedule_to_json_dict(sched: OrderSchedule) -> dict:
    return {
        "orders": sorted(sched.orders),
        "assignment": [
            {"s": s, "i": i, "qty": format_rat(q)}
            for (s, i), q in sorted(sched.assignment.items()) if q
        ],
        "costs": {
            "ordering": format_rat(sched.ordering_cost),
            "holding": format_rat(sched.holding_cost),
            "total": format_rat(sched.total_cost),
        },
    }


def schedule_from_json_dict(doc: dict) -> OrderSchedule:
    for key in ("orders", "assignment", "costs"):
        if key not in doc:
            raise InstanceFormatError(f"missing field {key!r} in schedule")
    assignment = {}
    for entry in doc["assignment"]:
        for key in ("s", "i", "qty"):
            if key not in entry:
                raise InstanceFormatError(f"missing field {key!r} in assignment entry")
        assignment[(entry["s"], entry["i"])] = parse_rat(entry["qty"])
    costs = doc["costs"]
    for key in ("ordering", "holding", "total"):
        if key not in costs:
            raise InstanceFormatError(f"missing field {key!r} in schedule costs")
    return OrderSchedule(orders=frozenset(doc["orders"]),
                         assignment=assignment,
                         ordering_cost=parse_rat(costs["ordering"]),
                         holding_cost=parse_rat(costs["holding"]),
                         total_cost=parse_rat(costs["total"]))


def save_schedule(sched: OrderSchedule, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(schedule_to_json_dict(sched), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_schedule(path) -> OrderSchedule:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return schedule_from_json_dict(doc)
