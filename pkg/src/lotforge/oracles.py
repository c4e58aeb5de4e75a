"""Exact brute-force baselines, used only to verify guarantees in tests.

Order-set enumeration is capped hard: above the cap the oracle refuses
rather than silently truncating.  The inner holding-cost subproblem of the
lot-sizing oracle is a small transportation problem solved by successive
shortest paths with exact rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import interval_kc as ikc_mod
from . import lp_core
from .errors import InvariantError, RoundLimitError, SizeCapError
from .instance import CmilsInstance, make_schedule, prefix_feasible
from .intervals import all_intervals, cap_within
from .laminar_kc import LaminarKcInstance

CMILS_CAP = 14
KC_CAP = 16


@dataclass(frozen=True)
class OracleResult:
    optimum_cost: Fraction
    witness: object  # OrderSchedule or frozenset of periods
    explored: int


class _MinCostFlow:
    """Successive shortest paths (Bellman-Ford), exact rationals."""

    def __init__(self, n: int):
        self.n = n
        self.to: list[int] = []
        self.cap: list[Fraction] = []
        self.cost: list[Fraction] = []
        self.head: list[list[int]] = [[] for _ in range(n)]

    def add_edge(self, u: int, v: int, cap, cost) -> int:
        idx = len(self.to)
        self.head[u].append(idx)
        self.to.append(v)
        self.cap.append(Fraction(cap))
        self.cost.append(Fraction(cost))
        self.head[v].append(idx + 1)
        self.to.append(u)
        self.cap.append(Fraction(0))
        self.cost.append(-Fraction(cost))
        return idx

    def run(self, source: int, sink: int) -> tuple[Fraction, Fraction]:
        sent = Fraction(0)
        paid = Fraction(0)
        while True:
            dist: list[Optional[Fraction]] = [None] * self.n
            prev_edge = [-1] * self.n
            dist[source] = Fraction(0)
            for _ in range(self.n - 1):
                changed = False
                for u in range(self.n):
                    du = dist[u]
                    if du is None:
                        continue
                    for e in self.head[u]:
                        if self.cap[e] > 0:
                            v = self.to[e]
                            nd = du + self.cost[e]
                            if dist[v] is None or nd < dist[v]:
                                dist[v] = nd
                                prev_edge[v] = e
                                changed = True
                if not changed:
                    break
            if dist[sink] is None:
                return sent, paid
            bottleneck = None
            v = sink
            while v != source:
                e = prev_edge[v]
                bottleneck = self.cap[e] if bottleneck is None else min(bottleneck, self.cap[e])
                v = self.to[e ^ 1]
            v = sink
            while v != source:
                e = prev_edge[v]
                self.cap[e] -= bottleneck
                self.cap[e ^ 1] += bottleneck
                v = self.to[e ^ 1]
            sent += bottleneck
            paid += bottleneck * dist[sink]


def min_holding_for_orders(inst: CmilsInstance, orders
                           ) -> Optional[tuple[Fraction, dict]]:
    """Cheapest placement of all demand into the given order periods.

    Returns (holding cost, units per (s, i)) or None when infeasible.
    """
    orders = sorted(set(orders))
    n = 2 + inst.N + len(orders)
    flow = _MinCostFlow(n)
    sink = n - 1
    period_node = {s: 1 + inst.N + idx for idx, s in enumerate(orders)}
    edge_of: dict[tuple[int, int], int] = {}
    for i in inst.items():
        flow.add_edge(0, i, inst.demand(i), 0)
        for s in orders:
            if s <= inst.deadline(i):
                edge_of[(s, i)] = flow.add_edge(i, period_node[s],
                                                inst.demand(i), inst.hold(i, s))
    for s in orders:
        flow.add_edge(period_node[s], sink, inst.cap(s), 0)
    sent, paid = flow.run(0, sink)
    if sent < inst.total_demand():
        return None
    units = {}
    for (s, i), e in edge_of.items():
        got = inst.demand(i) - flow.cap[e]
        if got:
            units[(s, i)] = got
    return paid, units


def brute_force_cmils(inst: CmilsInstance) -> OracleResult:
    """Exact optimum by enumerating every order subset (2^T of them)."""
    if inst.T > CMILS_CAP:
        raise SizeCapError(f"T={inst.T} exceeds the oracle cap {CMILS_CAP}")
    best_total: Optional[Fraction] = None
    best_orders: frozenset[int] = frozenset()
    best_units: dict = {}
    explored = 0
    for mask in range(1 << inst.T):
        explored += 1
        orders = [s for s in inst.periods() if mask >> (s - 1) & 1]
        if not prefix_feasible(inst, orders):
            continue
        ordering = sum((inst.order_cost(s) for s in orders), Fraction(0))
        if best_total is not None and ordering >= best_total:
            continue
        placed = min_holding_for_orders(inst, orders)
        if placed is None:
            raise InvariantError("prefix-feasible order set failed the flow")
        holding, units = placed
        total = ordering + holding
        if best_total is None or total < best_total:
            best_total = total
            best_orders = frozenset(orders)
            best_units = units
    if best_total is None:
        raise ValueError("instance is infeasible: no order subset covers demand")
    witness = make_schedule(inst, best_orders, best_units)
    return OracleResult(optimum_cost=best_total, witness=witness, explored=explored)


def _covers(C, selected, requirements: dict) -> bool:
    return all(cap_within(C, a, b, selected) >= need
               for (a, b), need in requirements.items() if need > 0)


def _brute_force_cover(T: int, C, K, requirements: dict) -> OracleResult:
    if T > KC_CAP:
        raise SizeCapError(f"T={T} exceeds the oracle cap {KC_CAP}")
    best_cost: Optional[Fraction] = None
    best_set: frozenset[int] = frozenset()
    explored = 0
    for mask in range(1 << T):
        explored += 1
        selected = [s for s in range(1, T + 1) if mask >> (s - 1) & 1]
        cost = sum((K[s - 1] for s in selected), Fraction(0))
        if best_cost is not None and cost >= best_cost:
            continue
        if _covers(C, selected, requirements):
            best_cost = cost
            best_set = frozenset(selected)
    if best_cost is None:
        raise ValueError("covering instance is infeasible")
    return OracleResult(optimum_cost=best_cost, witness=best_set, explored=explored)


def brute_force_laminar_kc(inst: LaminarKcInstance) -> OracleResult:
    return _brute_force_cover(inst.T, inst.C, inst.K, inst.R)


def brute_force_interval_kc(inst: ikc_mod.IntervalKcInstance) -> OracleResult:
    return _brute_force_cover(inst.T, inst.C, inst.K, inst.R)


@dataclass
class IntervalKcRun:
    selected: frozenset[int]
    lp_value: Fraction
    rounds: int
    y_scaled: tuple[Fraction, ...]
    locked: frozenset[int]
    residual: dict


def approx_interval_kc_details(ikc: ikc_mod.IntervalKcInstance,
                               max_rounds: int = 200) -> IntervalKcRun:
    """Cutting-plane loop over the naive covering LP, then interval rounding.

    Rows capping each period's usable capacity at the residual requirement
    are added while the current fractional solution violates one; once none
    is violated, the tenfold-scaled solution certifiably feeds the interval
    solver and the result costs at most 10 times the final LP value.
    """
    T = ikc.T
    lp = lp_core.LinearProgram(
        num_vars=T,
        objective=[Fraction(k) for k in ikc.K],
        bounds=[(Fraction(0), Fraction(1))] * T,
    )
    for a, b in all_intervals(T):
        need = ikc.req(a, b)
        if need > 0:
            lp.add_row({s - 1: ikc.C[s - 1] for s in range(a + 1, b + 1)},
                       lp_core.GE, need)
    seen_cuts: set = set()
    rounds = 0
    while True:
        sol = lp_core.solve_to_vertex(lp)
        if sol.status != lp_core.OPTIMAL:
            raise ValueError(f"covering LP is {sol.status}; instance infeasible?")
        y = sol.values
        y_scaled = tuple(min(10 * v, Fraction(1)) for v in y)
        locked = frozenset(s for s in range(1, T + 1) if y_scaled[s - 1] == 1)
        residual = {
            (a, b): max(ikc.req(a, b) - cap_within(ikc.C, a, b, locked), Fraction(0))
            for a, b in all_intervals(T)
        }
        violated = None
        for a, b in all_intervals(T):
            need = residual[(a, b)]
            if need <= 0:
                continue
            lhs = sum((min(ikc.C[s - 1], need) * y[s - 1]
                       for s in range(a + 1, b + 1) if s not in locked), Fraction(0))
            if lhs < need:
                violated = (a, b, frozenset(locked & set(range(a + 1, b + 1))))
                break
        if violated is None:
            selected = ikc_mod.solve_interval_kc(ikc, y_scaled, locked, residual)
            return IntervalKcRun(selected=selected, lp_value=sol.objective_value,
                                 rounds=rounds, y_scaled=y_scaled, locked=locked,
                                 residual=residual)
        rounds += 1
        if rounds > max_rounds:
            raise RoundLimitError(f"no rounding after {max_rounds} cut rounds",
                                  state={"lp_value": sol.objective_value,
                                         "rounds": rounds, "y": y})
        if violated in seen_cuts:
            raise InvariantError("separation returned an already-pooled cut")
        seen_cuts.add(violated)
        a, b, inside = violated
        need = ikc.req(a, b) - sum((ikc.C[s - 1] for s in inside), Fraction(0))
        lp.add_row({s - 1: min(ikc.C[s - 1], need)
                    for s in range(a + 1, b + 1) if s not in inside},
                   lp_core.GE, need)


def approx_interval_kc(ikc: ikc_mod.IntervalKcInstance,
                       max_rounds: int = 200) -> frozenset[int]:
    return approx_interval_kc_details(ikc, max_rounds).selected
