"""Strengthened LP master problem and the cutting-plane driver.

The base relaxation covers every demand fractionally and already carries two
families of capped-capacity rows (per order/item pair, and per order against
the full demand).  On top of it sits a pool of covering cuts: for disjoint
period sets S1, S2 and an item set I with C(S1) < d(I),

    C(S1) + sum_{s in S2} min(C_s, d(I) - C(S1)) y_s
          + sum_{i in I} d_i x[outside S1+S2, i]  >=  d(I)

must hold for every integral solution: orders in S2 only cover the residual
d(I) - C(S1), so their usable capacity is capped at it.

run_pipeline alternates exact LP solves with the rounding/separation step
until the rounded order set covers every interval requirement, then places
the demand by a feasible flow.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from . import assignment as assign_mod
from . import interval_kc, lp_core, separation
from .cuts import CoveringCut, check_cut, cut_demand, cut_lhs
from .errors import InvariantError, RoundLimitError
from .instance import (CmilsInstance, FractionalSolution, OrderSchedule,
                       format_rat, hcost, make_schedule, validate)

Trace = Optional[Callable[[str], None]]


class MasterLayout:
    """Deterministic variable numbering: all x[(s, i)] first, then y[s]."""

    def __init__(self, inst: CmilsInstance):
        self.x_col: dict[tuple[int, int], int] = {}
        for i in inst.items():
            for s in range(1, inst.deadline(i) + 1):
                self.x_col[(s, i)] = len(self.x_col)
        self.y_col = {s: len(self.x_col) + s - 1 for s in inst.periods()}
        self.num_vars = len(self.x_col) + inst.T

    def extract(self, values, inst: CmilsInstance) -> FractionalSolution:
        x = {key: values[col] for key, col in self.x_col.items() if values[col]}
        y = tuple(values[self.y_col[s]] for s in inst.periods())
        return FractionalSolution(x=x, y=y)


def build_base_lp(inst: CmilsInstance, layout: MasterLayout | None = None) -> lp_core.LinearProgram:
    """Base relaxation: coverage equalities plus the two seeded row families."""
    layout = layout or MasterLayout(inst)
    obj = [Fraction(0)] * layout.num_vars
    for (s, i), col in layout.x_col.items():
        obj[col] = inst.demand(i) * inst.hold(i, s)
    for s in inst.periods():
        obj[layout.y_col[s]] = inst.order_cost(s)
    lp = lp_core.LinearProgram(
        num_vars=layout.num_vars,
        objective=obj,
        bounds=[(Fraction(0), Fraction(1))] * layout.num_vars,
    )
    total_d = inst.total_demand()
    for i in inst.items():
        lp.add_row({layout.x_col[(s, i)]: Fraction(1)
                    for s in range(1, inst.deadline(i) + 1)}, lp_core.EQ, 1)
    for (s, i), col in sorted(layout.x_col.items(), key=lambda kv: kv[1]):
        cap = min(inst.cap(s), inst.demand(i))
        lp.add_row({layout.y_col[s]: cap, col: -inst.demand(i)}, lp_core.GE, 0)
    for s in inst.periods():
        coeffs = {layout.y_col[s]: min(inst.cap(s), total_d)}
        for i in inst.items():
            if s <= inst.deadline(i):
                coeffs[layout.x_col[(s, i)]] = -inst.demand(i)
        lp.add_row(coeffs, lp_core.GE, 0)
    return lp


def cut_row(cut: CoveringCut, inst: CmilsInstance, layout: MasterLayout):
    """Covering cut as an LP row (the constant C(S1) moves to the rhs)."""
    cap1 = sum((inst.cap(s) for s in cut.S1), Fraction(0))
    residual = cut_demand(cut, inst) - cap1
    coeffs: dict[int, Fraction] = {}
    for s in cut.S2:
        coeffs[layout.y_col[s]] = coeffs.get(layout.y_col[s], Fraction(0)) \
            + min(inst.cap(s), residual)
    excluded = cut.S1 | cut.S2
    for i in cut.I:
        for s in range(1, inst.deadline(i) + 1):
            if s not in excluded:
                col = layout.x_col[(s, i)]
                coeffs[col] = coeffs.get(col, Fraction(0)) + inst.demand(i)
    return coeffs, residual


@dataclass
class MasterState:
    instance: CmilsInstance
    layout: MasterLayout
    lp: lp_core.LinearProgram
    cut_pool: list[CoveringCut] = field(default_factory=list)
    cut_keys: set = field(default_factory=set)
    current: Optional[FractionalSolution] = None
    lp_value: Optional[Fraction] = None
    round: int = 0

    @classmethod
    def new(cls, inst: CmilsInstance) -> "MasterState":
        layout = MasterLayout(inst)
        return cls(instance=inst, layout=layout, lp=build_base_lp(inst, layout))


def solve_master(state: MasterState) -> FractionalSolution:
    sol = lp_core.solve_to_vertex(state.lp)
    if sol.status == lp_core.INFEASIBLE:
        raise ValueError("master LP infeasible: the demands cannot be met")
    if sol.status != lp_core.OPTIMAL:
        raise InvariantError(f"master LP came back {sol.status}")
    state.current = state.layout.extract(sol.values, state.instance)
    state.lp_value = sol.objective_value
    for cut in state.cut_pool:
        if cut_lhs(cut, state.current, state.instance) < cut_demand(cut, state.instance):
            raise InvariantError("re-solved master violates a pooled cut")
    return state.current


def add_cut(state: MasterState, cut: CoveringCut) -> None:
    """Append a strictly violated covering cut to the pool."""
    check_cut(cut, state.instance)
    key = cut.key()
    if key in state.cut_keys:
        raise ValueError("duplicate cut rejected")
    if state.current is None:
        raise ValueError("solve the master before adding cuts")
    demand = cut_demand(cut, state.instance)
    if cut_lhs(cut, state.current, state.instance) >= demand:
        raise ValueError("cut is not violated by the current solution")
    coeffs, rhs = cut_row(cut, state.instance, state.layout)
    state.lp.add_row(coeffs, lp_core.GE, rhs)
    state.cut_pool.append(cut)
    state.cut_keys.add(key)


@dataclass
class Certificate:
    lp_value: Fraction
    rounds: int
    num_cuts: int
    ordering_bound_ok: bool
    holding_bound_ok: bool

    def to_json_dict(self) -> dict:
        return {
            "lp_value": format_rat(self.lp_value),
            "rounds": self.rounds,
            "num_cuts": self.num_cuts,
            "ordering_bound_ok": self.ordering_bound_ok,
            "holding_bound_ok": self.holding_bound_ok,
        }


@dataclass
class PipelineResult:
    schedule: OrderSchedule
    certificate: Certificate
    lp_solution: FractionalSolution
    payload: separation.IntervalRequirements
    cuts: list[CoveringCut]
    elapsed_ms: float


def run_pipeline(inst: CmilsInstance, max_rounds: int = 200,
                 add_all_violated: bool = False, trace: Trace = None) -> PipelineResult:
    """Full solve: cut loop, interval rounding, then demand placement."""
    started = time.perf_counter()
    bad = validate(inst)
    if bad:
        raise ValueError("invalid instance: " + "; ".join(bad))
    state = MasterState.new(inst)
    sol = solve_master(state)
    prev_value = state.lp_value
    payload = None
    while True:
        outcome = separation.try_round(sol, inst, all_cuts=add_all_violated)
        if isinstance(outcome, separation.IntervalRequirements):
            payload = outcome
            break
        state.round += 1
        if state.round > max_rounds:
            raise RoundLimitError(f"no rounding after {max_rounds} cut rounds", state=state)
        cuts = outcome if isinstance(outcome, list) else [outcome]
        for cut in cuts:
            add_cut(state, cut)
            if trace:
                trace(f"round={state.round} cut S1={sorted(cut.S1)} "
                      f"S2={sorted(cut.S2)} I={sorted(cut.I)}")
        sol = solve_master(state)
        if state.lp_value < prev_value:
            raise InvariantError("LP value decreased after adding rows")
        prev_value = state.lp_value
        if trace:
            trace(f"round={state.round} lp_value={state.lp_value}")

    ikc = interval_kc.IntervalKcInstance(T=inst.T, C=inst.C, K=inst.K, R=payload.R)
    orders = interval_kc.solve_interval_kc(
        ikc, payload.y_scaled, payload.locked, payload.residual, trace=trace)

    profile = assign_mod.scaled_profile(sol.x, inst)
    placement = assign_mod.solve_assignment(inst, orders, profile)
    if placement is None:
        raise InvariantError("assignment flow infeasible despite covered requirements")
    units = {(s, i): frac * inst.demand(i) for (s, i), frac in placement.items() if frac}
    schedule = make_schedule(inst, orders, units)

    lp_order_part = sum((sol.y[s - 1] * inst.order_cost(s) for s in inst.periods()),
                        Fraction(0))
    cert = Certificate(
        lp_value=state.lp_value,
        rounds=state.round,
        num_cuts=len(state.cut_pool),
        ordering_bound_ok=schedule.ordering_cost <= 10 * lp_order_part,
        holding_bound_ok=schedule.holding_cost <= Fraction(5, 2) * hcost(inst, sol.x),
    )
    elapsed = (time.perf_counter() - started) * 1000.0
    return PipelineResult(schedule=schedule, certificate=cert, lp_solution=sol,
                          payload=payload, cuts=list(state.cut_pool),
                          elapsed_ms=elapsed)
