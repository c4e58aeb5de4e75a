"""Exact-rational linear programming to optimal vertex solutions.

Minimization LPs with sparse rows and finite box bounds are solved by a
two-phase primal simplex over `fractions.Fraction`.  Bland's least-index
rule governs both the entering and the leaving choice, so the solver cannot
cycle and is fully deterministic.  Variables fixed by their bounds are
substituted out; the remaining bounds are handled natively (nonbasic
variables rest at a bound), which keeps the dense tableau small.

The optimum returned is always a basic solution: the constraints tight at
it span the full variable space, which `verify_vertex` re-checks from
scratch by exact Gaussian elimination.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .errors import InvariantError

LE = "<="
GE = ">="
EQ = "="

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass(frozen=True)
class Row:
    coeffs: Mapping[int, Fraction]
    relation: str
    rhs: Fraction


@dataclass
class LinearProgram:
    num_vars: int
    objective: list[Fraction]
    rows: list[Row] = field(default_factory=list)
    bounds: list[tuple[Fraction, Fraction]] = field(default_factory=list)

    def add_row(self, coeffs: Mapping[int, Fraction], relation: str, rhs) -> None:
        clean = {j: Fraction(v) for j, v in coeffs.items() if v}
        for j in clean:
            if not (0 <= j < self.num_vars):
                raise ValueError(f"row references unknown variable {j}")
        if relation not in (LE, GE, EQ):
            raise ValueError(f"unknown relation {relation!r}")
        self.rows.append(Row(coeffs=clean, relation=relation, rhs=Fraction(rhs)))

    def check_well_formed(self) -> None:
        if len(self.objective) != self.num_vars:
            raise ValueError("objective length mismatch")
        if len(self.bounds) != self.num_vars:
            raise ValueError("bounds length mismatch")
        for j, (lo, hi) in enumerate(self.bounds):
            if lo > hi:
                raise ValueError(f"variable {j}: lo {lo} > hi {hi}")
        for row in self.rows:
            for j in row.coeffs:
                if not (0 <= j < self.num_vars):
                    raise ValueError(f"row references unknown variable {j}")


@dataclass
class LpSolution:
    status: str
    values: Optional[list[Fraction]]
    objective_value: Optional[Fraction]
    tight_rows: frozenset[int] = frozenset()
    at_bound: frozenset[int] = frozenset()


def dump_lp(lp: LinearProgram) -> str:
    """Plain-text inequality rendering, for debugging."""
    out = ["min " + " + ".join(f"{c}*x{j}" for j, c in enumerate(lp.objective) if c)]
    for idx, row in enumerate(lp.rows):
        lhs = " + ".join(f"{v}*x{j}" for j, v in sorted(row.coeffs.items()))
        out.append(f"r{idx}: {lhs or '0'} {row.relation} {row.rhs}")
    for j, (lo, hi) in enumerate(lp.bounds):
        out.append(f"x{j} in [{lo}, {hi}]")
    return "\n".join(out)


class _Tableau:
    """Bounded-variable simplex working state.

    Columns: free structural variables first, then one slack per non-equality
    row, then phase-1 artificials.  `val` holds the current value of every
    column; nonbasic columns always sit at a bound.
    """

    def __init__(self, lp: LinearProgram):
        self.lp = lp
        n = lp.num_vars
        self.fixed: dict[int, Fraction] = {}
        self.col_of_var: dict[int, int] = {}
        self.lo: list[Fraction] = []
        self.hi: list[Optional[Fraction]] = []
        for j in range(n):
            lo, hi = lp.bounds[j]
            if lo == hi:
                self.fixed[j] = lo
            else:
                self.col_of_var[j] = len(self.lo)
                self.lo.append(lo)
                self.hi.append(hi)
        self.n_struct = len(self.lo)

        # Row setup: move fixed variables to the rhs, attach slack columns.
        self.tab: list[list[Fraction]] = []
        rhs: list[Fraction] = []
        slack_col_of_row: list[Optional[int]] = []
        for row in lp.rows:
            dense = [_ZERO] * self.n_struct
            shift = Fraction(row.rhs)
            for j, v in row.coeffs.items():
                if j in self.fixed:
                    shift -= v * self.fixed[j]
                else:
                    dense[self.col_of_var[j]] += v
            self.tab.append(dense)
            rhs.append(shift)
            if row.relation == EQ:
                slack_col_of_row.append(None)
            else:
                col = self.n_struct + sum(1 for c in slack_col_of_row if c is not None)
                slack_col_of_row.append(col)
        m = len(self.tab)
        n_slack = sum(1 for c in slack_col_of_row if c is not None)
        for i, col in enumerate(slack_col_of_row):
            if col is None:
                continue
            coef = _ONE if self.lp.rows[i].relation == LE else -_ONE
            for k, dense in enumerate(self.tab):
                dense.append(coef if k == i else _ZERO)
            self.lo.append(_ZERO)
            self.hi.append(None)
        self.ncols = self.n_struct + n_slack

        # Start every column at its lower bound; slacks start at 0.
        self.val: list[Fraction] = list(self.lo)
        self.basis: list[int] = [-1] * m
        self.in_basis: list[bool] = [False] * self.ncols

        # Choose an initial basis: a slack when its sign works out, otherwise
        # an artificial column, negating the row so the basic value is >= 0.
        self.art_cols: list[int] = []
        for i in range(m):
            resid = rhs[i]
            for j in range(self.ncols):
                v = self.tab[i][j]
                if v:
                    resid -= v * self.val[j]
            scol = slack_col_of_row[i]
            rel = lp.rows[i].relation
            if scol is not None and ((rel == LE and resid >= 0) or (rel == GE and resid <= 0)):
                if rel == GE:  # slack coefficient is -1; flip the row
                    self.tab[i] = [-v for v in self.tab[i]]
                    resid = -resid
                self._make_basic(i, scol, self.val[scol] + resid)
            else:
                if resid < 0:
                    self.tab[i] = [-v for v in self.tab[i]]
                    resid = -resid
                acol = self.ncols
                for k, dense in enumerate(self.tab):
                    dense.append(_ONE if k == i else _ZERO)
                self.lo.append(_ZERO)
                self.hi.append(None)
                self.val.append(_ZERO)
                self.in_basis.append(False)
                self.art_cols.append(acol)
                self.ncols += 1
                self._make_basic(i, acol, resid)
        self.banned: set[int] = set()

    def _make_basic(self, i: int, j: int, value: Fraction) -> None:
        self.basis[i] = j
        self.in_basis[j] = True
        self.val[j] = value

    # -- simplex machinery ------------------------------------------------

    def reduced_costs(self, cost: list[Fraction]) -> list[Fraction]:
        cbar = list(cost)
        for i, b in enumerate(self.basis):
            cb = cost[b]
            if cb:
                row = self.tab[i]
                for j in range(self.ncols):
                    if row[j]:
                        cbar[j] -= cb * row[j]
        return cbar

    def _pivot(self, r: int, j: int, cbar: list[Fraction]) -> None:
        prow = self.tab[r]
        piv = prow[j]
        if piv != 1:
            inv = 1 / piv
            self.tab[r] = prow = [v * inv for v in prow]
        for i, row in enumerate(self.tab):
            if i == r:
                continue
            f = row[j]
            if f:
                self.tab[i] = [a - f * b for a, b in zip(row, prow)]
        f = cbar[j]
        if f:
            for k in range(self.ncols):
                if prow[k]:
                    cbar[k] -= f * prow[k]
        leaving = self.basis[r]
        self.in_basis[leaving] = False
        self.basis[r] = j
        self.in_basis[j] = True

    def run(self, cost: list[Fraction]) -> str:
        """Minimize cost over the current basis; returns OPTIMAL or UNBOUNDED."""
        cbar = self.reduced_costs(cost)
        guard = 2000 + 200 * (len(self.tab) + self.ncols)
        for _ in range(guard):
            enter = -1
            direction = 0
            for j in range(self.ncols):
                if self.in_basis[j] or j in self.banned:
                    continue
                lo, hi = self.lo[j], self.hi[j]
                if hi is not None and lo == hi:
                    continue
                if self.val[j] == lo and cbar[j] < 0:
                    enter, direction = j, 1
                    break
                if hi is not None and self.val[j] == hi and cbar[j] > 0:
                    enter, direction = j, -1
                    break
            if enter < 0:
                return OPTIMAL

            # Ratio test: how far can the entering column move?
            hi_e = self.hi[enter]
            best_t: Optional[Fraction] = None if hi_e is None else hi_e - self.lo[enter]
            best_row = -1  # -1 means a bound flip of the entering column
            for i, row in enumerate(self.tab):
                coef = direction * row[enter]
                if not coef:
                    continue
                b = self.basis[i]
                if coef > 0:
                    t = (self.val[b] - self.lo[b]) / coef
                elif self.hi[b] is not None:
                    t = (self.hi[b] - self.val[b]) / (-coef)
                else:
                    continue
                # ties: a bound flip beats a pivot, otherwise the blocking
                # basic variable with the smallest index leaves (Bland)
                if best_t is None or t < best_t or (t == best_t and best_row >= 0
                                                    and b < self.basis[best_row]):
                    best_t = t
                    best_row = i
            if best_t is None:
                return UNBOUNDED

            t = best_t
            if t:
                self.val[enter] += direction * t
                for i, row in enumerate(self.tab):
                    c = row[enter]
                    if c:
                        self.val[self.basis[i]] -= direction * c * t
            if best_row >= 0:
                leaving = self.basis[best_row]
                coef = direction * self.tab[best_row][enter]
                self.val[leaving] = self.lo[leaving] if coef > 0 else self.hi[leaving]
                self._pivot(best_row, enter, cbar)
        raise InvariantError("simplex failed to terminate (cycling guard tripped)")

    def drop_artificials(self) -> None:
        """Pivot zero-valued artificials out of the basis; delete dead rows."""
        for i in range(len(self.tab) - 1, -1, -1):
            b = self.basis[i]
            if b not in self.art_cols:
                continue
            if self.val[b] != 0:
                raise InvariantError("artificial variable basic at nonzero value")
            row = self.tab[i]
            target = -1
            for j in range(self.ncols):
                if j in self.art_cols or self.in_basis[j]:
                    continue
                hj = self.hi[j]
                if hj is not None and self.lo[j] == hj:
                    continue
                if row[j]:
                    target = j
                    break
            if target >= 0:
                cbar = [_ZERO] * self.ncols
                self._pivot(i, target, cbar)
            else:
                # Row only touches artificials/fixed columns: redundant.
                self.in_basis[b] = False
                del self.tab[i]
                del self.basis[i]
        for a in self.art_cols:
            self.banned.add(a)

    def solution_values(self) -> list[Fraction]:
        out = []
        for j in range(self.lp.num_vars):
            if j in self.fixed:
                out.append(self.fixed[j])
            else:
                out.append(self.val[self.col_of_var[j]])
        return out


def _eval_row(row: Row, values: Sequence[Fraction]) -> Fraction:
    return sum((v * values[j] for j, v in row.coeffs.items()), _ZERO)


def solve_to_vertex(lp: LinearProgram) -> LpSolution:
    """Solve to an optimal basic (vertex) solution, exactly.

    Same LP in, same solution out: the pivot rule has no randomness.
    """
    lp.check_well_formed()
    tab = _Tableau(lp)

    if tab.art_cols:
        phase1 = [_ZERO] * tab.ncols
        for a in tab.art_cols:
            phase1[a] = _ONE
        status = tab.run(phase1)
        if status != OPTIMAL:
            raise InvariantError("phase-1 objective cannot be unbounded")
        if sum((tab.val[a] for a in tab.art_cols), _ZERO) != 0:
            return LpSolution(status=INFEASIBLE, values=None, objective_value=None)
        tab.drop_artificials()

    cost = [_ZERO] * tab.ncols
    for j, col in tab.col_of_var.items():
        cost[col] = Fraction(lp.objective[j])
    status = tab.run(cost)
    if status == UNBOUNDED:
        return LpSolution(status=UNBOUNDED, values=None, objective_value=None)

    values = tab.solution_values()
    obj = sum((lp.objective[j] * values[j] for j in range(lp.num_vars)), _ZERO)
    tight = frozenset(
        idx for idx, row in enumerate(lp.rows) if _eval_row(row, values) == row.rhs
    )
    at_bound = frozenset(
        j for j in range(lp.num_vars)
        if values[j] == lp.bounds[j][0] or values[j] == lp.bounds[j][1]
    )
    return LpSolution(status=OPTIMAL, values=values, objective_value=obj,
                      tight_rows=tight, at_bound=at_bound)


def _rank(matrix: list[list[Fraction]], width: int) -> int:
    rank = 0
    rows = [row[:] for row in matrix]
    for col in range(width):
        pivot_row = None
        for i in range(rank, len(rows)):
            if rows[i][col]:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        rows[rank], rows[pivot_row] = rows[pivot_row], rows[rank]
        prow = rows[rank]
        inv = 1 / prow[col]
        rows[rank] = prow = [v * inv for v in prow]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], prow)]
        rank += 1
        if rank == width:
            break
    return rank


def is_feasible(lp: LinearProgram, values: Sequence[Fraction]) -> bool:
    """Exact feasibility check of a point against rows and bounds."""
    for j in range(lp.num_vars):
        lo, hi = lp.bounds[j]
        if not (lo <= values[j] <= hi):
            return False
    for row in lp.rows:
        lhs = _eval_row(row, values)
        if row.relation == LE and lhs > row.rhs:
            return False
        if row.relation == GE and lhs < row.rhs:
            return False
        if row.relation == EQ and lhs != row.rhs:
            return False
    return True


def verify_vertex(lp: LinearProgram, sol: LpSolution) -> bool:
    """True iff sol is feasible and its tight constraints span the space."""
    if sol.status != OPTIMAL or sol.values is None:
        return False
    values = sol.values
    if len(values) != lp.num_vars or not is_feasible(lp, values):
        return False
    tight: list[list[Fraction]] = []
    for row in lp.rows:
        if _eval_row(row, values) == row.rhs:
            dense = [_ZERO] * lp.num_vars
            for j, v in row.coeffs.items():
                dense[j] = v
            tight.append(dense)
    for j in range(lp.num_vars):
        lo, hi = lp.bounds[j]
        if values[j] == lo or values[j] == hi:
            unit = [_ZERO] * lp.num_vars
            unit[j] = _ONE
            tight.append(unit)
    return _rank(tight, lp.num_vars) == lp.num_vars
