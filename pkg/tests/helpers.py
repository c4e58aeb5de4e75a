"""Shared test utilities: independent oracles and random case generators."""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations, product

from lotforge import lp_core
from lotforge.instance import CmilsInstance, FractionalSolution, OrderSchedule
from lotforge.interval_kc import IntervalKcInstance, max_coverable
from lotforge.intervals import all_intervals, cap_within
from lotforge.laminar_kc import LaminarFamily, LaminarKcInstance


def solve_square(rows: list[list[Fraction]], rhs: list[Fraction]):
    """Unique solution of a k x k rational system, or None if singular."""
    k = len(rows)
    aug = [rows[i][:] + [rhs[i]] for i in range(k)]
    for col in range(k):
        pivot = next((i for i in range(col, k) if aug[i][col]), None)
        if pivot is None:
            return None
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for i in range(k):
            if i != col and aug[i][col]:
                f = aug[i][col]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[col])]
    return [aug[i][k] for i in range(k)]


def enumerate_optimum(lp: lp_core.LinearProgram):
    """Optimal value by enumerating every vertex candidate basis.

    A vertex fixes some variables at bounds and pins the rest by tight rows;
    all (free set, tight row subset, bound pattern) choices are tried and
    each candidate re-checked for feasibility.  None means infeasible.
    """
    n, m = lp.num_vars, len(lp.rows)
    dense_rows = []
    for row in lp.rows:
        dense = [Fraction(0)] * n
        for j, v in row.coeffs.items():
            dense[j] = v
        dense_rows.append((dense, row.rhs))
    best = None
    for k in range(0, min(n, m) + 1):
        for free in combinations(range(n), k):
            free_set = set(free)
            fixed = [j for j in range(n) if j not in free_set]
            for tight in combinations(range(m), k):
                sub = [[dense_rows[r][0][j] for j in free] for r in tight]
                for pattern in product((0, 1), repeat=len(fixed)):
                    values = [Fraction(0)] * n
                    for j, side in zip(fixed, pattern):
                        values[j] = lp.bounds[j][side]
                    if k:
                        rhs = []
                        for idx, r in enumerate(tight):
                            adj = dense_rows[r][1]
                            for j in fixed:
                                adj -= dense_rows[r][0][j] * values[j]
                            rhs.append(adj)
                        sol = solve_square(sub, rhs)
                        if sol is None:
                            continue
                        for j, v in zip(free, sol):
                            values[j] = v
                    if lp_core.is_feasible(lp, values):
                        obj = sum((lp.objective[j] * values[j] for j in range(n)),
                                  Fraction(0))
                        if best is None or obj < best:
                            best = obj
    return best


def random_lp(seed: int) -> lp_core.LinearProgram:
    """Small random LP with box bounds; row count shrinks as vars grow."""
    rng = random.Random(seed)
    n = 1 + seed % 8
    m = rng.randint(0, 6 if n <= 4 else 3)
    lp = lp_core.LinearProgram(
        num_vars=n,
        objective=[Fraction(rng.randint(-5, 5)) for _ in range(n)],
        bounds=[(Fraction(0), Fraction(rng.randint(1, 3))) for _ in range(n)],
    )
    for _ in range(m):
        coeffs = {j: Fraction(rng.randint(-3, 3)) for j in range(n) if rng.random() < 0.7}
        coeffs = {j: v for j, v in coeffs.items() if v}
        if not coeffs:
            continue
        rel = rng.choice([lp_core.LE, lp_core.GE, lp_core.EQ])
        lp.add_row(coeffs, rel, Fraction(rng.randint(-4, 6)))
    return lp


def schedule_to_fractional(inst: CmilsInstance, sched: OrderSchedule) -> FractionalSolution:
    """Integral (x, y) encoding of a feasible schedule."""
    x = {(s, i): qty / inst.demand(i) for (s, i), qty in sched.assignment.items() if qty}
    y = tuple(Fraction(1) if s in sched.orders else Fraction(0) for s in inst.periods())
    return FractionalSolution(x=x, y=y)


def naive_requirements(sol: FractionalSolution, inst: CmilsInstance) -> dict:
    """Direct double-loop evaluation of the interval requirements."""
    out = {}
    for a, b in all_intervals(inst.T):
        total = Fraction(0)
        for i in inst.items():
            if a < inst.deadline(i) <= b:
                prefix = sum((sol.x_val(s, i) for s in range(1, a + 1)), Fraction(0))
                total += max(1 - Fraction(5, 2) * prefix, Fraction(0)) * inst.demand(i)
        out[(a, b)] = total
    return out


def grid_scan_coverable(a, b, y, locked, C) -> Fraction:
    """Independent supremum check for max_coverable over a provably complete
    candidate grid: every capacity, plus the roots of the capped-mass slack
    interpolated segment by segment."""
    def mass_ok(W):
        total = sum((min(C[s - 1], W) * y[s - 1] for s in range(a + 1, b + 1)
                     if s not in locked), Fraction(0))
        return total >= 2 * W

    def count_ok(W):
        total = sum((y[s - 1] for s in range(a + 1, b + 1)
                     if s not in locked and C[s - 1] >= W), Fraction(0))
        return total >= 1

    def f(W):
        total = sum((min(C[s - 1], W) * y[s - 1] for s in range(a + 1, b + 1)
                     if s not in locked), Fraction(0))
        return total - 2 * W

    caps = sorted({C[s - 1] for s in range(a + 1, b + 1) if s not in locked})
    candidates = {Fraction(0)} | set(caps)
    points = [Fraction(0)] + caps + [(caps[-1] if caps else Fraction(0)) + 1 +
                                     max(caps, default=Fraction(0))]
    for u, v in zip(points, points[1:]):
        fu, fv = f(u), f(v)
        if fu != fv:
            root = u + fu * (v - u) / (fu - fv)
            if u <= root <= v:
                candidates.add(root)
    if caps:
        fz = f(points[-1])
        candidates.add(points[-1] + fz / 2)
    best = Fraction(0)
    for W in sorted(candidates):
        if W >= 0 and (mass_ok(W) or count_ok(W)):
            best = max(best, W)
    # probe midpoints above the claimed best: none may satisfy either test
    above = sorted(w for w in candidates if w > best)
    for w in above + [best + 1]:
        probe = (best + w) / 2
        assert not (mass_ok(probe) or count_ok(probe))
    return best


def random_laminar_case(seed: int):
    """Laminar instance plus (y, locked, residual) meeting the entry contract."""
    rng = random.Random(seed)
    T = rng.randint(3, 10)
    C = tuple(Fraction(rng.randint(1, 10)) for _ in range(T))
    K = tuple(Fraction(rng.randint(0, 9)) for _ in range(T))
    intervals = {(0, T)}

    def split(a, b):
        if b - a >= 2 and rng.random() < 0.8:
            c = rng.randint(a + 1, b - 1)
            intervals.add((a, c))
            intervals.add((c, b))
            split(a, c)
            split(c, b)

    split(0, T)
    y = tuple(rng.choice([Fraction(0), Fraction(1, 4), Fraction(1, 2),
                          Fraction(3, 4), Fraction(9, 10), Fraction(1)])
              for _ in range(T))
    locked = frozenset(s for s in range(1, T + 1) if y[s - 1] == 1)
    family = LaminarFamily.from_intervals(T, intervals)
    req: dict = {}
    residual: dict = {}
    for iv in family.members:
        room = max_coverable(iv[0], iv[1], y, locked, C)
        if room > 0 and rng.random() < 0.9:
            want = room * Fraction(rng.randint(1, 4), 4)
            residual[iv] = want
            req[iv] = want + cap_within(C, iv[0], iv[1], locked)
        elif rng.random() < 0.3:
            anchored = cap_within(C, iv[0], iv[1], locked)
            if anchored > 0:
                req[iv] = anchored  # already covered by the locked periods
                residual[iv] = Fraction(0)
    inst = LaminarKcInstance(T=T, C=C, K=K, family=family, R=req)
    return inst, y, locked, residual


def random_interval_kc(seed: int, max_T: int = 10) -> IntervalKcInstance:
    rng = random.Random(seed)
    T = rng.randint(3, max_T)
    C = tuple(Fraction(rng.randint(2, 10)) for _ in range(T))
    K = tuple(Fraction(rng.randint(1, 9)) for _ in range(T))
    R = {}
    for a, b in all_intervals(T):
        if rng.random() < 0.3:
            capsum = sum((C[s - 1] for s in range(a + 1, b + 1)), Fraction(0))
            R[(a, b)] = Fraction(rng.randint(1, int(capsum)))
    return IntervalKcInstance(T=T, C=C, K=K, R=R)
