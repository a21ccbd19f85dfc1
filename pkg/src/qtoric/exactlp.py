"""Exact two-phase simplex over the rationals.

Solves ``min c.x  s.t.  A x = b, x >= 0`` with Bland's rule, so it always
terminates.  When the system is infeasible the phase-one duals give a Farkas
certificate ``y`` with ``y.A <= 0`` componentwise and ``y.b > 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence


@dataclass
class LPResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    x: list[Fraction] = field(default_factory=list)
    objective: Fraction | None = None
    farkas: list[Fraction] | None = None


def _pivot(tab: list[list[Fraction]], cost: list[Fraction], r: int, c: int) -> None:
    prow = tab[r]
    inv = 1 / prow[c]
    tab[r] = prow = [v * inv for v in prow]
    for i, row in enumerate(tab):
        if i != r and row[c] != 0:
            f = row[c]
            tab[i] = [a - f * b for a, b in zip(row, prow)]
    if cost[c] != 0:
        f = cost[c]
        cost[:] = [a - f * b for a, b in zip(cost, prow)]


def _run(tab, cost, basis, allowed) -> str:
    rhs = len(tab[0]) - 1
    while True:
        enter = next((j for j in allowed if cost[j] < 0), None)
        if enter is None:
            return "optimal"
        best = None
        for i, row in enumerate(tab):
            if row[enter] > 0:
                ratio = row[rhs] / row[enter]
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            return "unbounded"
        leave = best[1]
        _pivot(tab, cost, leave, enter)
        basis[leave] = enter


def solve_standard(c: Sequence, a: Sequence[Sequence], b: Sequence) -> LPResult:
    m = len(a)
    n = len(c) if c is not None else (len(a[0]) if a else 0)
    c = [Fraction(v) for v in c] if c is not None else [Fraction(0)] * n
    signs = []
    tab = []
    for i in range(m):
        s = -1 if Fraction(b[i]) < 0 else 1
        signs.append(s)
        row = [Fraction(v) * s for v in a[i]]
        row += [Fraction(int(i == k)) for k in range(m)]
        row.append(Fraction(b[i]) * s)
        tab.append(row)
    if m == 0:
        if any(v < 0 for v in c):
            return LPResult("unbounded")
        return LPResult("optimal", [Fraction(0)] * n, Fraction(0))
    basis = [n + i for i in range(m)]
    width = n + m + 1
    # phase one: minimise the sum of artificials
    cost = [Fraction(0)] * width
    for i in range(m):
        cost[n + i] = Fraction(1)
    for row in tab:
        cost = [a_ - b_ for a_, b_ in zip(cost, row)]
    _run(tab, cost, basis, range(n))
    phase1 = -cost[-1]
    if phase1 > 0:
        # reduced cost of artificial i equals 1 - y_i
        y = [(1 - cost[n + i]) * signs[i] for i in range(m)]
        return LPResult("infeasible", farkas=y)
    # drive remaining artificials out of the basis
    for i in range(m):
        if basis[i] >= n:
            j = next((j for j in range(n) if tab[i][j] != 0), None)
            if j is not None:
                _pivot(tab, cost, i, j)
                basis[i] = j
    keep = [i for i in range(m) if basis[i] < n]
    tab = [tab[i] for i in keep]
    basis = [basis[i] for i in keep]
    cost = c + [Fraction(0)] * (m + 1)
    for i, bvar in enumerate(basis):
        if cost[bvar] != 0:
            f = cost[bvar]
            cost = [a_ - f * b_ for a_, b_ in zip(cost, tab[i])]
    status = _run(tab, cost, basis, range(n))
    if status == "unbounded":
        return LPResult("unbounded")
    x = [Fraction(0)] * n
    for i, bvar in enumerate(basis):
        x[bvar] = tab[i][-1]
    return LPResult("optimal", x, sum(ci * xi for ci, xi in zip(c, x)))


def feasible(a: Sequence[Sequence], b: Sequence) -> LPResult:
    """Feasibility of ``A x = b, x >= 0``."""
    n = len(a[0]) if a else 0
    return solve_standard([0] * n, a, b)
