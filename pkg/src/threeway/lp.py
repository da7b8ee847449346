"""Exact feasibility of the real relaxation (multi-index transportation polytope).

Phase I of the simplex method over ``Fraction`` with Bland's rule.  There
is no floating point anywhere: Vlach-type instances differ from feasible
ones only by half-integral points.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .tables import OneMarginals, RealTable3, Table3, TwoMarginals

__all__ = ["RationalSystem", "LpResult", "transportation_system", "bounded_system", "lp_feasible"]


@dataclass(frozen=True, eq=False)
class RationalSystem:
    """``A x = b, x >= 0``.  The first ``dims`` product of variables are table
    cells in ``(i, j, k)`` C order; any further variables are slacks.
    """

    dims: tuple
    rows: tuple  # each row: (tuple of (column, coefficient) pairs, rhs)
    n_vars: int
    labels: tuple = ()

    @property
    def n_cells(self) -> int:
        r, c, h = self.dims
        return r * c * h

    def residual(self, x) -> list[int]:
        """Indices of rows that ``x`` violates."""
        bad = []
        for n, (coeffs, rhs) in enumerate(self.rows):
            if sum((a * x[col] for col, a in coeffs), Fraction(0)) != rhs:
                bad.append(n)
        return bad

    def dense(self) -> tuple[list[list[Fraction]], list[Fraction]]:
        A = [[Fraction(0)] * self.n_vars for _ in self.rows]
        for row, (coeffs, _) in zip(A, self.rows):
            for col, a in coeffs:
                row[col] += a
        return A, [Fraction(rhs) for _, rhs in self.rows]


@dataclass(frozen=True)
class LpResult:
    feasible: bool
    witness: RealTable3 | None = None
    pivots: int = 0

    def __bool__(self):
        return self.feasible


def _cell(dims, i, j, k) -> int:
    _, c, h = dims
    return (i * c + j) * h + k


def transportation_system(m: TwoMarginals) -> RationalSystem:
    """One equation per 2-marginal entry, ``ij`` rows first, then ``ik``, then ``jk``."""
    r, c, h = dims = tuple(m.dims)
    rows, labels = [], []
    for i in range(r):
        for j in range(c):
            rows.append((tuple((_cell(dims, i, j, k), 1) for k in range(h)), Fraction(m.ij[i, j])))
            labels.append(("ij", i + 1, j + 1))
    for i in range(r):
        for k in range(h):
            rows.append((tuple((_cell(dims, i, j, k), 1) for j in range(c)), Fraction(m.ik[i, k])))
            labels.append(("ik", i + 1, k + 1))
    for j in range(c):
        for k in range(h):
            rows.append((tuple((_cell(dims, i, j, k), 1) for i in range(r)), Fraction(m.jk[j, k])))
            labels.append(("jk", j + 1, k + 1))
    return RationalSystem(dims, tuple(rows), r * c * h, tuple(labels))


def bounded_system(u: OneMarginals, p: Table3) -> RationalSystem:
    """1-marginal equations plus ``x + slack = p`` for every cell."""
    if tuple(u.dims) != tuple(p.dims):
        raise ValueError(f"dimension mismatch: {tuple(u.dims)} vs {tuple(p.dims)}")
    r, c, h = dims = tuple(p.dims)
    n = r * c * h
    rows, labels = [], []
    for i in range(r):
        rows.append((tuple(_cell(dims, i, j, k) for j in range(c) for k in range(h)), u.i[i]))
        labels.append(("i", i + 1))
    for j in range(c):
        rows.append((tuple(_cell(dims, i, j, k) for i in range(r) for k in range(h)), u.j[j]))
        labels.append(("j", j + 1))
    for k in range(h):
        rows.append((tuple(_cell(dims, i, j, k) for i in range(r) for j in range(c)), u.k[k]))
        labels.append(("k", k + 1))
    rows = [(tuple((col, 1) for col in cols), Fraction(int(rhs))) for cols, rhs in rows]
    for i in range(r):
        for j in range(c):
            for k in range(h):
                cell = _cell(dims, i, j, k)
                rows.append((((cell, 1), (n + cell, 1)), Fraction(int(p.entries[i, j, k]))))
                labels.append(("bound", i + 1, j + 1, k + 1))
    return RationalSystem(dims, tuple(rows), 2 * n, tuple(labels))


def lp_feasible(sys: RationalSystem, check_cycling: bool = False) -> LpResult:
    """Phase-I simplex: minimize the sum of artificial variables.

    Rows with negative right-hand side are negated first, so the
    artificials form a feasible starting basis.  Entering variable is the
    lowest-index column with negative reduced cost; leaving row is the
    minimum ratio with ties broken by lowest basic variable (Bland).
    Redundant rows leave an artificial in the basis at level zero, which
    is harmless.  With ``check_cycling`` every basis is recorded and a
    repeat raises ``RuntimeError``.
    """
    A, b = sys.dense()
    m, n = len(A), sys.n_vars
    for row_i in range(m):
        if b[row_i] < 0:
            A[row_i] = [-a for a in A[row_i]]
            b[row_i] = -b[row_i]
    # tableau columns: n structural, m artificial; last entry is the rhs
    T = [A[i] + [Fraction(int(i == q)) for q in range(m)] + [b[i]] for i in range(m)]
    basis = [n + i for i in range(m)]
    # reduced costs for min sum(artificial): c_j - c_B B^-1 A_j
    cost = [Fraction(0)] * (n + m + 1)
    for row in T:
        for col in range(n):
            cost[col] -= row[col]
        cost[-1] -= row[-1]
    seen = set()
    pivots = 0
    while True:
        if check_cycling:
            key = tuple(sorted(basis))
            if key in seen:
                raise RuntimeError("simplex revisited a basis")
            seen.add(key)
        enter = next((col for col in range(n + m) if cost[col] < 0), None)
        if enter is None:
            break
        leave, best = None, None
        for row_i, row in enumerate(T):
            a = row[enter]
            if a > 0:
                ratio = row[-1] / a
                if best is None or ratio < best or (ratio == best and basis[row_i] < basis[leave]):
                    leave, best = row_i, ratio
        if leave is None:
            # phase I is bounded below by zero; an unbounded ray cannot exist
            raise AssertionError("unbounded phase-I direction")
        _pivot(T, cost, leave, enter)
        basis[leave] = enter
        pivots += 1
    if cost[-1] != 0:
        return LpResult(False, None, pivots)
    x = [Fraction(0)] * n
    for row_i, var in enumerate(basis):
        if var < n:
            x[var] = T[row_i][-1]
    bad = sys.residual(x)
    if bad or any(v < 0 for v in x):
        raise AssertionError(f"simplex witness violates rows {bad}")
    cells = np.array(x[: sys.n_cells], dtype=object).reshape(sys.dims)
    return LpResult(True, RealTable3(cells), pivots)


def _pivot(T, cost, leave, enter):
    prow = T[leave]
    piv = prow[enter]
    if piv != 1:
        T[leave] = prow = [v / piv for v in prow]
    nz = [col for col, v in enumerate(prow) if v]
    for row_i, row in enumerate(T):
        if row_i != leave:
            f = row[enter]
            if f:
                for col in nz:
                    row[col] -= f * prow[col]
    f = cost[enter]
    if f:
        for col in nz:
            cost[col] -= f * prow[col]
