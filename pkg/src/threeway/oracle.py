"""Brute-force ground truth for small instances.

Everything here enumerates tables one at a time.  It is slow on purpose:
these functions share no code with the transfer-matrix engine so the two
can be checked against each other.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from .tables import (
    EntryIndex,
    OneMarginals,
    RealTable3,
    Table3,
    TwoMarginals,
    check_consistency,
    marginals2_of,
)

__all__ = [
    "EnumLimits",
    "LimitExceeded",
    "iter_tables",
    "brute_count",
    "brute_exists",
    "brute_entry_set",
    "brute_entry_attains",
    "iter_bounded_tables",
    "brute_count_bounded",
    "ryser_permanent",
    "permutation_permanent",
    "brute_3dm",
    "brute_real_halfint_check",
]


class LimitExceeded(RuntimeError):
    """The enumeration hit its node or table budget."""


@dataclass(frozen=True)
class EnumLimits:
    max_tables: int = 10**7
    max_nodes: int = 10**7

    def __post_init__(self):
        if self.max_tables <= 0 or self.max_nodes <= 0:
            raise ValueError("enumeration limits must be positive")


DEFAULT_LIMITS = EnumLimits()


class _Budget:
    def __init__(self, lim: EnumLimits):
        self.lim = lim
        self.nodes = 0
        self.tables = 0

    def node(self):
        self.nodes += 1
        if self.nodes > self.lim.max_nodes:
            raise LimitExceeded(f"more than {self.lim.max_nodes} search nodes")

    def table(self):
        self.tables += 1
        if self.tables > self.lim.max_tables:
            raise LimitExceeded(f"more than {self.lim.max_tables} tables")


def _search(m: TwoMarginals, lim: EnumLimits, fixed: dict | None = None) -> Iterator[list]:
    """Depth-first search over all tables with 2-marginals ``m``.

    Cells are filled layer by layer (k outer), row-major inside a layer.
    Each cell ranges between a lower bound (what the three lines through it
    still need beyond the capacity of their unfilled cells) and the
    smallest remaining line sum.  The last layer is read off from the
    remaining ``ij`` line sums.  ``fixed`` maps 0-based cells to forced
    values.  Yields the flat entry list (in (i, j, k) C order) for each table.
    """
    if not check_consistency(m).consistent:
        return
    r, c, h = m.dims
    rem_ij = [[int(v) for v in row] for row in m.ij]
    rem_ik = [[int(v) for v in row] for row in m.ik]
    rem_jk = [[int(v) for v in row] for row in m.jk]
    order = [(i, j, k) for k in range(h) for i in range(r) for j in range(c)]
    fixed = fixed or {}
    x = [0] * (r * c * h)
    budget = _Budget(lim)

    def capacity_after(i, j, k):
        # what the not-yet-filled cells on each line through (i, j, k) can still absorb
        cap_ik = sum(min(rem_ij[i][jj], rem_jk[jj][k]) for jj in range(j + 1, c))
        cap_jk = sum(min(rem_ij[ii][j], rem_ik[ii][k]) for ii in range(i + 1, r))
        cap_ij = sum(min(rem_ik[i][kk], rem_jk[j][kk]) for kk in range(k + 1, h))
        return cap_ij, cap_ik, cap_jk

    n_free = len(order) - r * c
    cells = [(i * c + j) * h + k for i, j, k in order]
    cur, top = [0] * n_free, [0] * n_free

    def assign(pos, v):
        i, j, k = order[pos]
        rem_ij[i][j] -= v
        rem_ik[i][k] -= v
        rem_jk[j][k] -= v
        x[cells[pos]] += v
        cur[pos] += v

    # iterative DFS: a generator per level would cost one frame hop per
    # level for every table yielded
    pos, descending = 0, True
    while pos >= 0:
        if descending:
            budget.node()
            if pos == n_free:
                # the last layer is forced: what each (i, j) line still needs.
                # Earlier layers closed their ik and jk lines, so consistency
                # makes its row and column sums come out right.
                last = [(i, j, rem_ij[i][j]) for i in range(r) for j in range(c)]
                if all(fixed.get((i, j, h - 1), v) == v for i, j, v in last):
                    for i, j, v in last:
                        x[(i * c + j) * h + h - 1] = v
                    budget.table()
                    yield x
                    for i, j, _ in last:
                        x[(i * c + j) * h + h - 1] = 0
                pos, descending = pos - 1, False
                continue
            i, j, k = order[pos]
            hi = min(rem_ij[i][j], rem_ik[i][k], rem_jk[j][k])
            cap_ij, cap_ik, cap_jk = capacity_after(i, j, k)
            lo = max(0, rem_ij[i][j] - cap_ij, rem_ik[i][k] - cap_ik, rem_jk[j][k] - cap_jk)
            if (i, j, k) in fixed:
                v = fixed[(i, j, k)]
                lo, hi = max(lo, v), min(hi, v)
            if lo > hi:
                pos, descending = pos - 1, False
                continue
            top[pos] = hi
            assign(pos, lo)
            pos += 1
        elif cur[pos] < top[pos]:
            assign(pos, 1)
            pos, descending = pos + 1, True
        else:
            assign(pos, -cur[pos])
            pos -= 1


def iter_tables(m: TwoMarginals, lim: EnumLimits = DEFAULT_LIMITS) -> Iterator[Table3]:
    """Yield every table with 2-marginals ``m``."""
    shape = tuple(m.dims)
    for flat in _search(m, lim):
        yield Table3(np.array(flat, dtype=object).reshape(shape))


def brute_count(m: TwoMarginals, lim: EnumLimits = DEFAULT_LIMITS) -> int:
    return sum(1 for _ in _search(m, lim))


def brute_exists(m: TwoMarginals, lim: EnumLimits = DEFAULT_LIMITS) -> bool:
    return next(_search(m, lim), None) is not None


def brute_entry_set(m: TwoMarginals, e, lim: EnumLimits = DEFAULT_LIMITS) -> set[int]:
    """All values entry ``e`` takes over the tables with 2-marginals ``m``."""
    r, c, h = m.dims
    i, j, k = EntryIndex(*e).zero_based(m.dims)
    cell = (i * c + j) * h + k
    return {flat[cell] for flat in _search(m, lim)}


def brute_entry_attains(m: TwoMarginals, e, value: int, lim: EnumLimits = DEFAULT_LIMITS) -> bool:
    """Is there a table with marginals ``m`` whose entry ``e`` equals ``value``?"""
    cell = EntryIndex(*e).zero_based(m.dims)
    return next(_search(m, lim, fixed={cell: value}), None) is not None


def iter_bounded_tables(
    u: OneMarginals, p: Table3, lim: EnumLimits = DEFAULT_LIMITS
) -> Iterator[Table3]:
    """Yield every table with 1-marginals ``u`` dominated by ``p``."""
    if tuple(u.dims) != tuple(p.dims):
        raise ValueError(f"dimension mismatch: {tuple(u.dims)} vs {tuple(p.dims)}")
    if not u.is_consistent():
        return
    r, c, h = p.dims
    bound = p.entries
    rem = [[int(v) for v in u.i], [int(v) for v in u.j], [int(v) for v in u.k]]
    cells = [(i, j, k) for k in range(h) for i in range(r) for j in range(c)]
    # capacity of the cells after position pos on each slice, recomputed lazily
    x = np.zeros((r, c, h), dtype=object)
    budget = _Budget(lim)

    def slack(pos, axis, idx):
        return sum(
            int(bound[cell]) for cell in cells[pos + 1:] if cell[axis] == idx
        )

    def rec(pos):
        budget.node()
        if pos == len(cells):
            budget.table()
            yield Table3(x.copy())
            return
        i, j, k = cells[pos]
        hi = min(int(bound[i, j, k]), rem[0][i], rem[1][j], rem[2][k])
        lo = max(0, *(rem[a][idx] - slack(pos, a, idx) for a, idx in enumerate((i, j, k))))
        for v in range(lo, hi + 1):
            rem[0][i] -= v
            rem[1][j] -= v
            rem[2][k] -= v
            x[i, j, k] = v
            yield from rec(pos + 1)
            rem[0][i] += v
            rem[1][j] += v
            rem[2][k] += v
        x[i, j, k] = 0

    yield from rec(0)


def brute_count_bounded(u: OneMarginals, p: Table3, lim: EnumLimits = DEFAULT_LIMITS) -> int:
    return sum(1 for _ in iter_bounded_tables(u, p, lim))


def _square_01(a) -> list[list[int]]:
    rows = [[int(v) for v in row] for row in np.asarray(a, dtype=object)]
    n = len(rows)
    if any(len(row) != n for row in rows):
        raise ValueError("matrix is not square")
    if any(v not in (0, 1) for row in rows for v in row):
        raise ValueError("matrix entries must be 0 or 1")
    return rows


def permutation_permanent(a) -> int:
    """Permanent by summing over all permutations."""
    rows = _square_01(a)
    n = len(rows)
    return sum(
        all(rows[i][s[i]] for i in range(n)) for s in itertools.permutations(range(n))
    )


def ryser_permanent(a) -> int:
    """Exact permanent of a square 0/1 matrix.

    Up to size 8 this sums over permutations directly; beyond that it uses
    Ryser's inclusion-exclusion over column subsets.
    """
    rows = _square_01(a)
    n = len(rows)
    if n <= 8:
        return permutation_permanent(rows)
    return _ryser(rows)


def _ryser(rows: list[list[int]]) -> int:
    n = len(rows)
    if n == 0:
        return 1
    total = 0
    # walk column subsets in Gray-code order, updating row sums incrementally
    row_sums = [0] * n
    prev = 0
    for g in range(1, 1 << n):
        gray = g ^ (g >> 1)
        changed = gray ^ prev
        col = changed.bit_length() - 1
        sign = 1 if gray & changed else -1
        for i in range(n):
            row_sums[i] += sign * rows[i][col]
        prev = gray
        prod = 1
        for s in row_sums:
            prod *= s
            if not prod:
                break
        total += -prod if (n - bin(gray).count("1")) % 2 else prod
    return total


def brute_3dm(p: Table3) -> bool:
    """Does some table with all 1-marginals 1 fit under the 0/1 table ``p``?

    Backtracks over layers: layer k picks a free row and a free column with
    ``p[i, j, k] = 1``.
    """
    r, c, h = p.dims
    if not r == c == h:
        raise ValueError(f"expected an (n, n, n) table, got {tuple(p.dims)}")
    if any(v not in (0, 1) for v in p.entries.ravel()):
        raise ValueError("bounds must be 0/1")
    n = r
    ones = [
        [(i, j) for i in range(n) for j in range(n) if p.entries[i, j, k]] for k in range(n)
    ]
    used_i, used_j = set(), set()

    def rec(k):
        if k == n:
            return True
        for i, j in ones[k]:
            if i in used_i or j in used_j:
                continue
            used_i.add(i)
            used_j.add(j)
            found = rec(k + 1)
            used_i.discard(i)
            used_j.discard(j)
            if found:
                return True
        return False

    return rec(0)


def brute_real_halfint_check(m: TwoMarginals, x: RealTable3) -> bool:
    """Exact check that a rational array has 2-marginals ``m``."""
    if tuple(m.dims) != tuple(x.dims):
        raise ValueError(f"dimension mismatch: {tuple(m.dims)} vs {tuple(x.dims)}")
    got = marginals2_of(RealTable3(x.entries))
    return all(
        bool(np.all(getattr(got, f) == getattr(m, f))) for f in ("ij", "ik", "jk")
    )


def as_fraction_table(values) -> RealTable3:
    return RealTable3(np.vectorize(Fraction, otypes=[object])(np.asarray(values, dtype=object)))
