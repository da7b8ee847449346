"""Layer-by-layer transfer-matrix counting for fixed ``(r, c)``.

A partial table made of the first ``p`` layers is summarized by its
vertical sum, an ``r x c`` table dominated by ``v_{i,j,+}``.  The layer
matrix ``A_k`` relates two such summaries ``s`` and ``t`` when ``t - s`` is a
nonnegative layer with row sums ``v_{i,+,k}`` and column sums ``v_{+,j,k}``.
Counting tables is reading entry ``(l, u)`` of ``A_1 A_2 ... A_h``, where
``l`` is the zero table and ``u = v_{i,j,+}``.

The product is never formed.  A count vector indexed by states is pushed
from ``l`` through the layers, and only states that carry a nonzero count
are stored.  States are encoded by a mixed-radix index that is additive:
``index(s + z) = index(s) + index(z)`` whenever ``s + z`` stays in the box,
so a transition costs one domination test and one integer addition.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .tables import (
    AxisMap,
    EntryIndex,
    TwoMarginals,
    check_consistency,
    frechet_upper,
    remap,
)

__all__ = [
    "DEFAULT_CAP",
    "CapExceeded",
    "StateSpace",
    "LayerMatrix",
    "CountVector",
    "EntryConstraint",
    "build_state_space",
    "difference_layers",
    "layer_matrix",
    "push",
    "count_tables",
    "exists_fixed_rc",
    "entry_value_counts",
    "entry_value_set",
    "select_orientation",
]

DEFAULT_CAP = 10**7
# transitions are materialized in blocks of about this many (state, layer) pairs
_BLOCK = 1 << 21
_INT64_SAFE = 1 << 62


class CapExceeded(RuntimeError):
    def __init__(self, needed: int, cap: int, what: str = "states"):
        super().__init__(f"{what}: need {needed}, cap is {cap}")
        self.needed = needed
        self.cap = cap


@dataclass(frozen=True, eq=False)
class StateSpace:
    """All ``r x c`` tables ``s`` with ``0 <= s <= u`` entrywise.

    Cell ``(i, j)`` is digit ``i * c + j`` of a mixed-radix number whose
    radices are ``u[i, j] + 1``; the first cell is the most significant.
    """

    upper: np.ndarray
    radices: tuple = field(init=False)
    weights: np.ndarray = field(init=False)
    size: int = field(init=False)

    def __post_init__(self):
        u = np.array([[int(v) for v in row] for row in self.upper], dtype=np.int64)
        u.flags.writeable = False
        object.__setattr__(self, "upper", u)
        radices = tuple(int(v) + 1 for v in u.ravel())
        size = math.prod(radices)
        object.__setattr__(self, "radices", radices)
        object.__setattr__(self, "size", size)
        w = []
        acc = 1
        for rad in reversed(radices):
            w.append(acc)
            acc *= rad
        if size > _INT64_SAFE:
            weights = np.array(list(reversed(w)), dtype=object)
        else:
            weights = np.array(list(reversed(w)), dtype=np.int64)
        object.__setattr__(self, "weights", weights)

    @property
    def shape(self) -> tuple[int, int]:
        return self.upper.shape

    def index(self, s) -> int:
        s = np.asarray(s).ravel()
        if len(s) != len(self.radices) or any(
            not 0 <= int(v) < rad for v, rad in zip(s, self.radices)
        ):
            raise ValueError(f"{s.tolist()} is not a state of this space")
        return int(sum(int(v) * int(w) for v, w in zip(s, self.weights)))

    def state(self, index: int) -> np.ndarray:
        if not 0 <= index < self.size:
            raise IndexError(f"state index {index} out of range 0..{self.size - 1}")
        digits = []
        for rad in reversed(self.radices):
            index, d = divmod(index, rad)
            digits.append(d)
        return np.array(list(reversed(digits)), dtype=np.int64).reshape(self.shape)

    @property
    def lower_index(self) -> int:
        return 0

    @property
    def upper_index(self) -> int:
        return self.size - 1

    def __iter__(self):
        for digits in itertools.product(*(range(rad) for rad in self.radices)):
            yield np.array(digits, dtype=np.int64).reshape(self.shape)


def build_state_space(vij, cap: int = DEFAULT_CAP) -> StateSpace:
    """State space of the vertical marginal ``vij``; refuses boxes larger than ``cap``."""
    if cap <= 0:
        raise ValueError("cap must be positive")
    ss = StateSpace(np.asarray(vij, dtype=object))
    if ss.size > cap:
        raise CapExceeded(ss.size, cap)
    return ss


def difference_layers(rowsums, colsums, upper) -> np.ndarray:
    """All nonnegative integer ``r x c`` tables with the given line sums and
    entrywise ``<= upper``, as an array of shape ``(count, r * c)``.
    """
    rows = [int(v) for v in rowsums]
    cols = [int(v) for v in colsums]
    upper = [[int(v) for v in row] for row in upper]
    r, c = len(rows), len(cols)
    if sum(rows) != sum(cols):
        return np.zeros((0, r * c), dtype=np.int64)
    out = []
    z = [0] * (r * c)
    col_rem = cols[:]

    def fill_row(i, j, row_rem):
        if j == c - 1:
            v = row_rem
            if v > upper[i][j] or v > col_rem[j]:
                return
            if i == r - 1 and col_rem[j] != v:
                return
            z[i * c + j] = v
            col_rem[j] -= v
            if i == r - 1:
                out.append(z.copy())
            else:
                fill_row(i + 1, 0, rows[i + 1])
            col_rem[j] += v
            return
        # the last row is forced column by column
        if i == r - 1:
            v = col_rem[j]
            if v > upper[i][j] or v > row_rem:
                return
            z[i * c + j] = v
            col_rem[j] -= v
            fill_row(i, j + 1, row_rem - v)
            col_rem[j] += v
            return
        cap_right = sum(min(upper[i][jj], col_rem[jj]) for jj in range(j + 1, c))
        lo = max(0, row_rem - cap_right)
        for v in range(lo, min(upper[i][j], col_rem[j], row_rem) + 1):
            z[i * c + j] = v
            col_rem[j] -= v
            fill_row(i, j + 1, row_rem - v)
            col_rem[j] += v
        z[i * c + j] = 0

    fill_row(0, 0, rows[0])
    return np.array(out, dtype=np.int64).reshape(len(out), r * c)


@dataclass(frozen=True)
class EntryConstraint:
    """Window ``lower <= z[0, 0] <= upper`` on the first layer's corner cell."""

    lower: int
    upper: int

    def __post_init__(self):
        if not 0 <= self.lower <= self.upper:
            raise ValueError(f"need 0 <= L <= U, got L={self.lower}, U={self.upper}")


@dataclass(frozen=True, eq=False)
class LayerMatrix:
    """Sparse 0/1 relation ``(A_k)_{s,t} = 1`` iff ``t - s`` is in ``diffs``.

    ``diffs`` lists the admissible difference layers (one per row, flattened
    row-major) and ``diff_index`` their additive state indices.  Successors
    of ``s`` are ``s + z`` for the ``z`` with ``s + z <= u``.
    """

    space: StateSpace
    diffs: np.ndarray
    diff_index: np.ndarray

    def successors(self, s_index: int) -> list[int]:
        s = self.space.state(s_index).ravel()
        u = self.space.upper.ravel()
        ok = np.all(self.diffs + s <= u, axis=1)
        return sorted(int(s_index + d) for d in self.diff_index[ok])

    def pairs(self):
        for s in range(self.space.size):
            for t in self.successors(s):
                yield s, t

    def to_dense(self) -> np.ndarray:
        """Materialize the matrix as a Python-int object array (tiny spaces only)."""
        n = self.space.size
        a = np.zeros((n, n), dtype=object)
        for s, t in self.pairs():
            a[s, t] = 1
        return a


def layer_matrix(ss: StateSpace, rowsums, colsums, constraint: EntryConstraint | None = None) -> LayerMatrix:
    diffs = difference_layers(rowsums, colsums, ss.upper)
    if constraint is not None and len(diffs):
        corner = diffs[:, 0]
        diffs = diffs[(corner >= constraint.lower) & (corner <= constraint.upper)]
    if ss.weights.dtype == object:
        idx = np.array([int(np.dot(d.astype(object), ss.weights)) for d in diffs], dtype=object)
    else:
        idx = diffs @ ss.weights
    return LayerMatrix(ss, diffs, idx)


@dataclass(eq=False)
class CountVector:
    """Sparse count vector over a state space: parallel arrays of state
    indices (sorted ascending) and their counts."""

    space: StateSpace
    index: np.ndarray
    counts: np.ndarray

    @classmethod
    def unit(cls, space: StateSpace, state_index: int = 0) -> "CountVector":
        dtype = object if space.weights.dtype == object else np.int64
        return cls(space, np.array([state_index], dtype=dtype), np.array([1], dtype=np.int64))

    def __len__(self):
        return len(self.index)

    def get(self, state_index: int) -> int:
        pos = np.searchsorted(self.index, state_index)
        if pos < len(self.index) and self.index[pos] == state_index:
            return int(self.counts[pos])
        return 0

    def as_dict(self) -> dict[int, int]:
        return {int(i): int(v) for i, v in zip(self.index, self.counts)}

    def total(self) -> int:
        return sum(int(v) for v in self.counts)


def _states_of(space: StateSpace, index: np.ndarray) -> np.ndarray:
    """Decode many state indices at once into rows of cell values."""
    out = np.empty((len(index), len(space.radices)), dtype=np.int64)
    rest = index.copy()
    for cell in range(len(space.radices) - 1, -1, -1):
        rad = space.radices[cell]
        if rest.dtype == object:
            out[:, cell] = [int(x) % rad for x in rest]
            rest = np.array([int(x) // rad for x in rest], dtype=object)
        else:
            out[:, cell] = rest % rad
            rest = rest // rad
    return out


def push(vec: CountVector, a: LayerMatrix, cap: int = DEFAULT_CAP) -> CountVector:
    """Return ``vec @ a`` as a new sparse count vector."""
    space = vec.space
    if len(vec) == 0 or len(a.diffs) == 0:
        return CountVector(space, vec.index[:0], vec.counts[:0])
    u = space.upper.ravel()
    states = _states_of(space, vec.index)
    n_d = len(a.diffs)
    # switch to Python ints once any new count could leave int64
    exact = vec.counts.dtype == object or float(vec.counts.sum(dtype=np.float64)) * n_d >= 2.0**61
    counts = vec.counts.astype(object) if exact else vec.counts
    tgt_parts, cnt_parts = [], []
    step = max(1, _BLOCK // max(1, n_d * states.shape[1]))
    for lo in range(0, len(states), step):
        blk = states[lo:lo + step]
        ok = np.all(blk[:, None, :] + a.diffs[None, :, :] <= u, axis=2)
        src, d = np.nonzero(ok)
        tgt_parts.append(vec.index[lo:lo + step][src] + a.diff_index[d])
        cnt_parts.append(counts[lo:lo + step][src])
    tgt = np.concatenate(tgt_parts)
    cnt = np.concatenate(cnt_parts)
    if len(tgt) == 0:
        return CountVector(space, vec.index[:0], vec.counts[:0])
    if tgt.dtype == object:
        acc: dict[int, int] = {}
        for t, v in zip(tgt, cnt):
            acc[int(t)] = acc.get(int(t), 0) + int(v)
        keys = sorted(acc)
        new_index = np.array(keys, dtype=object)
        new_counts = np.array([acc[k] for k in keys], dtype=object)
    else:
        new_index, inverse = np.unique(tgt, return_inverse=True)
        if cnt.dtype == object:
            new_counts = np.zeros(len(new_index), dtype=object)
        else:
            new_counts = np.zeros(len(new_index), dtype=np.int64)
        np.add.at(new_counts, inverse, cnt)
    if len(new_index) > cap:
        raise CapExceeded(len(new_index), cap, "live states")
    return CountVector(space, new_index, new_counts)


def _orientation_cost(m: TwoMarginals, layer_axis: int) -> int:
    face = {2: m.ij, 1: m.ik, 0: m.jk}[layer_axis]
    return math.prod(int(v) + 1 for v in face.ravel())


def select_orientation(m: TwoMarginals) -> AxisMap:
    """Axis order whose vertical marginal has the smallest state space.

    Only the choice of layer axis changes the state-space size; the two
    remaining axes keep their relative order.  Ties go to the lowest layer
    axis counted from the back (so the identity wins when it is optimal).
    """
    best = min((2, 1, 0), key=lambda ax: _orientation_cost(m, ax))
    axes = tuple(a for a in range(3) if a != best) + (best,)
    return AxisMap(axes).resolved(m.dims)


def _forward(m: TwoMarginals, layers, cap: int, first: EntryConstraint | None = None) -> CountVector:
    """Push the unit vector at ``l`` through ``A_k`` for ``k`` in ``layers``."""
    ss = StateSpace(m.ij)
    vec = CountVector.unit(ss)
    for n, k in enumerate(layers):
        a = layer_matrix(ss, m.ik[:, k], m.jk[:, k], first if n == 0 else None)
        vec = push(vec, a, cap)
        if len(vec) == 0:
            break
    return vec


def count_tables(m: TwoMarginals, cap: int = DEFAULT_CAP, orient: bool = True) -> int:
    """Number of 3-tables with 2-marginals ``m``.

    ``cap`` bounds the number of states alive at any layer.
    """
    if not check_consistency(m).consistent:
        return 0
    if orient:
        m = remap(m, select_orientation(m))
    vec = _forward(m, range(m.dims.h), cap)
    return vec.get(StateSpace(m.ij).upper_index)


def exists_fixed_rc(m: TwoMarginals, cap: int = DEFAULT_CAP) -> bool:
    return count_tables(m, cap) > 0


def _origin_oriented(m: TwoMarginals, e) -> TwoMarginals:
    """Relabel so that ``e`` sits at (1, 1, 1), then pick the cheapest layer axis.

    Axis transposes fix the origin, so the target stays at (1, 1, 1).
    """
    m = remap(m, AxisMap.swap_to_origin(m.dims, e))
    return remap(m, select_orientation(m))


def entry_value_counts(m: TwoMarginals, e, cap: int = DEFAULT_CAP) -> dict[int, int]:
    """Map each value ``v`` of entry ``e`` to the number of tables with ``x_e = v``.

    Only values with a nonzero count appear.  For each candidate ``v`` in
    ``0..frechet_upper`` the first layer matrix is restricted to
    ``v <= (t - s)_{1,1} <= v``.  Layers ``2..h`` do not depend on ``v``, so
    they are handled once: the vector ``A_2 ... A_h e_u`` is obtained by
    pushing from ``l`` through the layers in reverse order (the count of
    completions from ``s`` equals the count from ``l`` to ``u - s``).
    """
    EntryIndex(*e).zero_based(m.dims)
    if not check_consistency(m).consistent:
        return {}
    bound = frechet_upper(m, e)
    m = _origin_oriented(m, e)
    ss = StateSpace(m.ij)
    h = m.dims.h
    back = _forward(m, range(h - 1, 0, -1), cap)
    first = layer_matrix(ss, m.ik[:, 0], m.jk[:, 0], EntryConstraint(0, bound))
    out: dict[int, int] = {}
    top = ss.upper_index
    for z, zi in zip(first.diffs, first.diff_index):
        n = back.get(top - int(zi))
        if n:
            out[int(z[0])] = out.get(int(z[0]), 0) + n
    return dict(sorted(out.items()))


def entry_value_set(m: TwoMarginals, e, cap: int = DEFAULT_CAP) -> set[int]:
    """All values entry ``e`` attains over tables with 2-marginals ``m``."""
    return set(entry_value_counts(m, e, cap))


def count_with_entry_window(m: TwoMarginals, e, lower: int, upper: int, cap: int = DEFAULT_CAP) -> int:
    """Number of tables with ``lower <= x_e <= upper``, via the modified first layer."""
    if not check_consistency(m).consistent:
        return 0
    m = _origin_oriented(m, e)
    vec = _forward(m, range(m.dims.h), cap, EntryConstraint(lower, upper))
    return vec.get(StateSpace(m.ij).upper_index)
