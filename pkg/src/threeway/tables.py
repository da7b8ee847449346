"""Three-way tables, their marginals, and index relabelings.

All arrays are stored 0-based as numpy ``object`` arrays holding Python
ints (or ``Fraction`` for real tables), so sums never overflow.  Entry
coordinates passed in and out of the public API are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "Dims3",
    "Table3",
    "RealTable3",
    "TwoMarginals",
    "OneMarginals",
    "EntryIndex",
    "ConsistencyReport",
    "AxisMap",
    "as_object_array",
    "marginals2_of",
    "marginals1_of",
    "check_consistency",
    "frechet_upper",
    "satisfies",
    "dominated",
    "remap",
    "remap_table",
]


def as_object_array(values, ndim: int | None = None, rational: bool = False) -> np.ndarray:
    """Copy ``values`` into a read-only object array of exact numbers."""
    arr = np.array(values, dtype=object)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-dimensional array, got shape {arr.shape}")
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        if rational:
            out[idx] = Fraction(v)
        else:
            if isinstance(v, (bool, np.bool_)) or int(v) != v:
                raise ValueError(f"non-integer entry {v!r}")
            out[idx] = int(v)
    out.flags.writeable = False
    return out


class Dims3(NamedTuple):
    r: int
    c: int
    h: int

    def validate(self) -> "Dims3":
        if min(self) < 1:
            raise ValueError(f"dimensions must be positive, got {tuple(self)}")
        return self


class EntryIndex(NamedTuple):
    """1-based cell coordinates ``(i, j, k)``."""

    i: int
    j: int
    k: int

    def zero_based(self, dims: Sequence[int]) -> tuple[int, int, int]:
        for name, v, n in zip("ijk", self, dims):
            if not 1 <= v <= n:
                raise IndexError(f"entry index {name}={v} out of range 1..{n}")
        return (self.i - 1, self.j - 1, self.k - 1)


def _check_nonneg(arr: np.ndarray, what: str) -> None:
    for idx, v in np.ndenumerate(arr):
        if v < 0:
            raise ValueError(f"{what} has negative entry {v} at {tuple(x + 1 for x in idx)}")


@dataclass(frozen=True, eq=False)
class Table3:
    """A nonnegative integer 3-array of size ``(r, c, h)``."""

    entries: np.ndarray
    rational = False

    def __post_init__(self):
        arr = as_object_array(self.entries, ndim=3, rational=self.rational)
        Dims3(*arr.shape).validate()
        _check_nonneg(arr, type(self).__name__)
        object.__setattr__(self, "entries", arr)

    @classmethod
    def zeros(cls, dims: Sequence[int]):
        return cls(np.zeros(tuple(dims), dtype=int))

    @property
    def dims(self) -> Dims3:
        return Dims3(*self.entries.shape)

    def __getitem__(self, e):
        return self.entries[EntryIndex(*e).zero_based(self.dims)]

    def __eq__(self, other):
        if not isinstance(other, (Table3, RealTable3)):
            return NotImplemented
        return self.dims == other.dims and bool(np.all(self.entries == other.entries))

    def __hash__(self):
        return hash((self.dims, tuple(self.entries.ravel())))

    def __repr__(self):
        return f"{type(self).__name__}({self.entries.tolist()!r})"

    def total(self):
        return sum(self.entries.ravel(), 0 if not self.rational else Fraction(0))

    def tolist(self) -> list:
        return self.entries.tolist()

    def as_rational(self) -> "RealTable3":
        return RealTable3(self.entries)


@dataclass(frozen=True, eq=False, repr=False)
class RealTable3(Table3):
    """A nonnegative exact-rational 3-array."""

    rational = True

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for v in self.entries.ravel())

    def as_integer(self) -> Table3:
        if not self.is_integral():
            raise ValueError("array has non-integral entries")
        return Table3(np.vectorize(int, otypes=[object])(self.entries))


@dataclass(frozen=True, eq=False)
class TwoMarginals:
    """The face sums ``v_{i,j,+}``, ``v_{i,+,k}`` and ``v_{+,j,k}``.

    ``ij`` has shape ``(r, c)``, ``ik`` shape ``(r, h)``, ``jk`` shape ``(c, h)``.
    """

    ij: np.ndarray
    ik: np.ndarray
    jk: np.ndarray
    rational: bool = field(default=False, compare=False)

    def __post_init__(self):
        for name in ("ij", "ik", "jk"):
            arr = as_object_array(getattr(self, name), ndim=2, rational=self.rational)
            _check_nonneg(arr, name)
            object.__setattr__(self, name, arr)
        r, c = self.ij.shape
        for name, shape in (("ik", (r, None)), ("jk", (c, None))):
            arr = getattr(self, name)
            if arr.shape[0] != shape[0]:
                raise ValueError(f"{name} has shape {arr.shape}, incompatible with ij {self.ij.shape}")
        if self.ik.shape[1] != self.jk.shape[1]:
            raise ValueError(f"ik {self.ik.shape} and jk {self.jk.shape} disagree on the layer count")
        self.dims.validate()

    @property
    def dims(self) -> Dims3:
        return Dims3(self.ij.shape[0], self.ij.shape[1], self.ik.shape[1])

    def __eq__(self, other):
        if not isinstance(other, TwoMarginals):
            return NotImplemented
        return all(
            a.shape == b.shape and bool(np.all(a == b))
            for a, b in ((self.ij, other.ij), (self.ik, other.ik), (self.jk, other.jk))
        )

    def __hash__(self):
        return hash(tuple(tuple(a.ravel()) for a in (self.ij, self.ik, self.jk)) + (self.dims,))

    def __repr__(self):
        return (
            f"TwoMarginals(ij={self.ij.tolist()!r}, ik={self.ik.tolist()!r}, "
            f"jk={self.jk.tolist()!r})"
        )

    @classmethod
    def zeros(cls, dims: Sequence[int]) -> "TwoMarginals":
        r, c, h = dims
        return cls(np.zeros((r, c), int), np.zeros((r, h), int), np.zeros((c, h), int))


@dataclass(frozen=True, eq=False)
class OneMarginals:
    """Line sums ``u_{i,+,+}``, ``u_{+,j,+}``, ``u_{+,+,k}``."""

    i: np.ndarray
    j: np.ndarray
    k: np.ndarray

    def __post_init__(self):
        for name in ("i", "j", "k"):
            arr = as_object_array(getattr(self, name), ndim=1)
            _check_nonneg(arr, f"one-marginal {name}")
            object.__setattr__(self, name, arr)
        self.dims.validate()

    @property
    def dims(self) -> Dims3:
        return Dims3(len(self.i), len(self.j), len(self.k))

    def __eq__(self, other):
        if not isinstance(other, OneMarginals):
            return NotImplemented
        return all(
            list(a) == list(b) for a, b in ((self.i, other.i), (self.j, other.j), (self.k, other.k))
        )

    def __hash__(self):
        return hash((tuple(self.i), tuple(self.j), tuple(self.k)))

    def __repr__(self):
        return f"OneMarginals(i={list(self.i)!r}, j={list(self.j)!r}, k={list(self.k)!r})"

    def is_consistent(self) -> bool:
        return sum(self.i) == sum(self.j) == sum(self.k)

    @classmethod
    def ones(cls, n: int) -> "OneMarginals":
        return cls([1] * n, [1] * n, [1] * n)


@dataclass(frozen=True)
class ConsistencyReport:
    consistent: bool
    total: int | None
    violations: tuple = ()

    def __bool__(self):
        return self.consistent


def marginals2_of(t: Table3) -> TwoMarginals:
    e = t.entries
    return TwoMarginals(e.sum(axis=2), e.sum(axis=1), e.sum(axis=0), rational=t.rational)


def marginals1_of(t: Table3) -> OneMarginals:
    e = t.entries
    return OneMarginals(e.sum(axis=(1, 2)), e.sum(axis=(0, 2)), e.sum(axis=(0, 1)))


def check_consistency(m: TwoMarginals) -> ConsistencyReport:
    """Check every equation the three faces must share.

    Equation ids are ``("i", i)``, ``("j", j)``, ``("k", k)`` (1-based) for
    the shared line sums and ``("total", name)`` for grand totals that
    disagree with the ``ij`` total.
    """
    violations = []
    lines = (
        ("i", m.ij.sum(axis=1), m.ik.sum(axis=1)),
        ("j", m.ij.sum(axis=0), m.jk.sum(axis=1)),
        ("k", m.ik.sum(axis=0), m.jk.sum(axis=0)),
    )
    for name, lhs, rhs in lines:
        for idx, (a, b) in enumerate(zip(lhs, rhs), start=1):
            if a != b:
                violations.append(((name, idx), a, b))
    totals = {name: sum(getattr(m, name).ravel(), 0) for name in ("ij", "ik", "jk")}
    for name in ("ik", "jk"):
        if totals[name] != totals["ij"]:
            violations.append((("total", name), totals["ij"], totals[name]))
    ok = not violations
    return ConsistencyReport(ok, totals["ij"] if ok else None, tuple(violations))


def frechet_upper(m: TwoMarginals, e) -> int:
    i, j, k = EntryIndex(*e).zero_based(m.dims)
    return min(m.ij[i, j], m.ik[i, k], m.jk[j, k])


def _require_same_dims(a, b) -> None:
    if tuple(a.dims) != tuple(b.dims):
        raise ValueError(f"dimension mismatch: {tuple(a.dims)} vs {tuple(b.dims)}")


def satisfies(t: Table3, m: TwoMarginals) -> bool:
    _require_same_dims(t, m)
    return marginals2_of(t) == m


def dominated(t: Table3, p: Table3) -> bool:
    _require_same_dims(t, p)
    return bool(np.all(t.entries <= p.entries))


@dataclass(frozen=True)
class AxisMap:
    """Relabeling of a 3-array: transpose by ``axes``, then reindex.

    The relabeled array ``T'`` satisfies
    ``T'[n0, n1, n2] = T.transpose(axes)[perms[0][n0], perms[1][n1], perms[2][n2]]``
    with 0-based indices.  ``perms[q]`` is a permutation of ``range(len of new axis q)``.
    """

    axes: tuple = (0, 1, 2)
    perms: tuple = (None, None, None)

    @classmethod
    def identity(cls, dims: Sequence[int]) -> "AxisMap":
        return cls((0, 1, 2), tuple(tuple(range(n)) for n in dims))

    @classmethod
    def swap_to_origin(cls, dims: Sequence[int], e) -> "AxisMap":
        """Transpositions moving the (1-based) entry ``e`` to ``(1, 1, 1)``."""
        zero = EntryIndex(*e).zero_based(dims)
        perms = []
        for n, x in zip(dims, zero):
            p = list(range(n))
            p[0], p[x] = p[x], p[0]
            perms.append(tuple(p))
        return cls((0, 1, 2), tuple(perms))

    def resolved(self, dims: Sequence[int]) -> "AxisMap":
        """Fill unspecified index permutations with identities and validate."""
        if sorted(self.axes) != [0, 1, 2]:
            raise ValueError(f"invalid axis permutation {self.axes}")
        new_dims = [dims[a] for a in self.axes]
        perms = []
        for n, p in zip(new_dims, self.perms):
            p = tuple(range(n)) if p is None else tuple(int(x) for x in p)
            if sorted(p) != list(range(n)):
                raise ValueError(f"invalid index permutation {p} for axis of length {n}")
            perms.append(p)
        return AxisMap(tuple(self.axes), tuple(perms))

    def target_dims(self, dims: Sequence[int]) -> Dims3:
        return Dims3(*(dims[a] for a in self.axes))

    def compose(self, inner: "AxisMap") -> "AxisMap":
        """``self ∘ inner``: apply ``inner`` first."""
        axes = tuple(inner.axes[a] for a in self.axes)
        perms = tuple(
            tuple(inner.perms[self.axes[q]][x] for x in self.perms[q]) for q in range(3)
        )
        return AxisMap(axes, perms)

    def inverse(self) -> "AxisMap":
        axes = tuple(int(x) for x in np.argsort(self.axes))
        perms = [None] * 3
        for q, a in enumerate(self.axes):
            perms[a] = tuple(int(x) for x in np.argsort(self.perms[q]))
        return AxisMap(axes, tuple(perms))

    def apply_index(self, e) -> EntryIndex:
        """Where the (1-based) source entry ``e`` lands after relabeling."""
        zero = [x - 1 for x in e]
        out = []
        for q in range(3):
            src = zero[self.axes[q]]
            out.append(self.perms[q].index(src) + 1)
        return EntryIndex(*out)


def remap_table(t: Table3, a: AxisMap) -> Table3:
    a = a.resolved(t.dims)
    arr = t.entries.transpose(a.axes)[np.ix_(*a.perms)]
    return type(t)(arr)


_FACES = {(0, 1): "ij", (0, 2): "ik", (1, 2): "jk"}


def remap(m: TwoMarginals, a: AxisMap) -> TwoMarginals:
    a = a.resolved(m.dims)
    faces = {}
    for (q0, q1), name in _FACES.items():
        o0, o1 = a.axes[q0], a.axes[q1]
        src = getattr(m, _FACES[tuple(sorted((o0, o1)))])
        if o0 > o1:
            src = src.T
        faces[name] = src[np.ix_(a.perms[q0], a.perms[q1])]
    return TwoMarginals(faces["ij"], faces["ik"], faces["jk"], rational=m.rational)
