"""Gadget constructions between table problems.

* :func:`embed_bounds` turns 1-marginals plus entry upper bounds for
  ``(r, c, h)`` tables into 2-marginals for slim ``(3, rc, r + c + h)``
  tables, with :func:`lift_embedded` / :func:`project_embedded` as the
  affine bijection between the two solution sets.
* :func:`reduce_3dm` is the unit-marginal case used for 3-dimensional
  matching.
* :func:`permanent_marginals` encodes a 0/1 matrix so that tables are
  counted by its permanent.
* :func:`secure_zero_gadget` and :func:`secure_frechet_gadget` build
  always-feasible instances whose target entry decides feasibility of
  the input system or a 3-dimensional matching instance.

Layout of embedded tables (0-based): axis 0 is ``t`` in ``0..2``; axis 1
is the pair ``ij`` at ``i * c + j``; axis 2 holds ``dom k`` at ``k``, then
``row i`` at ``h + i``, then ``col j`` at ``h + r + j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .tables import (
    Dims3,
    EntryIndex,
    OneMarginals,
    RealTable3,
    Table3,
    TwoMarginals,
    check_consistency,
    marginals2_of,
)

__all__ = [
    "EmbeddingSpec",
    "GadgetSpecA",
    "GadgetSpecB",
    "embed_bounds",
    "lift_embedded",
    "project_embedded",
    "reduce_3dm",
    "permanent_marginals",
    "canonical_gadget_table",
    "secure_zero_gadget",
    "secure_frechet_gadget",
    "spoke_table",
    "vlach_instance",
    "example21_instance",
    "vlach_halfint_source",
]


@dataclass(frozen=True, eq=False)
class EmbeddingSpec:
    """Everything needed to move tables across :func:`embed_bounds`."""

    source_dims: Dims3
    U: int
    one_marginals: OneMarginals
    bounds: Table3

    @property
    def target_dims(self) -> Dims3:
        r, c, h = self.source_dims
        return Dims3(3, r * c, r + c + h)

    def pair(self, i: int, j: int) -> int:
        """1-based pair index of source row ``i`` and column ``j``."""
        return (i - 1) * self.source_dims.c + j

    def dom(self, k: int) -> int:
        return k

    def row(self, i: int) -> int:
        return self.source_dims.h + i

    def col(self, j: int) -> int:
        r, _, h = self.source_dims
        return h + r + j

    def third_axis_labels(self) -> list[str]:
        r, c, h = self.source_dims
        return (
            [f"dom {k}" for k in range(1, h + 1)]
            + [f"row {i}" for i in range(1, r + 1)]
            + [f"col {j}" for j in range(1, c + 1)]
        )

    def pair_labels(self) -> list[str]:
        r, c, _ = self.source_dims
        return [f"{i}{j}" if max(r, c) < 10 else f"{i},{j}" for i in range(1, r + 1) for j in range(1, c + 1)]

    def to_dict(self) -> dict:
        return {
            "kind": "embedding",
            "source_dims": list(self.source_dims),
            "U": self.U,
            "one_marginals": {
                "i": [int(v) for v in self.one_marginals.i],
                "j": [int(v) for v in self.one_marginals.j],
                "k": [int(v) for v in self.one_marginals.k],
            },
            "upper_bounds": self.bounds.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EmbeddingSpec":
        u = d["one_marginals"]
        spec = cls(
            Dims3(*d["source_dims"]),
            int(d["U"]),
            OneMarginals(u["i"], u["j"], u["k"]),
            Table3(d["upper_bounds"]),
        )
        if spec.U != _embedding_constant(spec.one_marginals):
            raise ValueError(f"embedding constant {spec.U} does not match the 1-marginals")
        return spec

    def __eq__(self, other):
        if not isinstance(other, EmbeddingSpec):
            return NotImplemented
        return self.to_dict() == other.to_dict()


@dataclass(frozen=True)
class GadgetSpecA:
    source_dims: Dims3
    T: int

    @property
    def target_dims(self) -> Dims3:
        r, c, h = self.source_dims
        return Dims3(r + 1, c + 1, h + 1)

    @property
    def target_entry(self) -> EntryIndex:
        return EntryIndex(1, 1, 1)

    def to_dict(self) -> dict:
        return {
            "kind": "gadget-zero",
            "source_dims": list(self.source_dims),
            "T": self.T,
            "target_entry": list(self.target_entry),
            "target_value": 0,
        }


@dataclass(frozen=True, eq=False)
class GadgetSpecB:
    n: int
    embedding: EmbeddingSpec

    @property
    def target_dims(self) -> Dims3:
        n1 = self.n + 1
        return Dims3(3, n1 * n1, 3 * n1)

    @property
    def target_entry(self) -> EntryIndex:
        n1 = self.n + 1
        return EntryIndex(1, self.embedding.pair(n1, n1), self.embedding.dom(n1))

    @property
    def target_value(self) -> int:
        return 2 * self.n

    def to_dict(self) -> dict:
        d = self.embedding.to_dict()
        d.update(
            kind="gadget-frechet",
            n=self.n,
            target_entry=list(self.target_entry),
            target_value=self.target_value,
        )
        return d


def _embedding_constant(u: OneMarginals) -> int:
    return min(max(int(v) for v in u.i), max(int(v) for v in u.j))


def embed_bounds(u: OneMarginals, p: Table3) -> tuple[TwoMarginals, EmbeddingSpec]:
    """2-marginals for ``(3, rc, r + c + h)`` tables in bijection with the
    ``(r, c, h)`` tables having 1-marginals ``u`` and entries ``<= p``.
    """
    if tuple(u.dims) != tuple(p.dims):
        raise ValueError(f"dimension mismatch: 1-marginals {tuple(u.dims)}, bounds {tuple(p.dims)}")
    if not u.is_consistent():
        raise ValueError(
            f"inconsistent 1-marginals: totals {sum(u.i)}, {sum(u.j)}, {sum(u.k)}"
        )
    r, c, h = p.dims
    P = p.entries
    layer_bound = P.sum(axis=(0, 1))
    short = [k + 1 for k in range(h) if layer_bound[k] < u.k[k]]
    if short:
        raise ValueError(f"layers {short} have bound total below their 1-marginal; trivially infeasible")
    U = _embedding_constant(u)
    ui = [int(v) for v in u.i]
    uj = [int(v) for v in u.j]
    assert all(c * U >= v for v in ui) and all(r * U >= v for v in uj)

    rc, g = r * c, r + c + h
    vij = np.zeros((3, rc), dtype=object)
    vik = np.zeros((3, g), dtype=object)
    vjk = np.zeros((rc, g), dtype=object)
    vij[0, :] = U
    vij[1, :] = P.sum(axis=2).ravel()
    vij[2, :] = U
    for k in range(h):
        vik[:, k] = (u.k[k], layer_bound[k] - u.k[k], 0)
    for i in range(r):
        vik[:, h + i] = (c * U - ui[i], 0, ui[i])
    for j in range(c):
        vik[:, h + r + j] = (0, uj[j], r * U - uj[j])
    for i in range(r):
        for j in range(c):
            ij = i * c + j
            vjk[ij, :h] = P[i, j, :]
            vjk[ij, h + i] = U
            vjk[ij, h + r + j] = U
    m = TwoMarginals(vij, vik, vjk)
    return m, EmbeddingSpec(Dims3(r, c, h), U, u, p)


def lift_embedded(x: Table3, spec: EmbeddingSpec) -> Table3:
    """The unique array with the embedded 2-marginals whose ``(1, dom)``
    block is ``x``.  Integer input gives a :class:`Table3`, rational input
    a :class:`RealTable3`.
    """
    r, c, h = spec.source_dims
    if tuple(x.dims) != (r, c, h):
        raise ValueError(f"expected source dims {(r, c, h)}, got {tuple(x.dims)}")
    u = spec.one_marginals
    if _line_sums(x) != (list(u.i), list(u.j), list(u.k)):
        raise ValueError("array does not have the embedded 1-marginals")
    X = x.entries
    P = spec.bounds.entries
    if np.any(X > P):
        raise ValueError("array exceeds the upper bounds")
    U = spec.U
    zero = Fraction(0) if x.rational else 0
    y = np.full(tuple(spec.target_dims), zero, dtype=object)
    for i in range(r):
        for j in range(c):
            ij = i * c + j
            line = sum(X[i, j, :], zero)
            y[0, ij, :h] = X[i, j, :]
            y[1, ij, :h] = P[i, j, :] - X[i, j, :]
            y[0, ij, h + i] = U - line
            y[2, ij, h + i] = line
            y[1, ij, h + r + j] = line
            y[2, ij, h + r + j] = U - line
    return type(x)(y)


def _line_sums(x: Table3) -> tuple[list, list, list]:
    e = x.entries
    return (list(e.sum(axis=(1, 2))), list(e.sum(axis=(0, 2))), list(e.sum(axis=(0, 1))))


def project_embedded(y: Table3, spec: EmbeddingSpec) -> Table3:
    """Read the source array back out of the ``(1, dom)`` block."""
    m, _ = embed_bounds(spec.one_marginals, spec.bounds)
    if tuple(y.dims) != tuple(spec.target_dims):
        raise ValueError(f"expected dims {tuple(spec.target_dims)}, got {tuple(y.dims)}")
    got = marginals2_of(y)
    if not all(np.all(getattr(got, f) == getattr(m, f)) for f in ("ij", "ik", "jk")):
        raise ValueError("array does not satisfy the embedded 2-marginals")
    r, c, h = spec.source_dims
    return type(y)(y.entries[0, :, :h].reshape(r, c, h))


def _binary_cube(p: Table3) -> int:
    r, c, h = p.dims
    if not r == c == h:
        raise ValueError(f"expected an (n, n, n) table, got {tuple(p.dims)}")
    if any(v not in (0, 1) for v in p.entries.ravel()):
        raise ValueError("bounds must be 0/1")
    return r


def reduce_3dm(p: Table3) -> tuple[TwoMarginals, EmbeddingSpec]:
    """3-dimensional matching instance ``p`` as 2-marginals for ``(3, n^2, 3n)`` tables."""
    n = _binary_cube(p)
    return embed_bounds(OneMarginals.ones(n), p)


def permanent_marginals(a) -> TwoMarginals | None:
    """2-marginals for ``(2, n, n)`` tables counted by ``perm(a)``.

    Axis 0 selects the layer: a table ``x`` splits as ``x[0] + x[1] = a``
    with ``x[0]`` a permutation matrix under ``a``.  Returns ``None`` when
    ``a`` has an all-zero row or column (the permanent is then 0 and the
    construction would need a negative marginal).
    """
    rows = [[int(v) for v in row] for row in np.asarray(a, dtype=object)]
    n = len(rows)
    if n == 0 or any(len(row) != n for row in rows):
        raise ValueError("matrix must be square and nonempty")
    if any(v not in (0, 1) for row in rows for v in row):
        raise ValueError("matrix entries must be 0 or 1")
    A = np.array(rows, dtype=object)
    row_sums, col_sums = A.sum(axis=1), A.sum(axis=0)
    if min(row_sums) == 0 or min(col_sums) == 0:
        return None
    ij = np.array([[1] * n, list(row_sums - 1)], dtype=object)
    ik = np.array([[1] * n, list(col_sums - 1)], dtype=object)
    return TwoMarginals(ij, ik, A)


def canonical_gadget_table(m: TwoMarginals) -> Table3:
    """Explicit ``(r+1, c+1, h+1)`` table for :func:`secure_zero_gadget`.

    Corner ``(1,1,1)`` holds the total; the three faces through the corner
    hold ``v_{i,+,k}`` (at ``(s, 1, u)``), ``v_{+,j,k}`` (at ``(1, t, u)``)
    and ``v_{i,j,+}`` (at ``(s, t, 1)``); everything else is zero.
    """
    rep = check_consistency(m)
    if not rep.consistent:
        raise ValueError(f"inconsistent 2-marginals: {list(rep.violations)}")
    r, c, h = m.dims
    R = np.zeros((r + 1, c + 1, h + 1), dtype=object)
    R[0, 0, 0] = rep.total
    R[1:, 0, 1:] = m.ik
    R[0, 1:, 1:] = m.jk
    R[1:, 1:, 0] = m.ij
    return Table3(R)


def secure_zero_gadget(m: TwoMarginals) -> tuple[TwoMarginals, GadgetSpecA]:
    """Feasible marginals whose entry (1,1,1) can be 0 iff ``m`` is feasible."""
    R = canonical_gadget_table(m)
    return marginals2_of(R), GadgetSpecA(m.dims, int(R.entries[0, 0, 0]))


def frechet_extension(p: Table3) -> tuple[OneMarginals, Table3]:
    """Grow a 0/1 cube of side ``n`` to side ``n + 1`` bounds and 1-marginals."""
    n = _binary_cube(p)
    N = n + 1
    q = np.zeros((N, N, N), dtype=object)
    q[:n, :n, :n] = p.entries
    q[:n, n, n] = 1
    q[n, n, :n] = 1
    q[n, :n, n] = 1
    q[n, n, n] = 2 * n
    ones = [1] * n + [2 * n]
    return OneMarginals(ones, ones, ones), Table3(q)


def spoke_table(n: int) -> Table3:
    """The always-feasible table of the extended ``(n+1)``-cube system."""
    N = n + 1
    x = np.zeros((N, N, N), dtype=object)
    x[:n, n, n] = 1
    x[n, n, :n] = 1
    x[n, :n, n] = 1
    return Table3(x)


def secure_frechet_gadget(p: Table3) -> tuple[TwoMarginals, GadgetSpecB]:
    """Feasible slim marginals whose target entry reaches ``2n`` iff ``p``
    admits a 3-dimensional matching.
    """
    n = _binary_cube(p)
    u, q = frechet_extension(p)
    m, spec = embed_bounds(u, q)
    return m, GadgetSpecB(n, spec)


def vlach_instance() -> tuple[OneMarginals, Table3]:
    p = np.zeros((2, 2, 2), dtype=int)
    for i, j, k in ((1, 1, 1), (2, 2, 1), (1, 2, 2), (2, 1, 2)):
        p[i - 1, j - 1, k - 1] = 1
    return OneMarginals.ones(2), Table3(p)


def example21_instance() -> tuple[OneMarginals, Table3]:
    p = np.ones((2, 2, 2), dtype=int)
    for i, j, k in ((2, 1, 1), (2, 2, 1), (2, 1, 2)):
        p[i - 1, j - 1, k - 1] = 0
    return OneMarginals.ones(2), Table3(p)


def vlach_halfint_source() -> RealTable3:
    """1/2 on the support of Vlach's bounds: the only real point of that system."""
    _, p = vlach_instance()
    return RealTable3(np.vectorize(lambda v: Fraction(v, 2), otypes=[object])(p.entries))
