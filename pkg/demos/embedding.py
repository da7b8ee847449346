"""Bounded tables with fixed line sums as slim tables with fixed face sums."""
import numpy as np

from threeway.oracle import brute_count, iter_bounded_tables
from threeway.reductions import embed_bounds, lift_embedded, project_embedded
from threeway.tables import OneMarginals, Table3, satisfies

u = OneMarginals([2, 1], [1, 2], [2, 1])
p = Table3(np.array([[[1, 1], [1, 0]], [[0, 1], [1, 1]]]))
m, spec = embed_bounds(u, p)
print("source", tuple(p.dims), "-> target", tuple(m.dims), "U =", spec.U)
print(spec.third_axis_labels())

xs = list(iter_bounded_tables(u, p))
print("bounded tables:", len(xs), " slim tables:", brute_count(m))

for x in xs:
    y = lift_embedded(x, spec)
    assert satisfies(y, m) and project_embedded(y, spec) == x
print("every lift satisfies the marginals and projects back")
print(xs[0].entries[:, :, 0])
