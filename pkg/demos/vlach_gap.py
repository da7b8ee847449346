"""Consistent 0/1 marginals with a real solution but no table."""
from fractions import Fraction

import numpy as np

from threeway.lp import lp_feasible, transportation_system
from threeway.oracle import brute_count
from threeway.reductions import embed_bounds, lift_embedded, vlach_halfint_source, vlach_instance
from threeway.tables import check_consistency, satisfies
from threeway.transfer import count_tables

u, p = vlach_instance()
m, spec = embed_bounds(u, p)
print("dims", tuple(m.dims), "consistent:", check_consistency(m).consistent)

# both engines agree there is nothing to count
print("transfer count:", count_tables(m))
print("brute count:   ", brute_count(m))

# the real relaxation is not empty
res = lp_feasible(transportation_system(m))
print("lp feasible:", res.feasible, "after", res.pivots, "pivots")

# the half-integral point, lifted to the slim table
y = lift_embedded(vlach_halfint_source(), spec)
print("lift satisfies marginals:", satisfies(y, m))
print("values:", sorted(set(y.entries.ravel())))
print(np.vectorize(lambda v: str(Fraction(v)))(y.entries[0]))
