"""Permanents as table counts."""
import numpy as np

from threeway.oracle import ryser_permanent
from threeway.reductions import permanent_marginals
from threeway.transfer import count_tables

rng = np.random.default_rng(7)
for n in (3, 4, 6, 8):
    a = (rng.random((n, n)) < 0.6).astype(int)
    m = permanent_marginals(a)
    tables = 0 if m is None else count_tables(m)
    print(n, "perm", ryser_permanent(a), "tables", tables)
