"""Counting tables layer by layer, checked against enumeration."""
import math
import random

import numpy as np

from threeway.oracle import brute_count
from threeway.tables import Table3, TwoMarginals, marginals2_of
from threeway.transfer import count_tables, select_orientation

rng = random.Random(1)
t = Table3(np.array([rng.randint(0, 3) for _ in range(36)]).reshape(3, 3, 4))
m = marginals2_of(t)
print("vertical face:\n", m.ij)

a = select_orientation(m)
print("layer axis chosen:", a.axes[2])
print("transfer:", count_tables(m))
print("brute:   ", brute_count(m))

# far past int64: layers are the two 2x2 permutation matrices
h = 120
big = TwoMarginals([[60, 60], [60, 60]], np.ones((2, h), int), np.ones((2, h), int))
n = count_tables(big)
print("C(120, 60) =", n, n == math.comb(h, 60))
