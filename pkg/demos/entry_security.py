"""Which values can one cell take, and the two gadgets built on that question."""
import numpy as np

from threeway.oracle import brute_3dm, brute_entry_attains
from threeway.reductions import (
    example21_instance,
    reduce_3dm,
    secure_frechet_gadget,
    secure_zero_gadget,
    vlach_instance,
)
from threeway.tables import Table3, frechet_upper, marginals2_of
from threeway.transfer import entry_value_counts

m = marginals2_of(Table3(np.ones((2, 2, 2), int)))
e = (1, 1, 1)
print("Frechet bound:", frechet_upper(m, e))
print("tables per value:", entry_value_counts(m, e))

# zero gadget: always feasible, corner can be 0 iff the input is
for name, inst in (("matching", example21_instance), ("vlach", vlach_instance)):
    src, _ = reduce_3dm(inst()[1])
    g, spec = secure_zero_gadget(src)
    print(name, "zero gadget", tuple(g.dims), "corner can be 0:", brute_entry_attains(g, (1, 1, 1), 0))

# Frechet gadget: the target reaches 2n iff a matching exists
for name, inst in (("matching", example21_instance), ("vlach", vlach_instance)):
    p = inst()[1]
    g, spec = secure_frechet_gadget(p)
    hit = brute_entry_attains(g, spec.target_entry, spec.target_value)
    print(name, "target", tuple(spec.target_entry), "reaches", spec.target_value, ":", hit, "| matching:", brute_3dm(p))
