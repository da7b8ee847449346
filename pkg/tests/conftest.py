import random

import numpy as np
import pytest

from threeway.tables import OneMarginals, Table3, TwoMarginals, marginals1_of, marginals2_of

# The unique matching x of the five-triple instance and the three blocks of its lift y.
MATCH_X = {(1, 1, 1): 1, (2, 2, 2): 1}
# rows: dom 1, dom 2, row 1, row 2, col 1, col 2; columns: pairs 11, 12, 21, 22
MATCH_Y_BLOCKS = [
    [[1, 0, 0, 0], [0, 0, 0, 1], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 0], [0, 0, 0, 0]],
    [[0, 1, 0, 0], [1, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1]],
    [[0, 0, 0, 0], [0, 0, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]],
]


def table_from_cells(dims, cells):
    x = np.zeros(dims, dtype=int)
    for (i, j, k), v in cells.items():
        x[i - 1, j - 1, k - 1] = v
    return Table3(x)


def matching_lift_y():
    # block t is indexed [gro][pair]; the table is indexed [t][pair][gro]
    return Table3(np.array(MATCH_Y_BLOCKS).transpose(0, 2, 1))


def random_table(rng, max_dims, max_entry):
    dims = [rng.randint(1, n) for n in max_dims]
    vals = [rng.randint(0, max_entry) for _ in range(int(np.prod(dims)))]
    return Table3(np.array(vals, dtype=int).reshape(dims))


def random_consistent_marginals(rng, max_dims=(2, 2, 2)):
    """Marginals of a signed integer table, kept when every face sum is
    nonnegative.  Always consistent; sometimes infeasible."""
    while True:
        dims = [rng.randint(1, n) for n in max_dims]
        x = np.array([rng.randint(-1, 2) for _ in range(int(np.prod(dims)))]).reshape(dims)
        faces = x.sum(axis=2), x.sum(axis=1), x.sum(axis=0)
        if all((f >= 0).all() for f in faces):
            return TwoMarginals(*faces)


def random_bounded_system(rng, max_dims=(2, 2, 3), max_bound=3):
    """1-marginals and upper bounds with every layer's bound total at least
    its 1-marginal (so the embedding is defined).  Feasible about half the time."""
    while True:
        dims = [rng.randint(1, n) for n in max_dims]
        size = int(np.prod(dims))
        p = np.array([rng.randint(0, max_bound) for _ in range(size)]).reshape(dims)
        if rng.random() < 0.5:
            x0 = np.array([rng.randint(0, v) for v in p.ravel()]).reshape(dims)
        else:
            x0 = np.array([rng.randint(0, max_bound) for _ in range(size)]).reshape(dims)
        u = marginals1_of(Table3(x0))
        if all(p.sum(axis=(0, 1))[k] >= u.k[k] for k in range(dims[2])):
            return u, Table3(p)


@pytest.fixture
def rng():
    return random.Random(20261019)


_acceptance_lines = []


def record_acceptance(line):
    _acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


__all__ = [
    "MATCH_X",
    "MATCH_Y_BLOCKS",
    "OneMarginals",
    "matching_lift_y",
    "marginals2_of",
    "random_bounded_system",
    "random_consistent_marginals",
    "random_table",
    "record_acceptance",
    "table_from_cells",
]
