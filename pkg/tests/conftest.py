import numpy as np
import pytest

from sunflowerkit import kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # pay any jit compile cost once, outside timed assertions
    kernels.warm_up()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_family_masks(rng, n, m, size):
    """Distinct random m-subsets of {1..n} as sorted element tuples."""
    from itertools import combinations

    all_sets = list(combinations(range(1, n + 1), m))
    idx = rng.choice(len(all_sets), size=min(size, len(all_sets)), replace=False)
    return sorted(all_sets[i] for i in idx)
