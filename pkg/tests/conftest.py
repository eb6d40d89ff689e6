import numpy as np
import pytest

from kmax import from_groups, validate_dataset


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_continuous(rng, K=3, max_n=12, d=2):
    """Random grouped dataset with group sizes in [2, max_n]."""
    sizes = rng.integers(2, max_n + 1, size=K)
    X = rng.normal(size=(int(sizes.sum()), d))
    return validate_dataset(X, sizes)


def random_discrete(rng, K=2, max_n=20, m=4):
    sizes = rng.integers(2, max_n + 1, size=K)
    levels = rng.integers(1, m + 1, size=int(sizes.sum()))
    return validate_dataset(levels, sizes, domain="discrete", num_levels=m)


def dataset_1d(*groups):
    """Groups given as flat lists of scalars."""
    return from_groups([np.asarray(g, dtype=float).reshape(-1, 1) for g in groups])
