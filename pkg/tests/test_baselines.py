import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kmax import (
    ENERGY,
    DomainMismatchError,
    KernelSpec,
    TooFewPointsError,
    ValidationError,
    ZeroWithinDispersionError,
    block_sums,
    disco_from_sums,
    disco_gram,
    disco_statistic,
    ecf_from_sums,
    ecf_gram,
    ecf_statistic,
    gram_matrix,
    mmd_squared_pair,
    validate_dataset,
)
from conftest import dataset_1d, random_continuous, random_discrete


# ----------------------------------------------------------------------- disco


def test_disco_hand_example():
    data = dataset_1d([0.0, 1.0], [3.0, 5.0])
    assert disco_statistic(data, 1.0) == pytest.approx(11.0 / 3.0, rel=1e-12)


def test_disco_hand_example_components():
    data = dataset_1d([0.0, 1.0], [3.0, 5.0])
    S = block_sums(disco_gram(data, 1.0), data.index)
    sizes = np.array(data.group_sizes, dtype=float)
    R = S.S / np.outer(sizes, sizes)
    E = 2.0 * R[0, 1] - R[0, 0] - R[1, 1]
    assert E == pytest.approx(5.5, rel=1e-12)


def test_disco_identical_groups_zero():
    X = np.array([[0.0], [2.0], [0.0], [2.0]])
    data = validate_dataset(X, [2, 2])
    assert disco_statistic(data, 1.0) == 0.0


def test_disco_positive_when_separated():
    data = dataset_1d([0.0, 0.1], [10.0, 10.1])
    assert disco_statistic(data, 1.0) > 1.0


@given(seed=st.integers(min_value=0, max_value=10_000))
@settings(max_examples=40, deadline=None)
def test_energy_factor_two_identity(seed):
    """The pairwise between-group dispersion is twice the energy MMD^2."""
    rng = np.random.default_rng(seed)
    data = random_continuous(rng, K=2, max_n=10, d=3)
    S_disco = block_sums(disco_gram(data, 1.0), data.index)
    sizes = np.array(data.group_sizes, dtype=float)
    R = S_disco.S / np.outer(sizes, sizes)
    E = 2.0 * R[0, 1] - R[0, 0] - R[1, 1]

    S_energy = block_sums(gram_matrix(KernelSpec(ENERGY), data), data.index)
    v2 = mmd_squared_pair(S_energy, 0, 1)
    assert E == pytest.approx(2.0 * v2, rel=1e-9, abs=1e-12)


def test_disco_group_relabel_invariant(rng):
    data = random_continuous(rng, K=3, max_n=8, d=2)
    X, sizes = data.observations, data.group_sizes
    base = disco_statistic(data, 1.0)
    # swap the first two groups
    swapped = np.vstack(
        [X[sizes[0] : sizes[0] + sizes[1]], X[: sizes[0]], X[sizes[0] + sizes[1] :]]
    )
    redata = validate_dataset(swapped, [sizes[1], sizes[0], sizes[2]])
    assert disco_statistic(redata, 1.0) == pytest.approx(base, rel=1e-12)


def test_disco_alpha_prime_validation(rng):
    data = random_continuous(rng, K=2, max_n=5, d=1)
    for bad in (0.0, -1.0, 2.5):
        with pytest.raises(ValidationError):
            disco_statistic(data, bad)
    # alpha' = 2 sits on the boundary and is allowed
    assert disco_statistic(data, 2.0) >= 0.0


def test_disco_needs_continuous_domain(rng):
    data = random_discrete(rng)
    with pytest.raises(DomainMismatchError):
        disco_gram(data, 1.0)


def test_disco_too_few_points():
    data = dataset_1d([0.0], [1.0])
    with pytest.raises(TooFewPointsError):
        disco_statistic(data, 1.0)


def test_disco_zero_within_dispersion():
    data = dataset_1d([0.0, 0.0], [1.0, 1.0])
    with pytest.raises(ZeroWithinDispersionError):
        disco_statistic(data, 1.0)


def test_disco_from_sums_degenerate_within():
    # engine-path variant maps zero within dispersion to +inf, not an error
    data = dataset_1d([0.0, 0.0], [1.0, 1.0])
    S = block_sums(disco_gram(data, 1.0), data.index)
    assert disco_from_sums(S.S, np.array([2.0, 2.0])) == np.inf


# ------------------------------------------------------------------------- ecf


def test_ecf_same_point_singletons():
    data = dataset_1d([2.0], [2.0])
    assert ecf_statistic(data, 1.5) == 0.0


def test_ecf_hand_value_at_root_six():
    data = dataset_1d([0.0], [math.sqrt(6.0)])
    assert ecf_statistic(data, 1.5) == pytest.approx(1.0 - math.exp(-1.0), rel=1e-12)


def test_ecf_within_group_reorder_invariant(rng):
    data = random_continuous(rng, K=2, max_n=8, d=2)
    base = ecf_statistic(data, 1.5)
    X = data.observations.copy()
    blk = data.index.block(0)
    X[blk] = X[blk][::-1]
    redata = validate_dataset(X, data.group_sizes)
    assert ecf_statistic(redata, 1.5) == pytest.approx(base, rel=1e-12)


def test_ecf_from_sums_matches_statistic(rng):
    data = random_continuous(rng, K=3, max_n=7, d=2)
    S = block_sums(ecf_gram(data, 1.5), data.index)
    sizes = np.array(data.group_sizes, dtype=float)
    assert ecf_from_sums(S.S, sizes) == pytest.approx(ecf_statistic(data, 1.5), rel=1e-12)


def test_ecf_alpha_pp_validation(rng):
    data = random_continuous(rng, K=2, max_n=5, d=1)
    with pytest.raises(ValidationError):
        ecf_statistic(data, 0.0)
    with pytest.raises(ValidationError):
        ecf_statistic(data, -2.0)


def test_ecf_gram_diag_is_one(rng):
    data = random_continuous(rng, K=2, max_n=6, d=2)
    G = ecf_gram(data, 1.5)
    assert np.array_equal(np.diag(G.values), np.ones(data.num_observations))
