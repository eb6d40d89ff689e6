import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kmax import (
    DISCO,
    ECF,
    ENERGY,
    EXACT_ENUMERATION,
    GAUSSIAN,
    LINEAR,
    MAX_MMD,
    MONTE_CARLO,
    WEIGHTED_MAX_MMD,
    EnumerationTooLargeError,
    KernelSpec,
    PermutationPlan,
    ValidationError,
    assignment_count,
    disco_gram,
    gram_matrix,
    max_mmd,
    permutation_critical_value,
    permutation_pvalue_exact,
    permutation_pvalue_mc,
    permuted_statistic,
    validate_dataset,
)
from conftest import dataset_1d, random_continuous


def exact_plan(kind=MAX_MMD):
    return PermutationPlan(EXACT_ENUMERATION, kind)


def linear_gram(data):
    return gram_matrix(KernelSpec(LINEAR), data)


# ------------------------------------------------------------ assignment_count


def test_assignment_count_values():
    assert assignment_count((1, 1)) == 2
    assert assignment_count((2, 2)) == 6
    assert assignment_count((1, 1, 1)) == 6
    assert assignment_count((3, 2)) == 10


def test_enumeration_cap_enforced():
    X = np.random.default_rng(0).normal(size=(30, 1))
    data = validate_dataset(X, [10, 10, 10])
    with pytest.raises(EnumerationTooLargeError):
        permutation_pvalue_exact(linear_gram(data), data.index, exact_plan())


# -------------------------------------------------------------------- exact p


def test_exact_p_singletons():
    data = dataset_1d([0.0], [1.0])
    # both assignments give statistic 1
    assert permutation_pvalue_exact(linear_gram(data), data.index, exact_plan()) == 1.0


def test_exact_p_two_pairs():
    data = dataset_1d([0.0, 0.0], [1.0, 1.0])
    # 6 partitions; only the observed one and its mirror reach the observed value
    p = permutation_pvalue_exact(linear_gram(data), data.index, exact_plan())
    assert p == pytest.approx(1.0 / 3.0)


def test_exact_p_constant_data():
    data = dataset_1d([2.0, 2.0], [2.0, 2.0])
    assert permutation_pvalue_exact(linear_gram(data), data.index, exact_plan()) == 1.0


def test_exact_p_other_statistic_kinds(rng):
    data = random_continuous(rng, K=2, max_n=4, d=1)
    G = gram_matrix(KernelSpec(ENERGY), data)
    for kind in (WEIGHTED_MAX_MMD, ECF):
        p = permutation_pvalue_exact(G, data.index, exact_plan(kind))
        assert 0.0 < p <= 1.0
    D = disco_gram(data, 1.0)
    p = permutation_pvalue_exact(D, data.index, exact_plan(DISCO))
    assert 0.0 < p <= 1.0


def test_plan_validation():
    with pytest.raises(ValidationError):
        PermutationPlan("haphazard")
    with pytest.raises(ValidationError):
        PermutationPlan(EXACT_ENUMERATION, "median")
    with pytest.raises(ValidationError):
        PermutationPlan(MONTE_CARLO, MAX_MMD)  # missing M and seed
    with pytest.raises(ValidationError):
        PermutationPlan(MONTE_CARLO, MAX_MMD, M=0, seed=1)


# -------------------------------------------------------------- Monte-Carlo p


def test_mc_p_on_grid(rng):
    data = random_continuous(rng, K=3, max_n=6, d=2)
    G = gram_matrix(KernelSpec(GAUSSIAN).resolve(data), data)
    M = 200
    p = permutation_pvalue_mc(G, data.index, M, 7, MAX_MMD)
    assert round(p * (M + 1)) == pytest.approx(p * (M + 1))
    assert 1.0 / (M + 1) <= p <= 1.0


def test_mc_p_minimal_for_separated_groups():
    rng = np.random.default_rng(8)
    low = rng.normal(0.0, 0.1, size=(8, 1))
    high = rng.normal(100.0, 0.1, size=(8, 1))
    data = validate_dataset(np.vstack([low, high]), [8, 8])
    G = gram_matrix(KernelSpec(ENERGY), data)
    M = 99
    # no draw among 99 of the 12870 partitions recreates the split
    p = permutation_pvalue_mc(G, data.index, M, 3, MAX_MMD)
    assert p == 1.0 / (M + 1)


def test_mc_p_constant_data():
    data = dataset_1d([5.0, 5.0], [5.0, 5.0])
    p = permutation_pvalue_mc(linear_gram(data), data.index, 50, 0, MAX_MMD)
    assert p == 1.0


def test_mc_p_deterministic(rng):
    data = random_continuous(rng, K=2, max_n=8, d=2)
    G = gram_matrix(KernelSpec(ENERGY), data)
    a = permutation_pvalue_mc(G, data.index, 300, 11, MAX_MMD)
    b = permutation_pvalue_mc(G, data.index, 300, 11, MAX_MMD)
    assert a == b
    c = permutation_pvalue_mc(G, data.index, 300, 12, MAX_MMD)
    # a different seed is allowed to move the estimate
    assert 0.0 < c <= 1.0


def test_mc_p_thread_count_invariant(rng, monkeypatch):
    data = random_continuous(rng, K=3, max_n=7, d=2)
    G = gram_matrix(KernelSpec(ENERGY), data)
    results = []
    for workers in ("1", "2", "5"):
        monkeypatch.setenv("KMAX_THREADS", workers)
        results.append(permutation_pvalue_mc(G, data.index, 400, 5, MAX_MMD))
    assert results[0] == results[1] == results[2]


def test_mc_close_to_exact_at_large_M():
    """Dvoretzky-Kiefer-Wolfowitz: the MC estimate settles near the exact p."""
    rng = np.random.default_rng(42)
    X = rng.normal(size=(8, 2))
    X[4:] += 0.8
    data = validate_dataset(X, [4, 4])
    G = gram_matrix(KernelSpec(ENERGY), data)
    p_exact = permutation_pvalue_exact(G, data.index, exact_plan())
    p_mc = permutation_pvalue_mc(G, data.index, 100_000, 1, MAX_MMD)
    assert abs(p_mc - p_exact) <= 0.01


# ------------------------------------------------------------- critical value


def test_critical_value_alpha_one_is_minimum(rng):
    data = random_continuous(rng, K=2, max_n=6, d=1)
    G = gram_matrix(KernelSpec(ENERGY), data)
    c = permutation_critical_value(G, data.index, 1.0, 40, 2, MAX_MMD)
    v, _ = max_mmd(G, data.index)
    assert c <= v


def test_critical_value_constant_statistic():
    data = dataset_1d([1.0, 1.0], [1.0, 1.0])
    G = linear_gram(data)
    with pytest.warns(UserWarning):
        c = permutation_critical_value(G, data.index, 0.01, 20, 0, MAX_MMD)
    v, _ = max_mmd(G, data.index)
    assert c == v


def test_critical_value_warns_when_M_too_small(rng):
    data = random_continuous(rng, K=2, max_n=5, d=1)
    G = gram_matrix(KernelSpec(ENERGY), data)
    with pytest.warns(UserWarning, match="1/alpha"):
        permutation_critical_value(G, data.index, 0.05, 10, 0, MAX_MMD)


@given(seed=st.integers(min_value=0, max_value=2_000))
@settings(max_examples=25, deadline=None)
def test_reject_by_critical_value_matches_pvalue(seed):
    rng = np.random.default_rng(seed)
    data = random_continuous(rng, K=2, max_n=8, d=2)
    G = gram_matrix(KernelSpec(ENERGY), data)
    M, alpha = 79, 0.1
    p = permutation_pvalue_mc(G, data.index, M, seed, MAX_MMD)
    c = permutation_critical_value(G, data.index, alpha, M, seed, MAX_MMD)
    v, _ = max_mmd(G, data.index)
    assert (p <= alpha) == (v > c)


# ----------------------------------------------------------------- invariants


def test_identity_permutation_reproduces_observed(rng):
    data = random_continuous(rng, K=3, max_n=8, d=2)
    G = gram_matrix(KernelSpec(GAUSSIAN).resolve(data), data)
    identity = np.arange(data.num_observations, dtype=np.intp)
    stat = permuted_statistic(G, data.index, identity, MAX_MMD)
    v, _ = max_mmd(G, data.index)
    assert stat == pytest.approx(v, rel=1e-12)


def test_null_level_is_controlled():
    """Exchangeable data: P(p <= alpha) stays near or below alpha."""
    alpha, reps = 0.05, 500
    hits = 0
    for r in range(reps):
        rng = np.random.default_rng([991, r])
        X = rng.normal(size=(20, 2))
        data = validate_dataset(X, [10, 10])
        G = gram_matrix(KernelSpec(ENERGY), data)
        p = permutation_pvalue_mc(G, data.index, 60, r, MAX_MMD)
        hits += p <= alpha
    se = np.sqrt(alpha * (1 - alpha) / reps)
    assert hits / reps <= alpha + 2 * se
