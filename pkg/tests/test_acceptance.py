"""End-to-end checks of the package's numerical guarantees.

Each test states one guarantee and runs it at the tolerance it is
promised at.  They drive full experiments rather than single functions,
so this module is the slow part of the suite; run it with ``-v`` to get
one pass/fail line per guarantee.
"""

import json
import math

import numpy as np
import pytest
from scipy import stats

from kmax import (
    DISCRETE,
    KernelSpec,
    ScenarioSpec,
    block_sums,
    disco_gram,
    estimate_power,
    from_groups,
    gram_matrix,
    gumbel_limit_cdf,
    max_mmd,
    mmd_bruteforce_oracle,
    mmd_squared_pair,
    permutation_pvalue_exact,
    pvalue_comparison_experiment,
    sigma_K2,
    sigma_hat2,
    spectrum_from_lambdas,
    tail_ratio_experiment,
    validate_dataset,
)
from kmax.cli import main
from kmax.concentration import p_bobkov
from kmax.kernels import CHI_SQUARE, ENERGY, GAUSSIAN, LINEAR, MEDIAN_HEURISTIC
from kmax.permutation import EXACT_ENUMERATION, PermutationPlan
from kmax.simulation import (
    MAX_ENERGY,
    MAX_GAUSSIAN,
    POWER_METHODS,
    chisquare_null_gumbel_rejection,
)

pytestmark = pytest.mark.acceptance


def _continuous_pair(rng):
    n1, n2 = rng.integers(2, 21, size=2)
    d = int(rng.integers(1, 6))
    X = rng.normal(0.0, 1.0, size=(int(n1), d))
    Y = rng.normal(rng.uniform(-1.0, 1.0), 1.0, size=(int(n2), d))
    return X, Y


def test_gram_path_matches_bruteforce_oracle():
    """Block-sum pairwise MMD agrees with the direct double-sum oracle."""
    continuous = (
        KernelSpec(GAUSSIAN, bandwidth=MEDIAN_HEURISTIC),
        KernelSpec(ENERGY),
        KernelSpec(LINEAR),
    )
    checked = 0
    for i in range(75):
        rng = np.random.default_rng([101, i])
        X, Y = _continuous_pair(rng)
        data = from_groups([X, Y])
        spec = continuous[i % 3].resolve(data)
        G = gram_matrix(spec, data)
        fast = math.sqrt(max(0.0, mmd_squared_pair(block_sums(G, data.index), 0, 1)))
        slow = mmd_bruteforce_oracle(spec, X, Y)
        assert fast == pytest.approx(slow, rel=1e-9, abs=1e-12)
        checked += 1
    for i in range(25):
        rng = np.random.default_rng([102, i])
        m = int(rng.integers(2, 6))
        n1, n2 = (int(v) for v in rng.integers(2, 21, size=2))
        levels = rng.integers(1, m + 1, size=n1 + n2)
        data = validate_dataset(levels, [n1, n2], domain=DISCRETE, num_levels=m)
        spec = KernelSpec(CHI_SQUARE, probs=np.full(m, 1.0 / m))
        G = gram_matrix(spec, data)
        fast = math.sqrt(max(0.0, mmd_squared_pair(block_sums(G, data.index), 0, 1)))
        slow = mmd_bruteforce_oracle(spec, levels[:n1], levels[n1:])
        assert fast == pytest.approx(slow, rel=1e-9, abs=1e-12)
        checked += 1
    assert checked == 100


def test_energy_kernel_doubles_into_between_group_dispersion():
    """Twice the energy-kernel squared pair MMD equals the alpha=1
    between-group dispersion term built from pairwise distances."""
    for i in range(100):
        rng = np.random.default_rng([103, i])
        X, Y = _continuous_pair(rng)
        data = from_groups([X, Y])
        G = gram_matrix(KernelSpec(ENERGY), data)
        v2 = mmd_squared_pair(block_sums(G, data.index), 0, 1)

        D = disco_gram(data, alpha_prime=1.0)
        S = block_sums(D, data.index).S
        n1, n2 = data.index.sizes
        e_between = 2.0 * S[0, 1] / (n1 * n2) - S[0, 0] / n1**2 - S[1, 1] / n2**2
        assert 2.0 * v2 == pytest.approx(e_between, rel=1e-9, abs=1e-12)


def test_group_variance_proxy_hand_value_and_two_group_collapse():
    """The sorted-top-average variance proxy hits its hand-enumerated
    value and reduces bit-exactly to the pooled proxy when K=2."""
    data = from_groups([[[0.0]], [[1.0]], [[2.0]]])
    G = gram_matrix(KernelSpec(LINEAR), data)
    assert sigma_K2(G, data.index) == 4.0

    for i in range(50):
        rng = np.random.default_rng([104, i])
        X, Y = _continuous_pair(rng)
        data = from_groups([X, Y])
        spec = KernelSpec(GAUSSIAN, bandwidth=MEDIAN_HEURISTIC).resolve(data)
        G = gram_matrix(spec, data)
        assert sigma_K2(G, data.index) == sigma_hat2(G)


def test_monte_carlo_permutation_holds_level_on_null_data():
    """Null rejection rate stays within two standard errors of alpha."""
    est = estimate_power(
        ScenarioSpec("null_uniformity", 5, 10, 5, 0),
        MAX_GAUSSIAN,
        M=200,
        alpha=0.05,
        reps=500,
        seed=0,
    )
    assert est.power <= 0.05 + 2.0 * math.sqrt(0.05 * 0.95 / 500)


def test_exhaustive_permutation_pvalue_never_exceeds_closed_form_bound():
    """On every small balanced two-sample instance the enumerated
    p-value sits at or below the concentration-bound p-value."""
    families = (
        KernelSpec(GAUSSIAN, bandwidth=MEDIAN_HEURISTIC),
        KernelSpec(ENERGY),
        KernelSpec(LINEAR),
    )
    plan = PermutationPlan(EXACT_ENUMERATION)
    for i in range(50):
        rng = np.random.default_rng([105, i])
        n = int(rng.integers(2, 5))
        d = int(rng.integers(1, 4))
        X = rng.normal(0.0, 1.0, size=(n, d))
        Y = rng.normal(rng.uniform(0.0, 3.0), 1.0, size=(n, d))
        data = from_groups([X, Y])
        spec = families[i % 3].resolve(data)
        G = gram_matrix(spec, data)
        stat, _ = max_mmd(G, data.index)
        p_exact = permutation_pvalue_exact(G, data.index, plan)
        assert p_exact <= p_bobkov(stat, sigma_hat2(G), data.index.total)


def test_closed_form_bound_comparison_grid():
    """Across the sample-size grid the pooled variance proxy stays in
    its expected band for both kernels and the variance-adaptive bound
    beats the worst-case bound on every row."""
    grid = list(range(100, 1001, 100))
    for kernel, lo, hi, pinned_B in (
        (ENERGY, 1.45, 1.80, 10.0),
        (LINEAR, 3.6, 4.4, 100.0),
    ):
        rows = pvalue_comparison_experiment(grid, kernel, reps=200, seed=0)
        assert [row["N"] for row in rows] == grid
        for row in rows:
            assert row["bound_B"] == pinned_B
            assert lo <= row["mean_sigma2"] <= hi
            assert row["mean_log_p_bobkov"] < row["mean_log_p_mcdiarmid"]


def test_power_grid_orders_methods_as_group_count_grows():
    """Max-type statistics keep high power on sparse location shifts at
    every group count, while the pooled baselines decay with K and fall
    below the max-energy statistic at the largest K."""
    scenarios = ("normal_location", "normal_scale", "laplace_location", "laplace_scale")
    Ks = (2, 20, 40)
    power = {}
    for scenario in scenarios:
        for K in Ks:
            for method in POWER_METHODS:
                est = estimate_power(
                    ScenarioSpec(scenario, K, 10, 5, 0),
                    method,
                    M=200,
                    alpha=0.05,
                    reps=200,
                    seed=0,
                )
                power[(scenario, K, method)] = est.power

    for scenario in ("normal_location", "laplace_location"):
        for K in Ks:
            assert power[(scenario, K, MAX_GAUSSIAN)] >= 0.85
            assert power[(scenario, K, MAX_ENERGY)] >= 0.85

    # 0.05 slack absorbs Monte-Carlo noise in the monotonicity check
    for scenario in scenarios:
        for method in ("disco", "ecf"):
            curve = [power[(scenario, K, method)] for K in Ks]
            assert curve[1] <= curve[0] + 0.05
            assert curve[2] <= curve[1] + 0.05
            assert power[(scenario, 40, method)] < power[(scenario, 40, MAX_ENERGY)]


def test_gumbel_limit_spot_values_and_null_rejection_band():
    """The limit CDF matches its two closed-form spot values and the
    asymptotic test's null rejection rate lands in the expected band."""
    one = spectrum_from_lambdas([1.0])
    two = spectrum_from_lambdas([1.0, 1.0])
    assert gumbel_limit_cdf(0.0, one) == pytest.approx(0.81916, abs=5e-6)
    assert gumbel_limit_cdf(0.0, two) == pytest.approx(0.60653, abs=5e-6)

    rate = chisquare_null_gumbel_rejection(2, 500, 50, reps=300, alpha=0.05, seed=0)
    assert 0.01 <= rate <= 0.12


def test_scaled_pair_statistic_tail_tracks_its_limit():
    """The empirical-to-limit tail ratio stays near 1 in the upper tail
    and tightens as the per-group sample size grows."""
    quantiles = (0.8, 0.85, 0.9, 0.95)
    xs = [float(stats.chi2.ppf(q, 1)) for q in quantiles]
    kwargs = dict(reps=10_000, seed=0, denominator_nsim=1_000_000)
    big = [row["ratio"] for row in tail_ratio_experiment(2, 500, xs, **kwargs)]
    small = [row["ratio"] for row in tail_ratio_experiment(2, 100, xs, **kwargs)]

    assert 0.8 <= big[quantiles.index(0.9)] <= 1.25
    assert sum(abs(r - 1.0) for r in big) < sum(abs(r - 1.0) for r in small)


def test_cli_reports_are_byte_identical_across_runs_and_threads(tmp_path, monkeypatch):
    """Identical flags give identical bytes no matter the thread cap."""
    commands = {
        "test.json": [
            "test", "--scenario", "normal_scale", "--K", "3", "--n", "10",
            "--d", "3", "--kernel", "energy", "--method", "mc", "--M", "80",
            "--seed", "11",
        ],
        "power.csv": [
            "power", "--scenario", "normal_location", "--K", "2,20", "--n", "8",
            "--d", "2", "--methods", "max_energy,ecf", "--M", "40", "--reps", "20",
            "--seed", "5",
        ],
        "tail.csv": [
            "tailratio", "--m", "2", "--n", "60", "--x", "1.0,2.706",
            "--reps", "500", "--denominator-nsim", "10000", "--seed", "9",
        ],
    }
    outputs = {}
    for workers in ("1", "4"):
        monkeypatch.setenv("KMAX_THREADS", workers)
        for name, argv in commands.items():
            out = tmp_path / f"{workers}-{name}"
            assert main(argv + ["--out", str(out)]) == 0
            outputs.setdefault(name, []).append(out.read_bytes())
    for name, (first, second) in outputs.items():
        assert first == second, name
    rec = json.loads(outputs["test.json"][0])
    assert 0.0 < rec["p_value"] <= 1.0
