"""Data generators, benchmark scenarios, and experiment harnesses.

Scenarios follow the sparse-alternative design: group 1 is drawn from a
perturbed distribution, groups 2..K from the base, so exactly one block
of pairwise discrepancies is active.  Every harness is a deterministic
function of its seed: replicate r derives its generator streams from
(seed, r, ...), so results are independent of scheduling and thread
count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from ._threads import run_chunked
from .asymptotic import (
    gumbel_asymptotic_pvalue,
    spectrum_chisquare,
    weighted_chisq_survival_mc,
)
from .baselines import disco_gram, ecf_gram
from .concentration import p_bobkov, p_mcdiarmid, sigma_hat2
from .core import GroupedDataset, validate_dataset
from .errors import DegenerateSupportError, UnknownScenarioError, ValidationError
from .kernels import ENERGY, GAUSSIAN, LINEAR, KernelSpec, gram_matrix
from .permutation import DISCO, ECF, MAX_MMD, permutation_pvalue_mc
from .statistics import max_mmd

NORMAL_LOCATION = "normal_location"
NORMAL_SCALE = "normal_scale"
LAPLACE_LOCATION = "laplace_location"
LAPLACE_SCALE = "laplace_scale"
NULL_UNIFORMITY = "null_uniformity"

SCENARIOS = (
    NORMAL_LOCATION,
    NORMAL_SCALE,
    LAPLACE_LOCATION,
    LAPLACE_SCALE,
    NULL_UNIFORMITY,
)

MAX_GAUSSIAN = "max_gaussian"
MAX_ENERGY = "max_energy"
POWER_METHODS = (MAX_GAUSSIAN, MAX_ENERGY, DISCO, ECF)

DEFAULT_ALPHA_PRIME = 1.0
DEFAULT_ALPHA_PP = 1.5

TRUNCNORM_MU = (1.0, -1.0)
TRUNCNORM_SUPPORT = (-5.0, 5.0)
PINNED_BOUND_B = {ENERGY: 10.0, LINEAR: 100.0}


@dataclass(frozen=True)
class ScenarioSpec:
    """One benchmark configuration: scenario name, K, per-group n, d."""

    name: str
    K: int
    n: int
    d: int
    seed: int = 0

    def __post_init__(self):
        if self.name not in SCENARIOS:
            raise UnknownScenarioError(
                f"unknown scenario {self.name!r}; expected one of {SCENARIOS}"
            )
        if self.K < 2 or self.n < 2 or self.d < 1:
            raise ValidationError(
                f"need K >= 2, n >= 2, d >= 1; got K={self.K}, n={self.n}, d={self.d}"
            )


@dataclass(frozen=True)
class PowerEstimate:
    """Monte-Carlo power of one method on one scenario."""

    method: str
    power: float
    reps: int
    mc_se: float
    scenario: Optional[str] = None
    K: Optional[int] = None
    n: Optional[int] = None
    d: Optional[int] = None
    seed: Optional[int] = None


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _derive_int(*entropy: int) -> int:
    return int(np.random.SeedSequence(list(entropy)).generate_state(1)[0])


def gen_mvn(n: int, mean, cov_scale: float, d: int, seed) -> np.ndarray:
    """n draws from N(mean, cov_scale * I_d)."""
    if not cov_scale > 0:
        raise ValidationError(f"cov_scale must be positive, got {cov_scale}")
    rng = _rng(seed)
    mu = np.broadcast_to(np.asarray(mean, dtype=np.float64), (d,))
    return mu + math.sqrt(cov_scale) * rng.standard_normal((n, d))


def gen_mv_laplace(
    n: int, mean, cov_scale: float, d: int, seed, elliptical: bool = False
) -> np.ndarray:
    """n draws with Laplace marginals, covariance cov_scale * I_d.

    The default has independent Laplace coordinates with scale
    b = sqrt(cov_scale / 2).  ``elliptical`` switches to the symmetric
    elliptical construction (a normal vector scaled by the square root
    of an independent exponential), which matches the same mean and
    covariance but is not coordinate-independent.
    """
    if not cov_scale > 0:
        raise ValidationError(f"cov_scale must be positive, got {cov_scale}")
    rng = _rng(seed)
    mu = np.broadcast_to(np.asarray(mean, dtype=np.float64), (d,))
    if elliptical:
        w = rng.exponential(1.0, size=(n, 1))
        z = rng.standard_normal((n, d))
        return mu + np.sqrt(cov_scale * w) * z
    return rng.laplace(loc=mu, scale=math.sqrt(cov_scale / 2.0), size=(n, d))


def gen_truncnorm(
    n: int, mu: float, sigma2: float, support: Tuple[float, float], seed
) -> np.ndarray:
    """n draws from N(mu, sigma2) conditioned on [a, b], by rejection.

    The truncation interval must be nonempty and carry nonnegligible
    mass under the untruncated normal.
    """
    a, b = float(support[0]), float(support[1])
    if not a < b:
        raise DegenerateSupportError(f"need a < b, got support [{a}, {b}]")
    if not sigma2 > 0:
        raise ValidationError(f"sigma2 must be positive, got {sigma2}")
    sd = math.sqrt(sigma2)
    from scipy.stats import norm

    mass = norm.cdf(b, loc=mu, scale=sd) - norm.cdf(a, loc=mu, scale=sd)
    if mass < 1e-12:
        raise DegenerateSupportError(
            f"interval [{a}, {b}] carries no mass under N({mu}, {sigma2})"
        )
    rng = _rng(seed)
    out = np.empty(n)
    have = 0
    while have < n:
        batch = max(64, int((n - have) / max(mass, 1e-3) * 1.2))
        draws = mu + sd * rng.standard_normal(batch)
        keep = draws[(draws >= a) & (draws <= b)]
        take = min(keep.size, n - have)
        out[have : have + take] = keep[:take]
        have += take
    return out


def make_scenario(spec: ScenarioSpec) -> GroupedDataset:
    """Generate one dataset: group 1 perturbed, groups 2..K from the base.

    (a) normal_location: N(1_d, I_d) vs N(0, I_d)
    (b) normal_scale:    N(0, 3 I_d) vs N(0, I_d)
    (c) laplace_location: L(1.2 * 1_d, I_d) vs L(0, I_d)
    (d) laplace_scale:   L(0, 3 I_d) vs L(0, I_d)
    null_uniformity:     all groups N(0, I_d)

    Group k draws from a stream seeded by (spec.seed, k).
    """
    n, d, K = spec.n, spec.d, spec.K
    zeros = np.zeros(d)
    groups: List[np.ndarray] = []
    for k in range(K):
        seed_k = [spec.seed, k]
        first = k == 0
        if spec.name == NORMAL_LOCATION:
            mean = np.ones(d) if first else zeros
            groups.append(gen_mvn(n, mean, 1.0, d, seed_k))
        elif spec.name == NORMAL_SCALE:
            scale = 3.0 if first else 1.0
            groups.append(gen_mvn(n, zeros, scale, d, seed_k))
        elif spec.name == LAPLACE_LOCATION:
            mean = 1.2 * np.ones(d) if first else zeros
            groups.append(gen_mv_laplace(n, mean, 1.0, d, seed_k))
        elif spec.name == LAPLACE_SCALE:
            scale = 3.0 if first else 1.0
            groups.append(gen_mv_laplace(n, zeros, scale, d, seed_k))
        elif spec.name == NULL_UNIFORMITY:
            groups.append(gen_mvn(n, zeros, 1.0, d, seed_k))
        else:  # unreachable after ScenarioSpec validation
            raise UnknownScenarioError(spec.name)
    return validate_dataset(np.concatenate(groups, axis=0), [n] * K)


def _method_pvalue(data: GroupedDataset, method: str, M: int, perm_seed: int) -> float:
    if method == MAX_GAUSSIAN:
        G = gram_matrix(KernelSpec(GAUSSIAN), data)
        kind = MAX_MMD
    elif method == MAX_ENERGY:
        G = gram_matrix(KernelSpec(ENERGY), data)
        kind = MAX_MMD
    elif method == DISCO:
        G = disco_gram(data, DEFAULT_ALPHA_PRIME)
        kind = DISCO
    elif method == ECF:
        G = ecf_gram(data, DEFAULT_ALPHA_PP)
        kind = ECF
    else:
        raise ValidationError(
            f"unknown power method {method!r}; expected one of {POWER_METHODS}"
        )
    return permutation_pvalue_mc(G, data.index, M, perm_seed, kind)


def estimate_power(
    spec: ScenarioSpec,
    method: str,
    M: int = 200,
    alpha: float = 0.05,
    reps: int = 200,
    seed: int = 0,
) -> PowerEstimate:
    """Monte-Carlo power: fraction of replicates with p <= alpha.

    Replicate r regenerates the scenario data with a seed derived from
    (seed, r, 0) and calibrates with M permutations from (seed, r, 1);
    the Gaussian bandwidth is re-resolved per replicate.  Identical
    seeds share identical data across methods, which makes power
    comparisons paired.
    """
    if reps < 1:
        raise ValidationError(f"reps must be positive, got {reps}")

    def chunk(start: int, stop: int) -> int:
        rejections = 0
        for r in range(start, stop):
            data = make_scenario(
                ScenarioSpec(spec.name, spec.K, spec.n, spec.d, _derive_int(seed, r, 0))
            )
            p = _method_pvalue(data, method, M, _derive_int(seed, r, 1))
            if p <= alpha:
                rejections += 1
        return rejections

    hits = sum(run_chunked(reps, chunk))
    power = hits / reps
    return PowerEstimate(
        method=method,
        power=power,
        reps=reps,
        mc_se=math.sqrt(power * (1.0 - power) / reps),
        scenario=spec.name,
        K=spec.K,
        n=spec.n,
        d=spec.d,
        seed=seed,
    )


def _truncnorm_group(n: int, d: int, mu: float, seed_entropy: List[int]) -> np.ndarray:
    cols = [
        gen_truncnorm(n, mu, 1.0, TRUNCNORM_SUPPORT, seed_entropy + [j]) for j in range(d)
    ]
    return np.column_stack(cols)


def pvalue_comparison_experiment(
    N_grid: Sequence[int],
    kernel: str,
    reps: int = 200,
    seed: int = 0,
    d: int = 1,
    bound_B: Optional[float] = None,
) -> List[Dict[str, float]]:
    """Compare the two closed-form p-value bounds on truncated normals.

    For each even N, draws N/2 points from a truncated N(1, 1) and N/2
    from a truncated N(-1, 1) on [-5, 5], computes the two-sample max
    statistic and sigma^2 under the chosen kernel (energy or linear),
    and averages p-values over replicates.  B defaults to the pinned
    experiment values (10 for energy, 100 for linear).
    """
    if kernel not in (ENERGY, LINEAR):
        raise ValidationError(f"kernel must be energy_distance or linear, got {kernel!r}")
    B = PINNED_BOUND_B[kernel] if bound_B is None else float(bound_B)
    spec = KernelSpec(kernel)
    rows: List[Dict[str, float]] = []
    for N in N_grid:
        N = int(N)
        if N < 4 or N % 2 != 0:
            raise ValidationError(f"N must be even and >= 4, got {N}")
        n = N // 2

        def chunk(start: int, stop: int) -> np.ndarray:
            acc = np.zeros(5)  # sigma2, p_b, p_m, log p_b, log p_m
            for r in range(start, stop):
                X = _truncnorm_group(n, d, TRUNCNORM_MU[0], [seed, N, r, 0])
                Y = _truncnorm_group(n, d, TRUNCNORM_MU[1], [seed, N, r, 1])
                data = validate_dataset(np.concatenate([X, Y]), [n, n])
                G = gram_matrix(spec, data)
                stat, _ = max_mmd(G, data.index)
                s2 = sigma_hat2(G)
                pb = p_bobkov(stat, s2, N)
                pm = p_mcdiarmid(stat, B, N)
                acc += (s2, pb, pm, math.log(pb), math.log(pm))
            return acc

        totals = np.sum(run_chunked(reps, chunk), axis=0)
        rows.append(
            {
                "N": N,
                "kernel": kernel,
                "bound_B": B,
                "reps": reps,
                "seed": seed,
                "mean_sigma2": totals[0] / reps,
                "mean_p_bobkov": totals[1] / reps,
                "mean_p_mcdiarmid": totals[2] / reps,
                "mean_log_p_bobkov": totals[3] / reps,
                "mean_log_p_mcdiarmid": totals[4] / reps,
            }
        )
    return rows


def chisquare_pair_stat_from_counts(
    counts1: np.ndarray, counts2: np.ndarray, probs: np.ndarray
) -> float:
    """Two-sample V^2 under the chi-square kernel, from level counts.

    Equals sum_v (c1_v/n1 - c2_v/n2)^2 / p_v, the count form of the
    Gram-based statistic (verified against it in the test suite).
    """
    c1 = np.asarray(counts1, dtype=np.float64)
    c2 = np.asarray(counts2, dtype=np.float64)
    diff = c1 / c1.sum() - c2 / c2.sum()
    return float(np.sum(diff * diff / np.asarray(probs, dtype=np.float64)))


def _uniform_counts(rng: np.random.Generator, m: int, n: int) -> np.ndarray:
    return np.bincount(rng.integers(1, m + 1, size=n), minlength=m + 1)[1:]


def tail_ratio_experiment(
    m: int,
    n: int,
    x_grid: Sequence[float],
    reps: int = 10_000,
    seed: int = 0,
    denominator_nsim: int = 1_000_000,
) -> List[Dict[str, float]]:
    """Empirical-to-limit tail ratio of the scaled two-sample statistic.

    Simulates two groups of n uniform draws over m levels, forms
    T = n1 n2 V^2 / N under the chi-square kernel with uniform reference
    probabilities, and for each x reports the ratio of the empirical
    P(T >= x) to the Monte-Carlo weighted chi-square limit tail with
    m - 1 unit eigenvalues.
    """
    if m < 2 or n < 2:
        raise ValidationError(f"need m >= 2 and n >= 2, got m={m}, n={n}")
    probs = np.full(m, 1.0 / m)

    def chunk(start: int, stop: int) -> np.ndarray:
        stats = np.empty(stop - start)
        for r in range(start, stop):
            rng = np.random.default_rng([seed, r])
            c1 = _uniform_counts(rng, m, n)
            c2 = _uniform_counts(rng, m, n)
            v2 = chisquare_pair_stat_from_counts(c1, c2, probs)
            stats[r - start] = (n * n / (2.0 * n)) * v2
        return stats

    T = np.concatenate(run_chunked(reps, chunk))
    lam = np.ones(m - 1)
    rows: List[Dict[str, float]] = []
    for j, x in enumerate(x_grid):
        x = float(x)
        numerator = float(np.mean(T >= x))
        denom, denom_se = weighted_chisq_survival_mc(
            lam, x, denominator_nsim, _derive_int(seed, 10_000_019, j)
        )
        rows.append(
            {
                "x": x,
                "empirical_tail": numerator,
                "limit_tail": denom,
                "limit_tail_se": denom_se,
                "ratio": numerator / denom,
                "reps": reps,
                "m": m,
                "n": n,
                "seed": seed,
            }
        )
    return rows


def chisquare_null_gumbel_rejection(
    m: int,
    n: int,
    K: int,
    reps: int,
    alpha: float = 0.05,
    seed: int = 0,
) -> float:
    """Rejection rate of the asymptotic Gumbel test on uniform null data.

    Each replicate draws K groups of n uniform levels over {1, ..., m},
    computes the max pairwise V^2 under the chi-square kernel (count
    form), and applies the asymptotic p-value with the exact spectrum of
    m - 1 unit eigenvalues.
    """
    spec = spectrum_chisquare(np.full(m, 1.0 / m))
    sqrt_p = np.sqrt(np.full(m, 1.0 / m))

    def chunk(start: int, stop: int) -> int:
        rejections = 0
        for r in range(start, stop):
            rng = np.random.default_rng([seed, r])
            counts = np.stack([_uniform_counts(rng, m, n) for _ in range(K)])
            A = counts / n / sqrt_p  # rows: normalized frequency vectors
            V2 = cdist(A, A, "sqeuclidean")
            stat_max2 = float(np.max(V2))
            p = gumbel_asymptotic_pvalue(stat_max2, n, K, spec)
            if p <= alpha:
                rejections += 1
        return rejections

    hits = sum(run_chunked(reps, chunk))
    return hits / reps
