"""Analytic p-value bounds and thresholds for the permuted statistic.

Everything here is built from the squared feature distances
h~(i, j) = G[i][i] + G[j][j] - 2 G[i][j] of a Gram matrix:

* sigma_hat2: the pooled variance proxy (1/(N(N-1))) sum_{i != j} h~;
* sigma_K2: its K-sample generalization via a descending sort of all
  N(N-1) ordered-pair values, taking for every group pair the mean of
  the top (n_k+n_l)(n_k+n_l-1) values and then the max over pairs;
* closed-form p-value bounds for the balanced two-sample statistic
  (one from a concentration inequality on slices of the discrete cube,
  one from bounded differences), and rejection thresholds / tail bounds
  for the general K-sample statistic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .core import GroupIndex
from .errors import (
    MissingBoundError,
    SingletonDatasetError,
    TooFewGroupsError,
    UnbalancedGroupsError,
    ValidationError,
    ZeroVarianceError,
)
from .kernels import GramMatrix, tilde_h_matrix


def pair_gamma(nk: int, nl: int) -> float:
    """Sampling-fraction weight gamma_{k,l} = n_k n_l / (n_k + n_l)^2."""
    return nk * nl / (nk + nl) ** 2


@dataclass(frozen=True)
class VarianceProxy:
    """Variance proxies and pair weights for one grouped Gram matrix."""

    sigma2: float
    sigmaK2: float
    gamma: np.ndarray

    @classmethod
    def from_gram(cls, G: GramMatrix, idx: GroupIndex) -> "VarianceProxy":
        sizes = idx.sizes
        K = len(sizes)
        gamma = np.zeros((K, K))
        for k in range(K):
            for l in range(K):
                if k != l:
                    gamma[k, l] = pair_gamma(sizes[k], sizes[l])
        return cls(sigma_hat2(G), sigma_K2(G, idx), gamma)


def _ordered_pair_values(G: GramMatrix) -> Tuple[np.ndarray, int]:
    """All N(N-1) ordered-pair h~ values (unsorted) and their count."""
    T = tilde_h_matrix(G)
    N = T.shape[0]
    iu, ju = np.triu_indices(N, 1)
    vals = T[iu, ju]
    return np.repeat(vals, 2), N * (N - 1)


def sigma_hat2(G: GramMatrix) -> float:
    """Pooled variance proxy (1/(N(N-1))) sum over ordered pairs of h~."""
    N = G.size
    if N < 2:
        raise SingletonDatasetError(f"need at least two observations, got N={N}")
    T = tilde_h_matrix(G)
    return float(np.sum(T)) / (N * (N - 1))


def sigma_K2(G: GramMatrix, idx: GroupIndex, use_max_htilde: bool = False) -> float:
    """K-sample variance proxy from the sorted ordered-pair h~ values.

    Sort the N(N-1) ordered-pair values descending, average the top
    (n_k+n_l)(n_k+n_l-1) for every pair k < l, and take the max over
    pairs.  With ``use_max_htilde`` the whole procedure is replaced by
    the cheaper (larger) proxy max_{i != j} h~(i, j).
    """
    if idx.num_groups < 2:
        raise TooFewGroupsError(f"need K >= 2 groups, got K={idx.num_groups}")
    N = idx.total
    if N != G.size:
        raise ValidationError(
            f"group index covers {N} observations, Gram matrix has {G.size}"
        )
    if N < 2:
        raise SingletonDatasetError(f"need at least two observations, got N={N}")
    if use_max_htilde:
        return float(np.max(tilde_h_matrix(G)))

    total = N * (N - 1)
    sizes = idx.sizes
    counts = sorted(
        {
            (sizes[k] + sizes[l]) * (sizes[k] + sizes[l] - 1)
            for k in range(len(sizes))
            for l in range(k + 1, len(sizes))
        }
    )
    # top-means only depend on the pair through its count, so the max over
    # pairs is a max over distinct counts
    best = 0.0
    values, _ = _ordered_pair_values(G)
    desc: Optional[np.ndarray] = None
    for c in counts:
        if c >= total:
            # top slice covers every ordered pair: same mean as sigma_hat2,
            # computed through the identical unsorted summation
            mean = sigma_hat2(G)
        else:
            if desc is None:
                desc = np.sort(values)[::-1]
            mean = float(np.sum(desc[:c])) / c
        best = max(best, mean)
    return best


def p_bobkov(statistic: float, sigma2: float, N: int) -> float:
    """Closed-form p-value bound for the balanced two-sample statistic.

        p = exp{-(N/(32 sigma2)) (V - sqrt(2 sigma2 / N))^2}

    when the statistic clears the drift term sqrt(2 sigma2 / N), else 1.
    Only the balanced two-sample regime (N even) is supported.
    """
    if N < 2 or N % 2 != 0:
        raise UnbalancedGroupsError(
            f"bound holds for balanced two-sample data (even N >= 2), got N={N}"
        )
    if not sigma2 > 0:
        raise ZeroVarianceError(f"sigma2 must be positive, got {sigma2}")
    drift = math.sqrt(2.0 * sigma2 / N)
    if statistic < drift:
        return 1.0
    return math.exp(-(N / (32.0 * sigma2)) * (statistic - drift) ** 2)


def p_mcdiarmid(statistic: float, B: Optional[float], N: int) -> float:
    """Bounded-difference p-value bound for a kernel with 0 <= h <= B.

        p = exp{-(N/(8B)) (V - sqrt(32 B / N))^2}

    when the statistic clears sqrt(32 B / N), else 1.  B is the caller's
    asserted uniform bound; balanced two-sample regime only.
    """
    if B is None or not B > 0:
        raise MissingBoundError(f"need a positive uniform kernel bound B, got {B}")
    if N < 2 or N % 2 != 0:
        raise UnbalancedGroupsError(
            f"bound holds for balanced two-sample data (even N >= 2), got N={N}"
        )
    drift = math.sqrt(32.0 * B / N)
    if statistic < drift:
        return 1.0
    return math.exp(-(N / (8.0 * B)) * (statistic - drift) ** 2)


def _phi_terms(s2: float, ntot: int, gamma: float, log_ratio: float) -> Tuple[float, float]:
    t1 = math.sqrt(2.0 * s2 / (ntot * gamma * gamma) * log_ratio)
    t2 = math.sqrt(s2 / (2.0 * ntot * gamma))
    return t1, t2


def phi2_threshold(sigma2: float, n1: int, n2: int, alpha: float) -> float:
    """Rejection threshold of the two-sample analytic test.

        sqrt{(2 sigma2 / (N gamma^2)) log(1/alpha)} + sqrt{sigma2 / (2 N gamma)}

    with N = n1 + n2 and gamma = n1 n2 / N^2.  Rejecting when the
    statistic reaches the threshold gives a level-alpha test under
    exchangeability.
    """
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")
    if sigma2 < 0:
        raise ZeroVarianceError(f"sigma2 must be nonnegative, got {sigma2}")
    gamma = pair_gamma(n1, n2)
    t1, t2 = _phi_terms(sigma2, n1 + n2, gamma, math.log(1 / alpha))
    return t1 + t2


def phiK_threshold(sigmaK2: float, sizes: Sequence[int], alpha: float) -> float:
    """Rejection threshold of the K-sample analytic test.

    Max over pairs of the deviation term (with the Bonferroni-style
    log(C(K,2)/alpha) rate) plus max over pairs of the drift term.
    Reduces exactly to phi2_threshold when K = 2.
    """
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")
    if sigmaK2 < 0:
        raise ZeroVarianceError(f"sigmaK2 must be nonnegative, got {sigmaK2}")
    sizes = [int(n) for n in sizes]
    K = len(sizes)
    if K < 2:
        raise TooFewGroupsError(f"need K >= 2 groups, got K={K}")
    log_ratio = math.log(math.comb(K, 2) / alpha)
    t1max = 0.0
    t2max = 0.0
    for k in range(K):
        for l in range(k + 1, K):
            ntot = sizes[k] + sizes[l]
            gamma = pair_gamma(sizes[k], sizes[l])
            t1, t2 = _phi_terms(sigmaK2, ntot, gamma, log_ratio)
            t1max = max(t1max, t1)
            t2max = max(t2max, t2)
    return t1max + t2max


def ksample_tail_bound(t: float, sizes: Sequence[int], sigmaK2: float) -> float:
    """Upper bound on the permutation tail beyond the drift term.

        C(K,2) * exp{-min over pairs of (n_k+n_l) gamma_{k,l}^2 t^2 / (2 sigmaK2)}
    """
    if not t > 0:
        raise ValidationError(f"t must be positive, got {t}")
    if not sigmaK2 > 0:
        raise ZeroVarianceError(f"sigmaK2 must be positive, got {sigmaK2}")
    sizes = [int(n) for n in sizes]
    K = len(sizes)
    if K < 2:
        raise TooFewGroupsError(f"need K >= 2 groups, got K={K}")
    exponent = min(
        (sizes[k] + sizes[l]) * pair_gamma(sizes[k], sizes[l]) ** 2 * t * t
        / (2.0 * sigmaK2)
        for k in range(K)
        for l in range(k + 1, K)
    )
    return math.comb(K, 2) * math.exp(-exponent)


def phiK_drift(sigmaK2: float, sizes: Sequence[int]) -> float:
    """Max over pairs of the drift term sqrt{sigmaK2 / (2(n_k+n_l) gamma)}."""
    sizes = [int(n) for n in sizes]
    K = len(sizes)
    if K < 2:
        raise TooFewGroupsError(f"need K >= 2 groups, got K={K}")
    return max(
        math.sqrt(sigmaK2 / (2.0 * (sizes[k] + sizes[l]) * pair_gamma(sizes[k], sizes[l])))
        for k in range(K)
        for l in range(k + 1, K)
    )
