"""Average-type competitor statistics: DISCO and the ECF statistic.

DISCO is the between/within dispersion ratio built from alpha-power
Euclidean distances g(x, y) = ||x - y||^alpha'; the ECF statistic is a
weighted L2 distance between empirical characteristic functions, which
reduces to Gaussian-weight double sums with scale 4*alpha''.

Both statistics are plain functions of the block sums of their weight
matrices, so the permutation engine calibrates them with the same
machinery as the kernel statistics.  The weight matrices are wrapped in
GramMatrix containers (with ``kernel=None``).
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

from .core import CONTINUOUS, GroupedDataset
from .errors import DomainMismatchError, TooFewPointsError, ZeroWithinDispersionError
from .kernels import GramMatrix, _mirror
from .statistics import block_sums


def disco_gram(data: GroupedDataset, alpha_prime: float = 1.0) -> GramMatrix:
    """Matrix of pairwise distance powers ||Z_i - Z_j||^alpha'."""
    if not 0.0 < alpha_prime <= 2.0:
        raise DomainMismatchError(f"alpha_prime must lie in (0, 2], got {alpha_prime}")
    if data.domain != CONTINUOUS:
        raise DomainMismatchError("DISCO is defined on continuous data")
    D = cdist(data.observations, data.observations, "euclidean")
    if alpha_prime != 1.0:
        D **= alpha_prime
    return GramMatrix(_mirror(D))


def ecf_gram(data: GroupedDataset, alpha_pp: float = 1.5) -> GramMatrix:
    """Matrix of Gaussian weights exp(-||Z_i - Z_j||^2 / (4 alpha''))."""
    if not alpha_pp > 0:
        raise DomainMismatchError(f"alpha_pp must be positive, got {alpha_pp}")
    if data.domain != CONTINUOUS:
        raise DomainMismatchError("the ECF statistic is defined on continuous data")
    D2 = cdist(data.observations, data.observations, "sqeuclidean")
    W = np.exp(-D2 / (4.0 * alpha_pp))
    np.fill_diagonal(W, 1.0)
    return GramMatrix(_mirror(W))


def disco_from_sums(S: np.ndarray, sizes: np.ndarray) -> float:
    """DISCO ratio from block sums of the distance-power matrix.

    Degenerate zero within-dispersion is mapped to +inf (or 0 when the
    between part vanishes too) so the permutation engine can rank it;
    the user-facing disco_statistic raises instead.
    """
    sizes = np.asarray(sizes, dtype=np.float64)
    K = sizes.size
    N = sizes.sum()
    diag = np.diag(S)
    R = S / np.outer(sizes, sizes)
    d = np.diag(R)
    # E_{kl} = 2 S_kl/(n_k n_l) - S_kk/n_k^2 - S_ll/n_l^2
    E = 2.0 * R - d[:, None] - d[None, :]
    iu, ju = np.triu_indices(K, 1)
    S_between = float(np.sum(E[iu, ju])) / K
    W_within = 0.5 * float(np.sum(diag / sizes))
    if W_within <= 0.0:
        return float("inf") if S_between > 0.0 else 0.0
    return (S_between / (K - 1)) / (W_within / (N - K))


def ecf_from_sums(S: np.ndarray, sizes: np.ndarray) -> float:
    """ECF statistic from block sums of the Gaussian-weight matrix."""
    sizes = np.asarray(sizes, dtype=np.float64)
    N = sizes.sum()
    diag = np.diag(S)
    within = float(np.sum((N - sizes) / (N * sizes) * diag))
    cross = float(S.sum() - diag.sum())
    return within - cross / N


def disco_statistic(data: GroupedDataset, alpha_prime: float = 1.0) -> float:
    """Between/within dispersion ratio D of the pooled sample.

    With g(x, y) = ||x - y||^alpha', computes for every pair of groups

        E_{kl} = (2/(n_k n_l)) sum sum g - (1/n_k^2) sum sum g
                 - (1/n_l^2) sum sum g,

    (double sums unrestricted, diagonal terms included), averages them
    into the between-dispersion S = (1/K) sum_{k<l} E_{kl}, sets the
    within-dispersion W = (1/2) sum_k (1/n_k) sum sum g over group k,
    and returns D = (S/(K-1)) / (W/(N-K)).
    """
    N, K = data.num_observations, data.num_groups
    if N <= K:
        raise TooFewPointsError(f"DISCO needs N > K, got N={N}, K={K}")
    G = disco_gram(data, alpha_prime)
    bs = block_sums(G, data.index)
    sizes = np.asarray(bs.sizes, dtype=np.float64)
    diag = np.diag(bs.S)
    if not np.any(diag > 0.0):
        raise ZeroWithinDispersionError(
            "all points within every group are identical; DISCO undefined"
        )
    return disco_from_sums(bs.S, sizes)


def ecf_statistic(data: GroupedDataset, alpha_pp: float = 1.5) -> float:
    """Weighted L2 distance H between empirical characteristic functions.

        H = sum_k ((N - n_k)/(N n_k)) sum_{i1,i2 in k} w(X_i1, X_i2)
            - (1/N) sum_{k != l} sum_{i1 in k, i2 in l} w(X_i1, X_i2)

    with w(x, y) = exp(-||x - y||^2 / (4 alpha'')).
    """
    G = ecf_gram(data, alpha_pp)
    bs = block_sums(G, data.index)
    return ecf_from_sums(bs.S, np.asarray(bs.sizes, dtype=np.float64))
