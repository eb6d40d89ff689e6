"""Pairwise MMD V-statistics and the max-type K-sample statistic.

Everything is computed from Gram block sums: for groups k, l with sizes
n_k, n_l,

    V^2_{kl} = S[k][k]/n_k^2 + S[l][l]/n_l^2 - 2 S[k][l]/(n_k n_l),

where S[k][l] is the sum of Gram entries over the (k, l) block.  The
max statistic is max_{k<l} sqrt(V^2_{kl}); the weighted variant scales
each squared term by n_k n_l / (n_k + n_l) before taking the max.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .core import GroupIndex
from .errors import (
    DimensionMismatchError,
    IndexOutOfRangeError,
    SameGroupError,
    TooFewGroupsError,
)
from .kernels import GramMatrix, KernelSpec, kernel_eval


@dataclass(frozen=True)
class BlockSums:
    """Per-block sums S[k][l] = sum_{i in k} sum_{j in l} G[i][j]."""

    S: np.ndarray
    sizes: Tuple[int, ...]

    def __post_init__(self):
        S = np.ascontiguousarray(self.S, dtype=np.float64)
        K = len(self.sizes)
        if S.shape != (K, K):
            raise DimensionMismatchError(
                f"block-sum matrix shape {S.shape} disagrees with {K} groups"
            )
        S.flags.writeable = False
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))


def _canonical_block_sum(block: np.ndarray) -> float:
    # Sorting first makes the sum a function of the entry multiset alone,
    # so reordering observations within a group cannot change the result.
    flat = np.sort(block, axis=None)
    return float(np.sum(flat))


def block_sums(G: GramMatrix, idx: GroupIndex) -> BlockSums:
    """Sum Gram entries over every (k, l) block of the group index.

    Each block is summed in a canonical (sorted) order, so the result is
    invariant under reordering of observations within groups.  The grand
    sum of S equals the grand sum of G up to that reordering exactly.
    """
    V = G.values
    if idx.total != V.shape[0]:
        raise IndexOutOfRangeError(
            f"group index covers {idx.total} observations, Gram matrix has {V.shape[0]}"
        )
    K = idx.num_groups
    S = np.empty((K, K))
    for k in range(K):
        bk = idx.block(k)
        S[k, k] = _canonical_block_sum(V[bk, bk])
        for l in range(k + 1, K):
            s = _canonical_block_sum(V[bk, idx.block(l)])
            S[k, l] = s
            S[l, k] = s
    return BlockSums(S, idx.sizes)


def mmd_squared_pair(S: BlockSums, k: int, l: int) -> float:
    """V-statistic V^2_{kl} for one group pair, clamped at 0."""
    K = len(S.sizes)
    if not (0 <= k < K and 0 <= l < K):
        raise IndexOutOfRangeError(f"group pair ({k}, {l}) out of range for K={K}")
    if k == l:
        raise SameGroupError(f"need two distinct groups, got ({k}, {l})")
    nk, nl = S.sizes[k], S.sizes[l]
    v2 = S.S[k, k] / nk**2 + S.S[l, l] / nl**2 - 2.0 * S.S[k, l] / (nk * nl)
    return max(0.0, float(v2))


def _pair_matrix(S: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    """All V^2_{kl} values as a K x K matrix (diagonal meaningless)."""
    R = S / np.outer(sizes, sizes)
    d = np.diag(R)
    V2 = d[:, None] + d[None, :] - 2.0 * R
    return np.maximum(V2, 0.0)


def _max_from_sums(S: np.ndarray, sizes: np.ndarray) -> Tuple[float, Tuple[int, int]]:
    K = sizes.size
    V2 = _pair_matrix(S, sizes)
    iu, ju = np.triu_indices(K, 1)
    vals = V2[iu, ju]
    # row-major traversal of the upper triangle, so the first maximum is
    # the lexicographically smallest pair
    pos = int(np.argmax(vals))
    return float(np.sqrt(vals[pos])), (int(iu[pos]), int(ju[pos]))


def _weighted_from_sums(S: np.ndarray, sizes: np.ndarray) -> float:
    K = sizes.size
    V2 = _pair_matrix(S, sizes)
    w = np.outer(sizes, sizes) / np.add.outer(sizes, sizes)
    iu, ju = np.triu_indices(K, 1)
    return float(np.max(w[iu, ju] * V2[iu, ju]))


def max_mmd(G: GramMatrix, idx: GroupIndex) -> Tuple[float, Tuple[int, int]]:
    """Max over group pairs of the pairwise MMD, with its argmax pair.

    Returns (value, (k, l)) where value = max_{k<l} sqrt(V^2_{kl}) and
    (k, l) is the lexicographically smallest maximizing pair, 0-based.
    """
    if idx.num_groups < 2:
        raise TooFewGroupsError(f"need K >= 2 groups, got K={idx.num_groups}")
    bs = block_sums(G, idx)
    return _max_from_sums(bs.S, np.asarray(bs.sizes, dtype=np.float64))


def weighted_max_mmd(G: GramMatrix, idx: GroupIndex) -> float:
    """Max over pairs of (n_k n_l / (n_k + n_l)) * V^2_{kl}."""
    if idx.num_groups < 2:
        raise TooFewGroupsError(f"need K >= 2 groups, got K={idx.num_groups}")
    bs = block_sums(G, idx)
    return _weighted_from_sums(bs.S, np.asarray(bs.sizes, dtype=np.float64))


def mmd_bruteforce_oracle(spec: KernelSpec, X, Y) -> float:
    """Two-sample MMD by direct double sums, term by term.

    Slow reference implementation used to validate the Gram-based path:
    evaluates the kernel on every pair without any matrix reuse.
    """
    X = list(X)
    Y = list(Y)
    if len(X) == 0 or len(Y) == 0:
        raise SameGroupError("both samples must be nonempty")
    sxx = 0.0
    for a in X:
        for b in X:
            sxx += kernel_eval(spec, a, b)
    syy = 0.0
    for a in Y:
        for b in Y:
            syy += kernel_eval(spec, a, b)
    sxy = 0.0
    for a in X:
        for b in Y:
            sxy += kernel_eval(spec, a, b)
    v2 = sxx / len(X) ** 2 + syy / len(Y) ** 2 - 2.0 * sxy / (len(X) * len(Y))
    return float(np.sqrt(max(0.0, v2)))
