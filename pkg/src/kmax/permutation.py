"""Permutation calibration: exact enumeration and Monte-Carlo sampling.

The permuted statistic is always computed from Gram block sums under a
permuted index vector, so the kernel is never re-evaluated.  For a
permutation pi, block (k, l) sums G[pi[i], pi[j]] over the contiguous
index ranges of groups k and l; np.add.reduceat does one O(N^2) pass
per axis, after which any supported statistic costs O(K^2).

Monte-Carlo permutation i draws its shuffle from a generator seeded by
(seed, i), so results are bit-identical regardless of how replicates
are scheduled across threads.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from .baselines import disco_from_sums, ecf_from_sums
from .core import GroupIndex
from .errors import EnumerationTooLargeError, IndexOutOfRangeError, ValidationError
from .kernels import GramMatrix
from .statistics import _max_from_sums, _weighted_from_sums

EXACT_ENUMERATION = "exact_enumeration"
MONTE_CARLO = "monte_carlo"
EXACT_CAP = 1_000_000

MAX_MMD = "max_mmd"
WEIGHTED_MAX_MMD = "weighted_max_mmd"
DISCO = "disco"
ECF = "ecf"

_COMBINERS: dict = {
    MAX_MMD: lambda S, sizes: _max_from_sums(S, sizes)[0],
    WEIGHTED_MAX_MMD: _weighted_from_sums,
    DISCO: disco_from_sums,
    ECF: ecf_from_sums,
}


@dataclass(frozen=True)
class PermutationPlan:
    """How to calibrate: exact enumeration or seeded Monte-Carlo."""

    mode: str
    statistic_kind: str = MAX_MMD
    M: Optional[int] = None
    seed: Optional[int] = None

    def __post_init__(self):
        if self.mode not in (EXACT_ENUMERATION, MONTE_CARLO):
            raise ValidationError(f"unknown permutation mode {self.mode!r}")
        if self.statistic_kind not in _COMBINERS:
            raise ValidationError(
                f"unknown statistic kind {self.statistic_kind!r}; "
                f"expected one of {tuple(_COMBINERS)}"
            )
        if self.mode == MONTE_CARLO:
            if self.M is None or int(self.M) < 1:
                raise ValidationError("monte_carlo mode needs M >= 1")
            if self.seed is None or int(self.seed) < 0:
                raise ValidationError("monte_carlo mode needs a nonnegative seed")


def assignment_count(sizes: Sequence[int]) -> int:
    """Number of distinct group assignments N! / (n_1! ... n_K!)."""
    total = 1
    remaining = sum(sizes)
    for n in sizes:
        total *= math.comb(remaining, n)
        remaining -= n
    return total


def _combiner(statistic_kind: str) -> Callable[[np.ndarray, np.ndarray], float]:
    try:
        return _COMBINERS[statistic_kind]
    except KeyError:
        raise ValidationError(
            f"unknown statistic kind {statistic_kind!r}; expected one of {tuple(_COMBINERS)}"
        ) from None


def _check_dims(G: GramMatrix, idx: GroupIndex) -> None:
    if idx.total != G.size:
        raise IndexOutOfRangeError(
            f"group index covers {idx.total} observations, Gram matrix has {G.size}"
        )


def _permuted_block_sums(
    values: np.ndarray, starts: np.ndarray, perm: np.ndarray
) -> np.ndarray:
    P = np.add.reduceat(values[perm], starts, axis=0)
    return np.add.reduceat(P[:, perm], starts, axis=1)


def permuted_statistic(
    G: GramMatrix, idx: GroupIndex, perm: np.ndarray, statistic_kind: str = MAX_MMD
) -> float:
    """Statistic of the dataset relabeled by the permutation ``perm``."""
    _check_dims(G, idx)
    combine = _combiner(statistic_kind)
    starts = np.asarray(idx.boundaries[:-1], dtype=np.intp)
    sizes = np.asarray(idx.sizes, dtype=np.float64)
    S = _permuted_block_sums(G.values, starts, np.asarray(perm, dtype=np.intp))
    return combine(S, sizes)


def _enumerate_assignments(N: int, sizes: Sequence[int]) -> Iterator[np.ndarray]:
    """Yield every distinct assignment as a pooled index vector.

    Group k occupies positions [m_{k-1}, m_k) of the yielded vector; the
    identity assignment comes first.  Within-group index order is
    ascending, which the block-sum statistic cannot see.
    """

    def rec(remaining, sizes_left):
        if len(sizes_left) == 1:
            yield remaining
            return
        n = sizes_left[0]
        for chosen in itertools.combinations(range(len(remaining)), n):
            chosen_set = set(chosen)
            head = [remaining[c] for c in chosen]
            rest = [r for t, r in enumerate(remaining) if t not in chosen_set]
            for tail in rec(rest, sizes_left[1:]):
                yield head + tail

    for assignment in rec(list(range(N)), list(sizes)):
        yield np.asarray(assignment, dtype=np.intp)


def permutation_pvalue_exact(
    G: GramMatrix, idx: GroupIndex, plan: PermutationPlan
) -> float:
    """Exact permutation p-value by enumerating group assignments.

    p = #{assignments with permuted statistic >= observed} / #assignments.
    The statistic depends only on which points land in which group, so
    enumerating distinct assignments (each standing for an equal-weight
    block of the N! raw permutations) gives the full-permutation p-value
    exactly.  Ties count toward rejection.
    """
    _check_dims(G, idx)
    if plan.mode != EXACT_ENUMERATION:
        raise ValidationError("plan mode must be exact_enumeration")
    sizes = idx.sizes
    total = assignment_count(sizes)
    if total > EXACT_CAP:
        raise EnumerationTooLargeError(
            f"{total} distinct assignments exceed the exact-mode cap of {EXACT_CAP}"
        )
    combine = _combiner(plan.statistic_kind)
    starts = np.asarray(idx.boundaries[:-1], dtype=np.intp)
    fsizes = np.asarray(sizes, dtype=np.float64)
    values = G.values
    observed = combine(
        _permuted_block_sums(values, starts, np.arange(idx.total, dtype=np.intp)), fsizes
    )
    hits = 0
    for perm in _enumerate_assignments(idx.total, sizes):
        stat = combine(_permuted_block_sums(values, starts, perm), fsizes)
        if stat >= observed:
            hits += 1
    return hits / total


def _mc_statistics(
    G: GramMatrix, idx: GroupIndex, M: int, seed: int, statistic_kind: str
) -> np.ndarray:
    """Permuted statistics for M seeded Monte-Carlo shuffles, in draw order."""
    from ._threads import run_chunked

    combine = _combiner(statistic_kind)
    starts = np.asarray(idx.boundaries[:-1], dtype=np.intp)
    sizes = np.asarray(idx.sizes, dtype=np.float64)
    values = G.values
    N = idx.total

    def chunk(start: int, stop: int) -> np.ndarray:
        out = np.empty(stop - start)
        for i in range(start, stop):
            rng = np.random.default_rng([seed, i])
            perm = rng.permutation(N)
            out[i - start] = combine(_permuted_block_sums(values, starts, perm), sizes)
        return out

    parts = run_chunked(M, chunk)
    return np.concatenate(parts) if parts else np.empty(0)


def permutation_pvalue_mc(
    G: GramMatrix,
    idx: GroupIndex,
    M: int,
    seed: int,
    statistic_kind: str = MAX_MMD,
) -> float:
    """Monte-Carlo permutation p-value (1 + #{stat_i >= observed}) / (M + 1).

    Permutations are drawn uniformly with replacement via seeded
    shuffles; the +1 correction keeps the p-value valid at any M.
    """
    _check_dims(G, idx)
    plan = PermutationPlan(MONTE_CARLO, statistic_kind, M=M, seed=seed)
    combine = _combiner(plan.statistic_kind)
    starts = np.asarray(idx.boundaries[:-1], dtype=np.intp)
    sizes = np.asarray(idx.sizes, dtype=np.float64)
    observed = combine(
        _permuted_block_sums(G.values, starts, np.arange(idx.total, dtype=np.intp)),
        sizes,
    )
    stats = _mc_statistics(G, idx, int(M), int(seed), plan.statistic_kind)
    return (1 + int(np.count_nonzero(stats >= observed))) / (int(M) + 1)


def permutation_critical_value(
    G: GramMatrix,
    idx: GroupIndex,
    alpha: float,
    M: int,
    seed: int,
    statistic_kind: str = MAX_MMD,
) -> float:
    """Empirical (1 - alpha) upper quantile of {observed} u {permuted}.

    Returns the largest c such that at most floor(alpha (M+1)) of the
    M+1 statistics exceed c; rejecting when the observed statistic is
    strictly above c matches p_mc <= alpha in level.
    """
    _check_dims(G, idx)
    if not 0.0 < alpha <= 1.0:
        raise ValidationError(f"alpha must lie in (0, 1], got {alpha}")
    if M < 1.0 / alpha:
        warnings.warn(
            f"M={M} < 1/alpha={1.0 / alpha:.1f}: critical value is too coarse "
            "to reject at this level",
            stacklevel=2,
        )
    plan = PermutationPlan(MONTE_CARLO, statistic_kind, M=M, seed=seed)
    combine = _combiner(plan.statistic_kind)
    starts = np.asarray(idx.boundaries[:-1], dtype=np.intp)
    sizes = np.asarray(idx.sizes, dtype=np.float64)
    observed = combine(
        _permuted_block_sums(G.values, starts, np.arange(idx.total, dtype=np.intp)),
        sizes,
    )
    stats = _mc_statistics(G, idx, int(M), int(seed), plan.statistic_kind)
    pool = np.sort(np.concatenate([[observed], stats]))[::-1]
    a = int(math.floor(alpha * (M + 1)))
    return float(pool[min(a, M)])
