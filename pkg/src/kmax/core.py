"""Shared domain types: grouped datasets, group indexing, test results.

Grouped data is stored pooled and block-contiguous: group k occupies the
index range [boundaries[k-1], boundaries[k]) of the pooled observation
array.  Permutation machinery therefore only ever touches index vectors,
never observation payloads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    DimensionMismatchError,
    DiscreteOutOfRangeError,
    EmptyGroupError,
    TooFewGroupsError,
    ValidationError,
)

CONTINUOUS = "continuous"
DISCRETE = "discrete"


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class GroupIndex:
    """Prefix-sum boundaries (m_0=0, m_1, ..., m_K=N) of contiguous groups."""

    boundaries: Tuple[int, ...]

    def __post_init__(self):
        b = self.boundaries
        if len(b) < 2 or b[0] != 0:
            raise TooFewGroupsError(
                f"need at least one group with leading 0 boundary, got {b}"
            )
        if any(b[i] >= b[i + 1] for i in range(len(b) - 1)):
            raise EmptyGroupError(f"boundaries must be strictly increasing, got {b}")

    @classmethod
    def from_sizes(cls, sizes: Sequence[int]) -> "GroupIndex":
        return cls(tuple(np.concatenate([[0], np.cumsum(sizes)]).tolist()))

    @property
    def num_groups(self) -> int:
        return len(self.boundaries) - 1

    @property
    def total(self) -> int:
        return self.boundaries[-1]

    @property
    def sizes(self) -> Tuple[int, ...]:
        b = self.boundaries
        return tuple(b[i + 1] - b[i] for i in range(len(b) - 1))

    def block(self, k: int) -> slice:
        """Pooled index range of group k (0-based)."""
        return slice(self.boundaries[k], self.boundaries[k + 1])


@dataclass(frozen=True)
class GroupedDataset:
    """Pooled observations with contiguous group blocks.

    ``observations`` is an (N, d) float array for continuous data or an
    (N,) integer array of levels in {1, ..., num_levels} for discrete
    data.  Instances are immutable; the observation array is marked
    read-only at construction.
    """

    observations: np.ndarray
    group_sizes: Tuple[int, ...]
    domain: str
    num_levels: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "observations", _freeze(self.observations))
        object.__setattr__(self, "group_sizes", tuple(int(n) for n in self.group_sizes))

    @property
    def num_observations(self) -> int:
        return int(self.observations.shape[0])

    @property
    def num_groups(self) -> int:
        return len(self.group_sizes)

    @property
    def dimension(self) -> Optional[int]:
        if self.domain == CONTINUOUS:
            return int(self.observations.shape[1])
        return None

    @property
    def index(self) -> GroupIndex:
        return GroupIndex.from_sizes(self.group_sizes)

    def __eq__(self, other):
        if not isinstance(other, GroupedDataset):
            return NotImplemented
        return (
            self.domain == other.domain
            and self.num_levels == other.num_levels
            and self.group_sizes == other.group_sizes
            and np.array_equal(self.observations, other.observations)
        )


@dataclass(frozen=True)
class TestResult:
    """Outcome of a single K-sample test run."""

    statistic: float
    statistic_kind: str
    p_value: float
    method: str
    argmax_pair: Optional[Tuple[int, int]] = None
    num_permutations: Optional[int] = None
    seed: Optional[int] = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValidationError(f"p_value must lie in [0, 1], got {self.p_value}")


def validate_dataset(
    observations: Union[np.ndarray, Sequence, "GroupedDataset"],
    group_sizes: Optional[Sequence[int]] = None,
    domain: Optional[str] = None,
    num_levels: Optional[int] = None,
) -> GroupedDataset:
    """Validate pooled observations against group sizes.

    Continuous data may arrive as an (N, d) or (N,) array of floats; a
    1-d array is treated as d=1.  Integer arrays are treated as discrete
    levels in {1, ..., num_levels}, with ``num_levels`` inferred as the
    maximum observed level when not supplied.  The input is never
    mutated; a validated dataset passes through unchanged.

    Raises
    ------
    EmptyGroupError, TooFewGroupsError, DimensionMismatchError,
    DiscreteOutOfRangeError
    """
    if isinstance(observations, GroupedDataset):
        ds = observations
        if group_sizes is not None and tuple(group_sizes) != ds.group_sizes:
            raise DimensionMismatchError("group sizes disagree with dataset")
        return validate_dataset(
            ds.observations, ds.group_sizes, domain=ds.domain, num_levels=ds.num_levels
        )

    if group_sizes is None:
        raise DimensionMismatchError("group_sizes are required")
    sizes = [int(n) for n in group_sizes]
    if len(sizes) < 2:
        raise TooFewGroupsError(f"need K >= 2 groups, got K={len(sizes)}")
    if any(n <= 0 for n in sizes):
        raise EmptyGroupError(f"every group must be nonempty, got sizes {tuple(sizes)}")

    obs = np.asarray(observations)
    if domain is None:
        domain = DISCRETE if np.issubdtype(obs.dtype, np.integer) else CONTINUOUS

    if obs.shape[0] != sum(sizes):
        raise DimensionMismatchError(
            f"{obs.shape[0]} observations but group sizes sum to {sum(sizes)}"
        )

    if domain == CONTINUOUS:
        obs = np.asarray(obs, dtype=np.float64)
        if obs.ndim == 1:
            obs = obs.reshape(-1, 1)
        if obs.ndim != 2 or obs.shape[1] < 1:
            raise DimensionMismatchError(
                f"continuous observations must form an (N, d) array, got shape {obs.shape}"
            )
        if not np.all(np.isfinite(obs)):
            raise DimensionMismatchError("observations must be finite")
        return GroupedDataset(obs, tuple(sizes), CONTINUOUS)

    if domain == DISCRETE:
        levels = np.asarray(obs)
        if levels.ndim != 1:
            raise DimensionMismatchError(
                f"discrete observations must form a flat level array, got shape {levels.shape}"
            )
        if not np.issubdtype(levels.dtype, np.integer):
            if not np.all(levels == np.floor(levels)):
                raise DiscreteOutOfRangeError("discrete levels must be integers")
        levels = levels.astype(np.int64)
        m = int(levels.max()) if num_levels is None else int(num_levels)
        if levels.min() < 1 or levels.max() > m:
            raise DiscreteOutOfRangeError(
                f"levels must lie in [1, {m}], got range "
                f"[{levels.min()}, {levels.max()}]"
            )
        return GroupedDataset(levels, tuple(sizes), DISCRETE, num_levels=m)

    raise DimensionMismatchError(f"unknown domain {domain!r}")


def from_groups(groups: Sequence[np.ndarray], **kwargs) -> GroupedDataset:
    """Build a dataset from per-group arrays by pooling them in order."""
    arrays = [np.asarray(g) for g in groups]
    if len(arrays) == 0:
        raise TooFewGroupsError("no groups supplied")
    pooled = np.concatenate(arrays, axis=0)
    sizes = [a.shape[0] for a in arrays]
    return validate_dataset(pooled, sizes, **kwargs)
