"""Kernel families, bandwidth selection, and Gram matrix construction.

Four families are supported:

* ``gaussian``: h(x, y) = exp(-||x - y||^2 / sigma), with sigma either a
  positive number or resolved by the median heuristic;
* ``energy_distance``: h(x, y) = (||x|| + ||y|| - ||x - y||) / 2;
* ``linear``: h(x, y) = <x, y>;
* ``chi_square``: on levels v in {1, ..., m}, h(x, y) = 1/p_x if x == y
  else 0, for a reference probability vector p.

All statistics downstream consume the induced squared feature distance
h~(i, j) = G[i][i] + G[j][j] - 2 G[i][j].
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .core import CONTINUOUS, DISCRETE, GroupedDataset
from .errors import (
    AllPointsIdenticalError,
    DomainMismatchError,
    IndexOutOfRangeError,
    InvalidSimplexError,
)

GAUSSIAN = "gaussian"
ENERGY = "energy_distance"
LINEAR = "linear"
CHI_SQUARE = "chi_square"
MEDIAN_HEURISTIC = "median_heuristic"

_FAMILIES = (GAUSSIAN, ENERGY, LINEAR, CHI_SQUARE)


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family with parameters and an optional uniform bound B.

    ``bandwidth`` applies to the gaussian family only and is either a
    positive float or the string ``"median_heuristic"``; ``probs``
    applies to the chi_square family.  ``bound_B`` is a user-asserted
    uniform bound 0 <= h <= B used by the bounded-difference tail bound.
    """

    family: str
    bandwidth: Union[float, str, None] = None
    probs: Optional[np.ndarray] = None
    bound_B: Optional[float] = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise DomainMismatchError(
                f"unknown kernel family {self.family!r}; expected one of {_FAMILIES}"
            )
        if self.family == GAUSSIAN:
            bw = self.bandwidth
            if bw is None:
                object.__setattr__(self, "bandwidth", MEDIAN_HEURISTIC)
            elif not (bw == MEDIAN_HEURISTIC or (np.isreal(bw) and float(bw) > 0)):
                raise DomainMismatchError(
                    f"gaussian bandwidth must be positive or 'median_heuristic', got {bw!r}"
                )
        elif self.bandwidth is not None:
            raise DomainMismatchError(
                f"bandwidth applies to the gaussian family only, not {self.family}"
            )
        if self.family == CHI_SQUARE:
            if self.probs is None:
                raise InvalidSimplexError("chi_square kernel requires a probability vector")
            p = np.asarray(self.probs, dtype=np.float64)
            if p.ndim != 1 or p.size < 2 or np.any(p <= 0) or abs(p.sum() - 1.0) > 1e-9:
                raise InvalidSimplexError(
                    "probs must be a simplex vector of length >= 2 with positive entries"
                )
            p = p.copy()
            p.flags.writeable = False
            object.__setattr__(self, "probs", p)
        elif self.probs is not None:
            raise DomainMismatchError("probs apply to the chi_square family only")
        if self.bound_B is not None and not float(self.bound_B) > 0:
            raise DomainMismatchError(f"bound_B must be positive, got {self.bound_B}")

    @property
    def is_resolved(self) -> bool:
        return not (self.family == GAUSSIAN and self.bandwidth == MEDIAN_HEURISTIC)

    def resolve(self, data) -> "KernelSpec":
        """Return a spec with any median-heuristic bandwidth made concrete."""
        if self.is_resolved:
            return self
        return replace(self, bandwidth=median_heuristic(data))


@dataclass(frozen=True)
class GramMatrix:
    """Dense symmetric matrix of pairwise kernel values.

    ``kernel`` records the resolved spec the matrix was built from; it is
    None for weight matrices (baseline statistics) that reuse the same
    block-sum machinery without belonging to one of the four families.
    """

    values: np.ndarray
    kernel: Optional[KernelSpec] = None

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise DomainMismatchError(f"Gram matrix must be square, got shape {v.shape}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def size(self) -> int:
        return int(self.values.shape[0])


def _as_points(x) -> np.ndarray:
    a = np.atleast_1d(np.asarray(x, dtype=np.float64))
    return a.ravel()


def kernel_eval(spec: KernelSpec, x, y) -> float:
    """Evaluate h(x, y) for a resolved kernel spec.

    Continuous families take real vectors (scalars are treated as
    1-vectors); the chi_square family takes integer levels.
    """
    if not spec.is_resolved:
        raise DomainMismatchError("bandwidth must be resolved before evaluation")
    if spec.family == CHI_SQUARE:
        xi, yi = int(x), int(y)
        p = spec.probs
        if not (1 <= xi <= p.size and 1 <= yi <= p.size):
            raise DomainMismatchError(
                f"levels must lie in [1, {p.size}], got ({x}, {y})"
            )
        return float(1.0 / p[xi - 1]) if xi == yi else 0.0
    xv, yv = _as_points(x), _as_points(y)
    if xv.shape != yv.shape:
        raise DomainMismatchError(f"point dimensions differ: {xv.shape} vs {yv.shape}")
    if spec.family == GAUSSIAN:
        d2 = float(np.sum((xv - yv) ** 2))
        return float(np.exp(-d2 / float(spec.bandwidth)))
    if spec.family == ENERGY:
        nx = float(np.linalg.norm(xv))
        ny = float(np.linalg.norm(yv))
        dxy = float(np.linalg.norm(xv - yv))
        return 0.5 * (nx + ny - dxy)
    return float(xv @ yv)


def _pooled_continuous(data) -> np.ndarray:
    if isinstance(data, GroupedDataset):
        if data.domain != CONTINUOUS:
            raise DomainMismatchError(
                f"operation needs continuous data, got {data.domain}"
            )
        return data.observations
    X = np.asarray(data, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    return X


def median_heuristic(data) -> float:
    """Median of squared Euclidean distances over unordered pairs.

    For an even number of pairs this is the mean of the two middle order
    statistics.  Duplicate points contribute zeros; only an all-zero set
    of pairwise distances is rejected.
    """
    X = _pooled_continuous(data)
    if X.shape[0] < 2:
        raise AllPointsIdenticalError("need at least two points for the median heuristic")
    d2 = pdist(X, "sqeuclidean")
    sigma = float(np.median(d2))
    if sigma <= 0.0:
        raise AllPointsIdenticalError(
            "median pairwise squared distance is zero; bandwidth undefined"
        )
    return sigma


def _mirror(G: np.ndarray) -> np.ndarray:
    """Force exact symmetry by mirroring the upper triangle downward."""
    U = np.triu(G)
    return U + np.triu(G, 1).T


def gram_matrix(spec: KernelSpec, data) -> GramMatrix:
    """Build the N x N Gram matrix of a resolved kernel over pooled data.

    ``data`` is a GroupedDataset or a raw observation array (levels for
    the chi_square family).  Entries are computed once for i <= j and
    mirrored, so G is exactly symmetric.
    """
    spec = spec.resolve(data)
    if spec.family == CHI_SQUARE:
        if isinstance(data, GroupedDataset):
            if data.domain != DISCRETE:
                raise DomainMismatchError("chi_square kernel needs discrete data")
            if data.num_levels != spec.probs.size:
                raise DomainMismatchError(
                    f"data has {data.num_levels} levels but probs has {spec.probs.size}"
                )
            levels = data.observations
        else:
            levels = np.asarray(data, dtype=np.int64).ravel()
            if levels.size and not (1 <= levels.min() and levels.max() <= spec.probs.size):
                raise DomainMismatchError(
                    f"levels must lie in [1, {spec.probs.size}]"
                )
        w = 1.0 / spec.probs[levels - 1]
        G = np.where(levels[:, None] == levels[None, :], w[:, None], 0.0)
        return GramMatrix(_mirror(G), spec)

    X = _pooled_continuous(data)
    if spec.family == GAUSSIAN:
        D2 = cdist(X, X, "sqeuclidean")
        G = np.exp(-D2 / float(spec.bandwidth))
        np.fill_diagonal(G, 1.0)
    elif spec.family == ENERGY:
        norms = np.linalg.norm(X, axis=1)
        D = cdist(X, X, "euclidean")
        G = 0.5 * (norms[:, None] + norms[None, :] - D)
        np.fill_diagonal(G, norms)
    else:
        G = X @ X.T
    return GramMatrix(_mirror(G), spec)


def tilde_h(G: GramMatrix, i: int, j: int) -> float:
    """Squared feature distance G[i][i] + G[j][j] - 2 G[i][j], clamped at 0.

    Indices are 0-based, matching every other index in this package.
    """
    V = G.values
    n = V.shape[0]
    if not (0 <= i < n and 0 <= j < n):
        raise IndexOutOfRangeError(f"indices ({i}, {j}) out of range for N={n}")
    return max(0.0, float(V[i, i] + V[j, j] - 2.0 * V[i, j]))


def tilde_h_matrix(G: GramMatrix) -> np.ndarray:
    """All pairwise h~ values as an N x N matrix with zero diagonal."""
    V = G.values
    d = np.diag(V)
    T = d[:, None] + d[None, :] - 2.0 * V
    np.maximum(T, 0.0, out=T)
    np.fill_diagonal(T, 0.0)
    return T
