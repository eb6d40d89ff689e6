"""Extreme-value machinery for the max statistic at large K.

Under the null with a fixed kernel, each pairwise squared statistic has
a weighted chi-square limit sum_v lambda_v xi_v^2, and the centered max
over the K(K-1)/2 pairs converges to a Gumbel-type law

    F(y) = exp{-(2^{mu1/2 - 2} kappa / Gamma(mu1/2)) e^{-y/2}},

where mu1 is the multiplicity of the top eigenvalue lambda_1 and
kappa = prod_{v > mu1} (1 - lambda_v/lambda_1)^{-1/2}.  This module
computes spectra for the two closed-form kernels (linear on Gaussian
data, chi-square on finite levels), the limit CDF, the induced
asymptotic p-value, and small Monte-Carlo/series tools for the weighted
chi-square tail itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from ._threads import run_chunked
from .errors import (
    AllZeroError,
    InvalidSimplexError,
    KTooSmallError,
    NonpositiveVarianceError,
    UnbalancedDesignError,
    ValidationError,
)

_MULT_RTOL = 1e-12
_MC_BLOCK = 1 << 19


@dataclass(frozen=True)
class EigenSpectrum:
    """Descending eigenvalues with top multiplicity and the constant kappa."""

    lambdas: np.ndarray
    mu1: int
    kappa: float

    def __post_init__(self):
        lam = np.ascontiguousarray(self.lambdas, dtype=np.float64)
        lam.flags.writeable = False
        object.__setattr__(self, "lambdas", lam)

    @property
    def lambda1(self) -> float:
        return float(self.lambdas[0])


def spectrum_from_lambdas(lambdas: Sequence[float]) -> EigenSpectrum:
    """Build a spectrum from raw eigenvalues (any order).

    Values within relative tolerance 1e-12 of the largest count toward
    its multiplicity mu1; kappa is the product over the remaining terms.
    """
    lam = np.sort(np.asarray(lambdas, dtype=np.float64))[::-1]
    if lam.size == 0:
        raise AllZeroError("empty eigenvalue sequence")
    if np.any(lam < 0):
        raise ValidationError("eigenvalues must be nonnegative")
    lam1 = float(lam[0])
    if lam1 <= 0.0:
        raise AllZeroError("all eigenvalues are zero; spectrum degenerate")
    mu1 = int(np.count_nonzero(lam >= lam1 * (1.0 - _MULT_RTOL)))
    rest = lam[mu1:]
    # kappa = prod (1 - lambda_v/lambda_1)^{-1/2} over the strict remainder
    kappa = float(np.exp(-0.5 * np.sum(np.log1p(-rest / lam1)))) if rest.size else 1.0
    return EigenSpectrum(lam, mu1, kappa)


def spectrum_linear_gaussian(diag: Sequence[float]) -> EigenSpectrum:
    """Spectrum of the linear kernel under a centered Gaussian with
    diagonal covariance: the eigenvalues are the diagonal entries."""
    d = np.asarray(diag, dtype=np.float64)
    if d.size == 0 or np.any(d <= 0):
        raise NonpositiveVarianceError(
            "covariance diagonal entries must be strictly positive"
        )
    return spectrum_from_lambdas(d)


def spectrum_chisquare(probs: Sequence[float]) -> EigenSpectrum:
    """Spectrum of the chi-square kernel on m levels: m-1 unit eigenvalues.

    The reference probabilities shape the eigenfunctions only, so the
    output depends on them through their length alone.
    """
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1 or p.size < 2 or np.any(p <= 0) or abs(float(p.sum()) - 1.0) > 1e-9:
        raise InvalidSimplexError(
            "probs must be a simplex vector of length >= 2 with positive entries"
        )
    return spectrum_from_lambdas(np.ones(p.size - 1))


def gumbel_limit_cdf(y: float, spec: EigenSpectrum) -> float:
    """Limit CDF F(y) = exp{-(2^{mu1/2-2} kappa / Gamma(mu1/2)) e^{-y/2}}."""
    const = 2.0 ** (spec.mu1 / 2.0 - 2.0) * spec.kappa / math.gamma(spec.mu1 / 2.0)
    return math.exp(-const * math.exp(-y / 2.0))


def gumbel_asymptotic_pvalue(
    stat_max2: float,
    n: Union[int, Sequence[int]],
    K: int,
    spec: EigenSpectrum,
) -> float:
    """Asymptotic p-value of the max statistic under a balanced design.

    Centers the squared max statistic as

        y = (n / (2 lambda_1)) stat_max2 - 4 log K - (mu1 - 2) log log K

    and returns 1 - F(y).  ``n`` may be the common group size or the
    full size sequence (rejected if unbalanced); K must be at least 3 so
    that log log K is positive.
    """
    if not isinstance(n, (int, np.integer)):
        sizes = [int(v) for v in n]
        if len(set(sizes)) != 1:
            raise UnbalancedDesignError(
                f"the Gumbel approximation needs equal group sizes, got {tuple(sizes)}"
            )
        if len(sizes) != K:
            raise ValidationError(f"{len(sizes)} group sizes but K={K}")
        n = sizes[0]
    if K < 3:
        raise KTooSmallError(f"need K >= 3 for a positive log log K, got K={K}")
    if n < 1:
        raise ValidationError(f"group size must be positive, got {n}")
    if stat_max2 < 0:
        raise ValidationError(f"squared statistic must be nonnegative, got {stat_max2}")
    y = (
        (n / (2.0 * spec.lambda1)) * stat_max2
        - 4.0 * math.log(K)
        - (spec.mu1 - 2.0) * math.log(math.log(K))
    )
    return 1.0 - gumbel_limit_cdf(y, spec)


def weighted_chisq_survival_mc(
    lambdas: Sequence[float],
    x: float,
    nsim: int,
    seed: int,
) -> Tuple[float, float]:
    """Monte-Carlo estimate of P(sum_v lambda_v xi_v^2 >= x) with its SE.

    Draws are generated in fixed-size blocks, block b from a generator
    seeded by (seed, b), so the estimate does not depend on how blocks
    are scheduled across threads.
    """
    if nsim < 1:
        raise ValidationError(f"nsim must be positive, got {nsim}")
    if x <= 0.0:
        return 1.0, 0.0
    lam = np.asarray(lambdas, dtype=np.float64)
    n_blocks = (nsim + _MC_BLOCK - 1) // _MC_BLOCK

    def count_chunk(start: int, stop: int) -> int:
        hits = 0
        for b in range(start, stop):
            size = min(_MC_BLOCK, nsim - b * _MC_BLOCK)
            rng = np.random.default_rng([seed, b])
            draws = rng.standard_normal((size, lam.size))
            hits += int(np.count_nonzero((draws * draws) @ lam >= x))
        return hits

    total_hits = sum(run_chunked(n_blocks, count_chunk))
    p = total_hits / nsim
    se = math.sqrt(p * (1.0 - p) / nsim)
    return p, se


def zolotarev_tail_approx(x: float, spec: EigenSpectrum) -> float:
    """Large-x series approximation of the weighted chi-square tail:

        (kappa / Gamma(mu1/2)) (x / (2 lambda_1))^{mu1/2 - 1} e^{-x/(2 lambda_1)}
    """
    if not x > 0:
        raise ValidationError(f"x must be positive, got {x}")
    lam1 = spec.lambda1
    z = x / (2.0 * lam1)
    return spec.kappa / math.gamma(spec.mu1 / 2.0) * z ** (spec.mu1 / 2.0 - 1.0) * math.exp(-z)
