"""Single-run configuration and execution: data -> Gram -> statistic -> p.

This is the layer the CLI drives.  ``run_test`` handles the calibration
methods that yield a p-value (permutation, Monte-Carlo permutation, the
two closed-form bounds, and the Gumbel asymptotic); ``run_threshold``
handles the two analytic threshold tests, which report a critical value
and a reject flag instead of a p-value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from .asymptotic import gumbel_asymptotic_pvalue, spectrum_chisquare, spectrum_from_lambdas
from .baselines import disco_gram, disco_statistic, ecf_gram, ecf_statistic
from .concentration import p_bobkov, p_mcdiarmid, phi2_threshold, phiK_threshold, sigma_hat2, sigma_K2
from .core import DISCRETE, GroupedDataset, TestResult
from .errors import (
    MissingBoundError,
    UnbalancedGroupsError,
    ValidationError,
)
from .kernels import (
    CHI_SQUARE,
    GAUSSIAN,
    MEDIAN_HEURISTIC,
    GramMatrix,
    KernelSpec,
    gram_matrix,
)
from .permutation import (
    DISCO,
    ECF,
    EXACT_ENUMERATION,
    MAX_MMD,
    WEIGHTED_MAX_MMD,
    PermutationPlan,
    assignment_count,
    permutation_pvalue_exact,
    permutation_pvalue_mc,
)
from .report import parse_dataset_csv
from .simulation import (
    DEFAULT_ALPHA_PP,
    DEFAULT_ALPHA_PRIME,
    ScenarioSpec,
    make_scenario,
)
from .statistics import max_mmd, weighted_max_mmd

PERM_EXACT = "perm_exact"
PERM_MC = "perm_mc"
BOBKOV = "bobkov"
MCDIARMID = "mcdiarmid"
GUMBEL = "gumbel"
PHI2 = "phi2"
PHIK = "phiK"

PVALUE_METHODS = (PERM_EXACT, PERM_MC, BOBKOV, MCDIARMID, GUMBEL)
THRESHOLD_METHODS = (PHI2, PHIK)


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one test run."""

    input_path: Optional[str] = None
    scenario: Optional[ScenarioSpec] = None
    statistic_kind: str = MAX_MMD
    kernel_family: str = GAUSSIAN
    bandwidth: Union[float, str] = MEDIAN_HEURISTIC
    probs: Optional[Sequence[float]] = None
    bound_B: Optional[float] = None
    method: str = PERM_MC
    alpha: float = 0.05
    M: int = 200
    seed: int = 0
    spectrum: Optional[Sequence[float]] = None
    alpha_prime: float = DEFAULT_ALPHA_PRIME
    alpha_pp: float = DEFAULT_ALPHA_PP
    out: Optional[str] = None
    format: str = "json"

    def __post_init__(self):
        if (self.input_path is None) == (self.scenario is None):
            raise ValidationError(
                "exactly one of input_path and scenario must be given"
            )
        if not 0.0 < self.alpha < 1.0:
            raise ValidationError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.method not in PVALUE_METHODS + THRESHOLD_METHODS:
            raise ValidationError(
                f"unknown method {self.method!r}; expected one of "
                f"{PVALUE_METHODS + THRESHOLD_METHODS}"
            )


def _load_data(config: RunConfig) -> Tuple[GroupedDataset, Dict[str, Any]]:
    if config.input_path is not None:
        return parse_dataset_csv(config.input_path), {"input": config.input_path}
    data = make_scenario(config.scenario)
    sc = config.scenario
    return data, {
        "scenario": sc.name,
        "K": sc.K,
        "n": sc.n,
        "d": sc.d,
        "scenario_seed": sc.seed,
    }


def _kernel_spec(config: RunConfig, data: GroupedDataset) -> KernelSpec:
    probs = config.probs
    if config.kernel_family == CHI_SQUARE and probs is None:
        if data.domain != DISCRETE:
            raise ValidationError("chi_square kernel needs discrete data")
        # default reference distribution: uniform over the observed levels
        probs = np.full(data.num_levels, 1.0 / data.num_levels)
    bandwidth = config.bandwidth if config.kernel_family == GAUSSIAN else None
    return KernelSpec(
        config.kernel_family, bandwidth=bandwidth, probs=probs, bound_B=config.bound_B
    )


def _statistic_and_gram(
    config: RunConfig, data: GroupedDataset
) -> Tuple[float, Optional[Tuple[int, int]], GramMatrix, Dict[str, Any]]:
    kind = config.statistic_kind
    echo: Dict[str, Any] = {"statistic_kind": kind}
    if kind in (MAX_MMD, WEIGHTED_MAX_MMD):
        spec = _kernel_spec(config, data).resolve(data)
        G = gram_matrix(spec, data)
        echo["kernel"] = spec.family
        if spec.family == GAUSSIAN:
            echo["bandwidth"] = float(spec.bandwidth)
        if spec.probs is not None:
            echo["probs"] = [float(p) for p in spec.probs]
        if kind == MAX_MMD:
            value, argmax = max_mmd(G, data.index)
            return value, argmax, G, echo
        return weighted_max_mmd(G, data.index), None, G, echo
    if kind == DISCO:
        echo["alpha_prime"] = config.alpha_prime
        return (
            disco_statistic(data, config.alpha_prime),
            None,
            disco_gram(data, config.alpha_prime),
            echo,
        )
    if kind == ECF:
        echo["alpha_pp"] = config.alpha_pp
        return (
            ecf_statistic(data, config.alpha_pp),
            None,
            ecf_gram(data, config.alpha_pp),
            echo,
        )
    raise ValidationError(
        f"unknown statistic kind {kind!r}; expected one of "
        f"({MAX_MMD}, {WEIGHTED_MAX_MMD}, {DISCO}, {ECF})"
    )


def _require_balanced_pair(data: GroupedDataset, method: str) -> None:
    sizes = data.group_sizes
    if len(sizes) != 2 or sizes[0] != sizes[1]:
        raise UnbalancedGroupsError(
            f"method {method} needs a balanced two-sample design, got sizes {sizes}"
        )


def run_test(config: RunConfig) -> TestResult:
    """Execute one p-value producing test run."""
    if config.method in THRESHOLD_METHODS:
        raise ValidationError(
            f"method {config.method} reports a threshold, not a p-value; "
            "use run_threshold"
        )
    data, source_echo = _load_data(config)
    value, argmax, G, stat_echo = _statistic_and_gram(config, data)
    details: Dict[str, Any] = {**source_echo, **stat_echo, "alpha": config.alpha}

    num_perms: Optional[int] = None
    seed: Optional[int] = None
    if config.method == PERM_MC:
        seed = config.seed
        num_perms = config.M
        p = permutation_pvalue_mc(
            G, data.index, config.M, config.seed, config.statistic_kind
        )
        details["M"] = config.M
    elif config.method == PERM_EXACT:
        plan = PermutationPlan(EXACT_ENUMERATION, config.statistic_kind)
        p = permutation_pvalue_exact(G, data.index, plan)
        num_perms = assignment_count(data.group_sizes)
        details["assignments"] = num_perms
    elif config.method == BOBKOV:
        if config.statistic_kind != MAX_MMD:
            raise ValidationError("bobkov calibration applies to the max_mmd statistic")
        _require_balanced_pair(data, BOBKOV)
        s2 = sigma_hat2(G)
        details["sigma2"] = s2
        p = p_bobkov(value, s2, data.num_observations)
    elif config.method == MCDIARMID:
        if config.statistic_kind != MAX_MMD:
            raise ValidationError(
                "mcdiarmid calibration applies to the max_mmd statistic"
            )
        _require_balanced_pair(data, MCDIARMID)
        if config.bound_B is None:
            raise MissingBoundError("mcdiarmid calibration needs --bound-B")
        details["bound_B"] = float(config.bound_B)
        p = p_mcdiarmid(value, config.bound_B, data.num_observations)
    else:  # GUMBEL
        if config.statistic_kind != MAX_MMD:
            raise ValidationError("gumbel calibration applies to the max_mmd statistic")
        if config.spectrum is not None:
            spec = spectrum_from_lambdas(config.spectrum)
        elif config.kernel_family == CHI_SQUARE:
            spec = spectrum_chisquare(
                _kernel_spec(config, data).probs
            )
        else:
            raise ValidationError(
                "gumbel calibration needs an eigenvalue spectrum "
                "(supply one, or use the chi_square kernel)"
            )
        details["spectrum"] = [float(v) for v in spec.lambdas]
        details["mu1"] = spec.mu1
        details["kappa"] = spec.kappa
        p = gumbel_asymptotic_pvalue(
            value**2, data.group_sizes, data.num_groups, spec
        )
    return TestResult(
        statistic=value,
        statistic_kind=config.statistic_kind,
        p_value=p,
        method=config.method,
        argmax_pair=argmax,
        num_permutations=num_perms,
        seed=seed,
        details=details,
    )


def run_threshold(config: RunConfig) -> Dict[str, Any]:
    """Execute one analytic threshold test (phi2 or phiK)."""
    if config.method not in THRESHOLD_METHODS:
        raise ValidationError(f"run_threshold handles {THRESHOLD_METHODS} only")
    if config.statistic_kind != MAX_MMD:
        raise ValidationError("threshold tests apply to the max_mmd statistic")
    data, source_echo = _load_data(config)
    value, argmax, G, stat_echo = _statistic_and_gram(config, data)
    record: Dict[str, Any] = {
        "statistic": value,
        "statistic_kind": config.statistic_kind,
        "method": config.method,
        "alpha": config.alpha,
    }
    if config.method == PHI2:
        sizes = data.group_sizes
        if len(sizes) != 2:
            raise UnbalancedGroupsError(
                f"phi2 needs exactly two groups, got K={len(sizes)}"
            )
        s2 = sigma_hat2(G)
        threshold = phi2_threshold(s2, sizes[0], sizes[1], config.alpha)
        record["sigma2"] = s2
    else:
        sK2 = sigma_K2(G, data.index)
        threshold = phiK_threshold(sK2, data.group_sizes, config.alpha)
        record["sigmaK2"] = sK2
    record["threshold"] = threshold
    record["reject"] = bool(value >= threshold)
    if argmax is not None:
        record["argmax_pair"] = list(argmax)
    record["config"] = {**source_echo, **stat_echo}
    return record
