"""Max-of-pairwise-MMD K-sample testing.

The statistic is the largest pairwise kernel MMD over all group pairs,
calibrated by permutation (exact or Monte-Carlo), by closed-form
concentration bounds, or by an extreme-value asymptotic.  Distance- and
characteristic-function-based K-sample statistics are included for
benchmarking, plus the simulation harnesses driving the experiment
subcommands of the ``kmax`` CLI.
"""

from .asymptotic import (
    EigenSpectrum,
    gumbel_asymptotic_pvalue,
    gumbel_limit_cdf,
    spectrum_chisquare,
    spectrum_from_lambdas,
    spectrum_linear_gaussian,
    weighted_chisq_survival_mc,
    zolotarev_tail_approx,
)
from .baselines import (
    disco_from_sums,
    disco_gram,
    disco_statistic,
    ecf_from_sums,
    ecf_gram,
    ecf_statistic,
)
from .concentration import (
    VarianceProxy,
    ksample_tail_bound,
    p_bobkov,
    p_mcdiarmid,
    pair_gamma,
    phi2_threshold,
    phiK_threshold,
    sigma_K2,
    sigma_hat2,
)
from .core import (
    CONTINUOUS,
    DISCRETE,
    GroupedDataset,
    GroupIndex,
    TestResult,
    from_groups,
    validate_dataset,
)
from .errors import *  # noqa: F401,F403  (the module defines __all__)
from .kernels import (
    CHI_SQUARE,
    ENERGY,
    GAUSSIAN,
    LINEAR,
    MEDIAN_HEURISTIC,
    GramMatrix,
    KernelSpec,
    gram_matrix,
    kernel_eval,
    median_heuristic,
    tilde_h,
    tilde_h_matrix,
)
from .permutation import (
    DISCO,
    ECF,
    EXACT_CAP,
    EXACT_ENUMERATION,
    MAX_MMD,
    MONTE_CARLO,
    WEIGHTED_MAX_MMD,
    PermutationPlan,
    assignment_count,
    permutation_critical_value,
    permutation_pvalue_exact,
    permutation_pvalue_mc,
    permuted_statistic,
)
from .report import (
    dumps_csv,
    dumps_json,
    emit_report,
    format_float,
    parse_dataset_csv,
    parse_spectrum_file,
    result_record,
)
from .runner import RunConfig, run_test, run_threshold
from .simulation import (
    POWER_METHODS,
    SCENARIOS,
    PowerEstimate,
    ScenarioSpec,
    estimate_power,
    gen_mv_laplace,
    gen_mvn,
    gen_truncnorm,
    make_scenario,
    pvalue_comparison_experiment,
    tail_ratio_experiment,
)
from .statistics import (
    BlockSums,
    block_sums,
    max_mmd,
    mmd_bruteforce_oracle,
    mmd_squared_pair,
    weighted_max_mmd,
)

__version__ = "0.1.0"
