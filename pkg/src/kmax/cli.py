"""Command-line entry point.

Subcommands map one-to-one onto the things the library can run:

* ``test``      one dataset (CSV file or generated scenario), one method
* ``power``     rejection-rate grid over scenarios, group counts, methods
* ``bounds``    closed-form p-value bound comparison over a sample-size grid
* ``tailratio`` empirical-vs-limit tail ratio of the scaled pair statistic
* ``gumbel``    asymptotic max-statistic p-value from a spectrum file

Every run is reproducible from its emitted report: seeds, the resolved
bandwidth, and all relevant knobs are echoed.  KMAX_THREADS caps worker
threads (0 or unset means one per CPU); results do not depend on it.
"""

from __future__ import annotations

import argparse
import sys
from typing import Dict, List, Optional, Sequence

from scipy import stats

from .asymptotic import gumbel_asymptotic_pvalue, spectrum_from_lambdas
from .errors import KmaxError
from .kernels import CHI_SQUARE, ENERGY, GAUSSIAN, LINEAR, MEDIAN_HEURISTIC
from .permutation import DISCO, ECF, MAX_MMD, WEIGHTED_MAX_MMD
from .report import emit_report, parse_spectrum_file
from .runner import (
    BOBKOV,
    GUMBEL,
    MCDIARMID,
    PERM_EXACT,
    PERM_MC,
    PHI2,
    PHIK,
    THRESHOLD_METHODS,
    RunConfig,
    run_test,
    run_threshold,
)
from .simulation import (
    LAPLACE_LOCATION,
    LAPLACE_SCALE,
    NORMAL_LOCATION,
    NORMAL_SCALE,
    NULL_UNIFORMITY,
    POWER_METHODS,
    SCENARIOS,
    ScenarioSpec,
    _derive_int,
    estimate_power,
    pvalue_comparison_experiment,
    tail_ratio_experiment,
)

KERNEL_BY_FLAG = {
    "gaussian": GAUSSIAN,
    "energy": ENERGY,
    "linear": LINEAR,
    "chisquare": CHI_SQUARE,
}
STATISTIC_BY_FLAG = {
    "max": MAX_MMD,
    "weighted": WEIGHTED_MAX_MMD,
    "disco": DISCO,
    "ecf": ECF,
}
METHOD_BY_FLAG = {
    "perm": PERM_EXACT,
    "mc": PERM_MC,
    "bobkov": BOBKOV,
    "mcdiarmid": MCDIARMID,
    "gumbel": GUMBEL,
    "phi2": PHI2,
    "phiK": PHIK,
}

ALTERNATIVE_SCENARIOS = (NORMAL_LOCATION, NORMAL_SCALE, LAPLACE_LOCATION, LAPLACE_SCALE)
FULL_SCALE_K = (2, 20, 40, 60, 80, 100)
FULL_SCALE_REPS = 800
DESK_SCALE_K = (2, 20, 40)

# keeps the scenario generator off the permutation streams, which are
# keyed directly by the user seed
_SCENARIO_SEED_STREAM = 1_000_003


def _bandwidth(text: str):
    if text == "median":
        return MEDIAN_HEURISTIC
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected 'median' or a number, got {text!r}"
        ) from None


def _float_list(text: str) -> List[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> List[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _n_grid(text: str) -> List[int]:
    """Either 'start:stop:step' (stop inclusive) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}")
        try:
            start, stop, step = (int(p) for p in parts)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected integers in {text!r}") from None
        if step <= 0:
            raise argparse.ArgumentTypeError("step must be positive")
        return list(range(start, stop + 1, step))
    return _int_list(text)


def _emit(payload, args) -> int:
    text = emit_report(payload, args.out, args.format)
    if args.out is None:
        sys.stdout.write(text)
    return 0


def _add_output_flags(p: argparse.ArgumentParser, default_format: str) -> None:
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default=default_format)


def _cmd_test(args: argparse.Namespace) -> int:
    scenario: Optional[ScenarioSpec] = None
    if args.scenario is not None:
        scenario = ScenarioSpec(
            args.scenario,
            args.K,
            args.n,
            args.d,
            _derive_int(args.seed, _SCENARIO_SEED_STREAM),
        )
    spectrum = parse_spectrum_file(args.spectrum) if args.spectrum else None
    config = RunConfig(
        input_path=args.input,
        scenario=scenario,
        statistic_kind=STATISTIC_BY_FLAG[args.statistic],
        kernel_family=KERNEL_BY_FLAG[args.kernel],
        bandwidth=args.bandwidth,
        probs=args.probs,
        bound_B=args.bound_B,
        method=METHOD_BY_FLAG[args.method],
        alpha=args.alpha,
        M=args.M,
        seed=args.seed,
        spectrum=spectrum,
        alpha_prime=args.alpha_prime,
        alpha_pp=args.alpha_pp,
        out=args.out,
        format=args.format,
    )
    if config.method in THRESHOLD_METHODS:
        return _emit(run_threshold(config), args)
    return _emit(run_test(config), args)


def _cmd_power(args: argparse.Namespace) -> int:
    scenarios = ALTERNATIVE_SCENARIOS if args.scenario == "all" else (args.scenario,)
    Ks: Sequence[int]
    if args.K is not None:
        Ks = args.K
    else:
        Ks = FULL_SCALE_K if args.full_scale else DESK_SCALE_K
    reps = args.reps
    if reps is None:
        reps = FULL_SCALE_REPS if args.full_scale else 200
    rows: List[Dict] = []
    for name in scenarios:
        for K in Ks:
            spec = ScenarioSpec(name, K, args.n, args.d, args.seed)
            for method in args.methods:
                est = estimate_power(
                    spec, method, M=args.M, alpha=args.alpha, reps=reps, seed=args.seed
                )
                rows.append(
                    {
                        "method": est.method,
                        "scenario": est.scenario,
                        "K": est.K,
                        "n": est.n,
                        "d": est.d,
                        "power": est.power,
                        "mc_se": est.mc_se,
                        "reps": est.reps,
                        "seed": est.seed,
                    }
                )
    return _emit(rows, args)


def _cmd_bounds(args: argparse.Namespace) -> int:
    rows = pvalue_comparison_experiment(
        args.N_grid,
        KERNEL_BY_FLAG[args.kernel],
        reps=args.reps,
        seed=args.seed,
        d=args.d,
        bound_B=args.bound_B,
    )
    return _emit(rows, args)


def _cmd_tailratio(args: argparse.Namespace) -> int:
    if args.x is not None:
        x_grid = args.x
    else:
        # quantiles of the limit itself; for m levels the limit is
        # chi-square with m - 1 degrees of freedom
        x_grid = [float(stats.chi2.ppf(q, args.m - 1)) for q in args.quantiles]
    rows = tail_ratio_experiment(
        args.m,
        args.n,
        x_grid,
        reps=args.reps,
        seed=args.seed,
        denominator_nsim=args.denominator_nsim,
    )
    return _emit(rows, args)


def _cmd_gumbel(args: argparse.Namespace) -> int:
    spec = spectrum_from_lambdas(parse_spectrum_file(args.spectrum))
    p = gumbel_asymptotic_pvalue(args.stat**2, args.n, args.K, spec)
    record = {
        "p_value": p,
        "statistic": args.stat,
        "stat_max2": args.stat**2,
        "n": args.n,
        "K": args.K,
        "lambda1": spec.lambda1,
        "mu1": spec.mu1,
        "kappa": spec.kappa,
        "spectrum": [float(v) for v in spec.lambdas],
        "method": GUMBEL,
    }
    return _emit(record, args)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kmax",
        description="Max-of-pairwise-MMD K-sample testing and its experiment harnesses.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", help="run one test on a CSV file or a generated scenario")
    src = p_test.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", default=None, help="CSV file with a 'group' column")
    src.add_argument("--scenario", choices=SCENARIOS, default=None)
    p_test.add_argument("--K", type=int, default=2, help="groups (scenario mode)")
    p_test.add_argument("--n", type=int, default=50, help="per-group size (scenario mode)")
    p_test.add_argument("--d", type=int, default=5, help="dimension (scenario mode)")
    p_test.add_argument("--kernel", choices=sorted(KERNEL_BY_FLAG), default="gaussian")
    p_test.add_argument(
        "--bandwidth",
        type=_bandwidth,
        default="median",
        help="'median' or a positive number (gaussian kernel only)",
    )
    p_test.add_argument(
        "--statistic", choices=sorted(STATISTIC_BY_FLAG), default="max"
    )
    p_test.add_argument("--method", choices=list(METHOD_BY_FLAG), default="mc")
    p_test.add_argument("--alpha", type=float, default=0.05)
    p_test.add_argument("--M", type=int, default=200, help="Monte-Carlo permutations")
    p_test.add_argument("--seed", type=int, default=0)
    p_test.add_argument("--bound-B", type=float, default=None, dest="bound_B")
    p_test.add_argument(
        "--probs",
        type=_float_list,
        default=None,
        help="reference probabilities for the chisquare kernel (default uniform)",
    )
    p_test.add_argument(
        "--spectrum", default=None, help="eigenvalue file for method=gumbel"
    )
    p_test.add_argument("--alpha-prime", type=float, default=1.0, dest="alpha_prime")
    p_test.add_argument("--alpha-pp", type=float, default=1.5, dest="alpha_pp")
    _add_output_flags(p_test, "json")
    p_test.set_defaults(func=_cmd_test)

    p_power = sub.add_parser("power", help="rejection-rate grid over scenarios and K")
    p_power.add_argument(
        "--scenario",
        choices=ALTERNATIVE_SCENARIOS + (NULL_UNIFORMITY, "all"),
        default="all",
    )
    p_power.add_argument(
        "--K", type=_int_list, default=None, help="comma list of group counts"
    )
    p_power.add_argument("--n", type=int, default=10)
    p_power.add_argument("--d", type=int, default=5)
    p_power.add_argument(
        "--methods",
        type=lambda t: [tok for tok in t.split(",") if tok],
        default=list(POWER_METHODS),
        help=f"comma list from {','.join(POWER_METHODS)}",
    )
    p_power.add_argument("--M", type=int, default=200)
    p_power.add_argument("--alpha", type=float, default=0.05)
    p_power.add_argument("--reps", type=int, default=None)
    p_power.add_argument("--seed", type=int, default=0)
    p_power.add_argument(
        "--full-scale",
        action="store_true",
        dest="full_scale",
        help=f"K grid {','.join(map(str, FULL_SCALE_K))} with {FULL_SCALE_REPS} replicates",
    )
    _add_output_flags(p_power, "csv")
    p_power.set_defaults(func=_cmd_power)

    p_bounds = sub.add_parser("bounds", help="closed-form p-value bounds over an N grid")
    p_bounds.add_argument("--kernel", choices=("energy", "linear"), required=True)
    p_bounds.add_argument(
        "--N-grid",
        type=_n_grid,
        default=list(range(100, 1001, 100)),
        dest="N_grid",
        help="start:stop:step (stop inclusive) or comma list of even N",
    )
    p_bounds.add_argument("--reps", type=int, default=200)
    p_bounds.add_argument("--d", type=int, default=1)
    p_bounds.add_argument("--bound-B", type=float, default=None, dest="bound_B")
    p_bounds.add_argument("--seed", type=int, default=0)
    _add_output_flags(p_bounds, "csv")
    p_bounds.set_defaults(func=_cmd_bounds)

    p_tail = sub.add_parser(
        "tailratio", help="empirical vs limit tail of the scaled pair statistic"
    )
    p_tail.add_argument("--m", type=int, default=2, help="number of discrete levels")
    p_tail.add_argument("--n", type=int, default=500, help="per-group sample size")
    p_tail.add_argument("--reps", type=int, default=10_000)
    p_tail.add_argument(
        "--x", type=_float_list, default=None, help="comma list of evaluation points"
    )
    p_tail.add_argument(
        "--quantiles",
        type=_float_list,
        default=[0.8, 0.85, 0.9, 0.95],
        help="limit quantiles to evaluate at when --x is not given",
    )
    p_tail.add_argument("--denominator-nsim", type=int, default=1_000_000, dest="denominator_nsim")
    p_tail.add_argument("--seed", type=int, default=0)
    _add_output_flags(p_tail, "csv")
    p_tail.set_defaults(func=_cmd_tailratio)

    p_gum = sub.add_parser("gumbel", help="asymptotic p-value from a spectrum file")
    p_gum.add_argument("--spectrum", required=True, help="one eigenvalue per line")
    p_gum.add_argument("--stat", type=float, required=True, help="observed max statistic")
    p_gum.add_argument("--n", type=int, required=True, help="common per-group size")
    p_gum.add_argument("--K", type=int, required=True, help="number of groups (>= 3)")
    _add_output_flags(p_gum, "json")
    p_gum.set_defaults(func=_cmd_gumbel)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KmaxError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
