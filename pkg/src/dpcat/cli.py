"""Command-line front end.

Subcommands: verify, sanitize, analyze, convert, optimal, bench.  All
output is deterministic given the inputs and the seed (bench wall-clock
fields excepted).  Exit codes: 0 success / private, 1 not private,
2 input error, 3 enumeration budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import kernels
from .analysis import (
    expected_error,
    exponential_to_product,
    matrix_expected_error,
    optimal_mechanism,
    product_to_exponential,
)
from .core import (
    DEFAULT_ENUM_BUDGET,
    DEFAULT_SUBSET_BUDGET,
    CategorySpace,
    load_category_space,
    load_database_csv,
    naive_check_count,
    space_size,
)
from .errors import (
    DataFormatError,
    EnumerationBudgetError,
    ExactModeError,
    IncompleteUtilityError,
    LengthMismatchError,
    ParameterRangeError,
)
from .mechanisms import (
    ExponentialSpec,
    HammingUtility,
    NegL1Utility,
    ProductSpec,
    sample,
)
from .specfile import load_spec_file, save_spec_file
from .verifier import (
    PrivacyParams,
    verify_bruteforce,
    verify_matrix,
    verify_reduced,
)

EXIT_PRIVATE = 0
EXIT_NOT_PRIVATE = 1
EXIT_INPUT_ERROR = 2
EXIT_BUDGET_ERROR = 3


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=("json", "table"), default="json",
                        help="output format (default json)")
    parser.add_argument("--budget-enum", type=int, default=DEFAULT_ENUM_BUDGET,
                        metavar="N", help="max database-space size to enumerate")
    parser.add_argument("--budget-subsets", type=int,
                        default=DEFAULT_SUBSET_BUDGET, metavar="N",
                        help="max set size whose subsets may be enumerated")
    parser.add_argument("--threads", type=int, default=1,
                        help="parallelism across neighbor pairs")
    parser.add_argument("--exact", action="store_true",
                        help="exact rational arithmetic (hamming/product specs)")


def _privacy_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--epsilon", type=float, required=True)
    parser.add_argument("--delta", type=float, default=0.0)


def _emit(args, payload: dict) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        for key, value in payload.items():
            print(f"{key}: {value}")


def _with_n(spec, n: int):
    """Rebind a spec to the row count of the data being sanitised."""
    if spec.n == n:
        return spec
    if isinstance(spec, ProductSpec):
        return ProductSpec(spec.space, n, spec.matrix)
    if isinstance(spec.utility, (HammingUtility, NegL1Utility)):
        return ExponentialSpec(spec.space, n, spec.utility)
    raise DataFormatError(
        f"spec was written for n={spec.n} but the data has {n} rows, and "
        f"table utilities cannot be rescaled")


def cmd_verify(args) -> int:
    spec = load_spec_file(args.spec, exact=args.exact)
    params = PrivacyParams(args.epsilon, args.delta)
    method = args.method
    if method == "auto":
        method = "matrix" if isinstance(spec, ProductSpec) else "reduced"
    if method == "matrix":
        if not isinstance(spec, ProductSpec):
            raise DataFormatError("--method matrix needs a product spec")
        report = verify_matrix(spec.matrix, params, space=spec.space,
                               budget_subsets=args.budget_subsets,
                               exact=args.exact)
    elif method == "reduced":
        report = verify_reduced(spec, params, budget_enum=args.budget_enum,
                                budget_subsets=args.budget_subsets,
                                threads=args.threads, exact=args.exact)
    else:
        report = verify_bruteforce(spec, params,
                                   budget_subsets=args.budget_subsets,
                                   threads=args.threads, exact=args.exact)
    payload = report.to_json_dict()
    if args.format == "table":
        payload["binding_pair"] = json.dumps(payload["binding_pair"])
        payload["binding_set"] = json.dumps(payload["binding_set"])
    _emit(args, payload)
    return EXIT_PRIVATE if report.private else EXIT_NOT_PRIVATE


def cmd_sanitize(args) -> int:
    spec = load_spec_file(args.spec, exact=False)
    data = load_database_csv(args.data, spec.space, column=args.column)
    spec = _with_n(spec, data.n)
    rng = np.random.default_rng(args.seed)
    sanitized = sample(spec, data, rng, budget=args.budget_enum)
    lines = "".join(f"{label}\n" for label in sanitized.labels(spec.space))
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(lines)
    else:
        sys.stdout.write(lines)
    return 0


def cmd_analyze(args) -> int:
    spec = load_spec_file(args.spec, exact=False)
    params = PrivacyParams(args.epsilon, args.delta)
    profile = expected_error(spec, params, budget_enum=args.budget_enum)
    payload = {
        "mechanism": spec.kind,
        "m": spec.space.m,
        "n": spec.n,
        "epsilon": params.epsilon,
        "delta": params.delta,
        **profile.to_json_dict(),
    }
    _emit(args, payload)
    return 0


def cmd_convert(args) -> int:
    spec = load_spec_file(args.spec, exact=args.exact)
    if isinstance(spec, ProductSpec):
        converted = product_to_exponential(spec)
        k = converted.utility.k
        p = spec.matrix.symmetric_p()
    else:
        converted = exponential_to_product(spec)
        k = spec.utility.k
        p = converted.matrix.symmetric_p()
    if args.output:
        save_spec_file(converted, args.output,
                       categories_path=getattr(spec, "categories_path", None))
    payload = {
        "from": spec.kind,
        "to": converted.kind,
        "m": spec.space.m,
        "n": spec.n,
        # the no-noise endpoint k = inf serialises as a string sentinel
        "k": "inf" if math.isinf(k) else k,
        "p": p,
        "output": args.output,
    }
    _emit(args, payload)
    return 0


def cmd_optimal(args) -> int:
    if args.categories:
        space = load_category_space(args.categories)
    elif args.spec:
        space = load_spec_file(args.spec).space
    else:
        raise DataFormatError("optimal needs --categories or --spec")
    params = PrivacyParams(args.epsilon, args.delta)
    matrix = optimal_mechanism(params, space.m, exact=args.exact)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            matrix.to_csv(fh)
    payload = {
        "m": space.m,
        "epsilon": params.epsilon,
        "delta": params.delta,
        "p": float(matrix.values[0, 1]),
        "diagonal": float(matrix.values[0, 0]),
        "per_row_error": matrix_expected_error(matrix, 1),
        "degenerate": params.trivial,
        "matrix": matrix.to_json_dict(),
        "output": args.output,
    }
    if args.format == "table":
        payload["matrix"] = json.dumps(payload["matrix"])
    _emit(args, payload)
    return 0


def _bench_spec(space: CategorySpace, n: int, mechanism: str, k: float):
    if mechanism == "hamming":
        return ExponentialSpec(space, n, HammingUtility(k))
    if mechanism == "l1":
        return ExponentialSpec(space, n, NegL1Utility())
    raise DataFormatError(f"unknown bench mechanism {mechanism!r}")


def cmd_bench(args) -> int:
    params = PrivacyParams(args.epsilon, args.delta)
    rows = []
    for m in args.m_list:
        for n in args.n_list:
            space = CategorySpace(tuple(f"c{i}" for i in range(m + 1)))
            row = {
                "mechanism": args.mechanism,
                "m": m,
                "n": n,
                "epsilon": params.epsilon,
                "delta": params.delta,
                "kernel": kernels.BACKEND,
                "checks_naive": str(naive_check_count(space, n)),
            }
            try:
                spec = _bench_spec(space, n, args.mechanism, args.k)
                start = time.perf_counter()
                reduced = verify_reduced(spec, params,
                                         budget_enum=args.budget_enum,
                                         budget_subsets=args.budget_subsets,
                                         threads=args.threads)
                row["time_reduced_s"] = time.perf_counter() - start
                row["checks_reduced"] = str(reduced.checks_performed)
                row["verdict"] = reduced.verdict
            except EnumerationBudgetError as exc:
                row.update(skipped=True, reason=str(exc))
                rows.append(row)
                continue
            if space_size(space, n) <= args.budget_subsets:
                start = time.perf_counter()
                brute = verify_bruteforce(spec, params,
                                          budget_subsets=args.budget_subsets,
                                          threads=args.threads)
                row["time_bruteforce_s"] = time.perf_counter() - start
                row["agree"] = brute.verdict == reduced.verdict
                row["speedup"] = (row["time_bruteforce_s"]
                                  / max(row["time_reduced_s"], 1e-9))
            else:
                row["time_bruteforce_s"] = None
                row["speedup"] = None
                row["brute_skipped"] = True
            row["skipped"] = False
            rows.append(row)
    if args.format == "json":
        print(json.dumps(rows, indent=2))
    else:
        for row in rows:
            print(" ".join(f"{key}={value}" for key, value in row.items()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dpcat",
        description="Differentially private sanitisation of categorical "
                    "data, with an exact privacy verifier.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="decide (epsilon, delta) privacy")
    p.add_argument("--spec", required=True)
    _privacy_args(p)
    p.add_argument("--method", choices=("auto", "reduced", "brute", "matrix"),
                   default="auto")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sanitize", help="sanitise a data file")
    p.add_argument("--spec", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--column", default=None,
                   help="header column to read (implies a header row)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--output", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_sanitize)

    p = sub.add_parser("analyze", help="expected error and bounds")
    p.add_argument("--spec", required=True)
    _privacy_args(p)
    _add_common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("convert", help="map between hamming and product form")
    p.add_argument("--spec", required=True)
    p.add_argument("--output", default=None, help="write the converted spec")
    _add_common(p)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("optimal", help="error-optimal solution matrix")
    _privacy_args(p)
    p.add_argument("--categories", default=None)
    p.add_argument("--spec", default=None)
    p.add_argument("--output", default=None, help="write the matrix as CSV")
    _add_common(p)
    p.set_defaults(func=cmd_optimal)

    p = sub.add_parser("bench", help="workload comparison across (m, n)")
    _privacy_args(p)
    p.add_argument("--mechanism", choices=("hamming", "l1"), default="hamming")
    p.add_argument("--k", type=float, default=1.0,
                   help="hamming privacy weight (default 1.0)")
    p.add_argument("--m-list", type=lambda s: [int(x) for x in s.split(",")],
                   default=[1, 2], metavar="M1,M2,...")
    p.add_argument("--n-list", type=lambda s: [int(x) for x in s.split(",")],
                   default=[1, 2], metavar="N1,N2,...")
    p.add_argument("--seed", type=int, default=None, help="unused; accepted "
                   "for interface uniformity")
    _add_common(p)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DataFormatError, ParameterRangeError, IncompleteUtilityError,
            LengthMismatchError, ExactModeError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except EnumerationBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET_ERROR


if __name__ == "__main__":
    sys.exit(main())
