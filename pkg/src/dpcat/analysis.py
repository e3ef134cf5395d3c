"""Error profiles, the exponential/product parameter map, and the
error-optimal mechanism.

Error is measured as the worst-case expected hamming distance between input
and sanitised output, E = max_d E[h(X_d, d)].  For any private mechanism
the per-row error is pinched between (1 - delta)/(1 + e^eps/m) and
m/(m + 1); the symmetric mechanism with p = (1 - delta)/(e^eps + m) meets
the lower bound and no product sanitisation beats it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import DEFAULT_ENUM_BUDGET, check_enum_budget, digit_matrix
from .errors import ParameterRangeError
from .mechanisms import (
    ExponentialSpec,
    HammingUtility,
    ProductSpec,
    SolutionMatrix,
    symmetric_matrix,
)
from .verifier import TOLERANCE, PrivacyParams

#: Default (epsilon, delta) grid for property suites: the zero-budget
#: boundary, small budgets, and a generous regime.
DEFAULT_EPSILONS = (0.0, 0.1, math.log(2), 1.0, math.log(4), 3.0)
DEFAULT_DELTAS = (0.0, 0.01, 0.1, 0.5)


@dataclass(frozen=True)
class ErrorProfile:
    """Worst-case expected hamming error of a mechanism, with bounds.

    ``lower_bound`` needs a privacy budget to evaluate and is None when no
    budget was supplied.  For any mechanism verified private at that budget,
    lower_bound <= expected_error <= upper_bound.
    """

    expected_error: float
    per_row_error: float
    lower_bound: float | None
    upper_bound: float

    def to_json_dict(self) -> dict:
        return {
            "expected_error": self.expected_error,
            "per_row_error": self.per_row_error,
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
        }


def error_bounds(params: PrivacyParams, m: int, n: int) -> tuple[float, float]:
    """(lower, upper) bounds on the expected error of any private mechanism."""
    if m < 1 or n < 1:
        raise ParameterRangeError("need m >= 1 and n >= 1")
    lower = n * (1 - params.delta) / (1 + math.exp(params.epsilon) / m)
    upper = n * m / (m + 1)
    return lower, upper


def expected_error(spec, params: PrivacyParams | None = None, *,
                   budget_enum: int = DEFAULT_ENUM_BUDGET) -> ErrorProfile:
    """Worst-case expected hamming error of a mechanism spec.

    Hamming-utility specs use the closed form n / (1 + e^k/m); product specs
    use n * max_d (1 - P(X_d = d)); other utilities take the exhaustive
    expectation over the enumerated space.
    """
    m, n = spec.space.m, spec.n
    if isinstance(spec, ExponentialSpec) and isinstance(spec.utility,
                                                        HammingUtility):
        err = n / (1 + math.exp(spec.utility.k) / m)
    elif isinstance(spec, ProductSpec):
        err = n * float(np.max(1.0 - np.diag(spec.matrix.values)))
    else:
        size = check_enum_budget(spec.space, n, budget_enum)
        digits = digit_matrix(spec.space, n, budget_enum)
        err = 0.0
        for i in range(size):
            h = np.count_nonzero(digits != digits[i], axis=1)
            err = max(err, float(np.dot(h, spec.pmf_row(i, budget_enum))))
    lower = None
    if params is not None:
        lower = error_bounds(params, m, n)[0]
    return ErrorProfile(
        expected_error=err,
        per_row_error=err / n,
        lower_bound=lower,
        upper_bound=n * m / (m + 1),
    )


def p_from_k(k: float, m: int) -> float:
    """Flip probability of the product mechanism equivalent to the hamming
    mechanism with privacy weight k:  p = 1 / (e^k + m).
    """
    if m < 1:
        raise ParameterRangeError("m must be >= 1")
    if math.isnan(k) or k < 0:
        raise ParameterRangeError(f"k must be >= 0, got {k}")
    if math.isinf(k):
        return 0.0
    return 1.0 / (math.exp(k) + m)


def k_from_p(p: float, m: int) -> float:
    """Inverse of :func:`p_from_k`:  e^k = 1/p - m.

    p = 0 maps to the no-noise endpoint, reported as ``math.inf``.
    """
    if m < 1:
        raise ParameterRangeError("m must be >= 1")
    upper = 1.0 / (m + 1)
    if math.isnan(p) or not 0.0 <= p <= upper + 1e-12:
        raise ParameterRangeError(
            f"flip probability must lie in [0, 1/(m+1)] = [0, {upper}], "
            f"got {p}")
    if p == 0.0:
        return math.inf
    # p within rounding of 1/(m+1) can put e^k a few ulp below 1; clamp.
    return max(math.log(max(1.0 / p - m, 1.0)), 0.0)


def optimal_mechanism(params: PrivacyParams, m: int, *,
                      exact: bool = False) -> SolutionMatrix:
    """The symmetric solution matrix minimising worst-case expected error
    among all product sanitisations private at (epsilon, delta).

    Off-diagonal entries are p = (1 - delta)/(e^eps + m) and the diagonal is
    (e^eps + m*delta)/(e^eps + m), so the binding identity
    diag = e^eps * p + delta holds with zero slack.  delta = 1 degenerates
    to the identity matrix: technically private, no privacy at all.
    """
    if m < 1:
        raise ParameterRangeError("m must be >= 1")
    if exact:
        e_eps, delta = params.exact_pair()
        p = (1 - delta) / (e_eps + m)
    else:
        p = (1.0 - params.delta) / (math.exp(params.epsilon) + m)
    if float(p) > 1.0 / (m + 1) + 1e-12:
        raise ParameterRangeError(
            f"optimal flip probability {p} exceeds 1/(m+1); "
            f"invalid privacy budget")
    return symmetric_matrix(m, p)


def exponential_to_product(spec: ExponentialSpec) -> ProductSpec:
    """Equivalent product spec for a hamming-utility exponential spec."""
    if not isinstance(spec.utility, HammingUtility):
        raise ParameterRangeError(
            "only hamming-utility specs have a product equivalent")
    e_k = spec.utility.e_k
    if e_k is not None:
        p = Fraction(1) / (e_k + spec.space.m)
    else:
        p = p_from_k(spec.utility.k, spec.space.m)
    return ProductSpec(spec.space, spec.n, symmetric_matrix(spec.space.m, p))


def product_to_exponential(spec: ProductSpec) -> ExponentialSpec:
    """Equivalent hamming spec for a symmetric product spec."""
    p = spec.matrix.symmetric_p()
    if p is None:
        raise ParameterRangeError(
            "only symmetric matrices have a hamming-utility equivalent")
    if spec.matrix._fractions is not None and p > 0:
        p_q = spec.matrix.fractions()[0][1]
        utility = HammingUtility.from_e_k(1 / p_q - spec.space.m)
    else:
        utility = HammingUtility(k_from_p(p, spec.space.m))
    return ExponentialSpec(spec.space, spec.n, utility)


def matrix_expected_error(matrix: SolutionMatrix, n: int) -> float:
    """Worst-case expected error of the product mechanism a matrix defines."""
    return n * float(np.max(1.0 - np.diag(matrix.values)))


def _subset_mask_table(size: int) -> np.ndarray:
    """(2^size, size) 0/1 table of all subsets of the category set."""
    masks = np.arange(1 << size)[:, None]
    return ((masks >> np.arange(size)) & 1).astype(np.float64)


def batch_matrix_margins(mats: np.ndarray, params: PrivacyParams) -> np.ndarray:
    """Worst privacy margin of each parent matrix in a (B, s, s) batch.

    Evaluates e^eps * P_j(A) + delta - P_i(A) for every ordered category
    pair (i, j) and every nonempty proper subset A, vectorised; equals the
    margin verify_matrix reports for general matrices (up to rounding).
    """
    mats = np.asarray(mats, dtype=np.float64)
    size = mats.shape[-1]
    table = _subset_mask_table(size)[1:-1]          # drop empty and full
    psub = mats @ table.T                           # (B, s, subsets)
    e_eps = math.exp(params.epsilon)
    margins = (e_eps * psub[:, None, :, :] + params.delta
               - psub[:, :, None, :])               # (B, i, j, subsets)
    eye = np.eye(size, dtype=bool)
    margins[:, eye] = np.inf                        # ignore i == j
    return margins.min(axis=(1, 2, 3))


def sample_feasible_matrices(m: int, params: PrivacyParams, count: int,
                             rng: np.random.Generator, *,
                             batch: int = 4096,
                             max_batches: int = 2000,
                             tolerance: float = TOLERANCE) -> np.ndarray:
    """Draw row-stochastic matrices from the flat simplex and keep those
    whose parent mechanism is private at (epsilon, delta).

    Returns a (count, m+1, m+1) array.  Raises if the acceptance rate is so
    low that ``max_batches`` rounds cannot fill the request.
    """
    size = m + 1
    out = []
    have = 0
    for _ in range(max_batches):
        mats = rng.dirichlet(np.ones(size), size=(batch, size))
        keep = mats[batch_matrix_margins(mats, params) >= -tolerance]
        if keep.shape[0]:
            out.append(keep)
            have += keep.shape[0]
        if have >= count:
            return np.concatenate(out)[:count]
    raise RuntimeError(
        f"only {have} of {count} requested feasible matrices found after "
        f"{max_batches} batches; the feasible region at eps={params.epsilon}, "
        f"delta={params.delta} is too small for rejection sampling")
