"""Decision procedures for (epsilon, delta)-differential privacy.

A mechanism over a finite database space is private iff for every ordered
neighbor pair (d, d') and every output set A,

    P(X_d in A) <= e^eps * P(X_d' in A) + delta.

``verify_bruteforce`` checks that inequality on every nonempty proper subset
of the space and is the ground-truth oracle.  ``verify_reduced`` cuts the
workload using sufficient sets: per pair, only the set S of outputs strictly
more likely under d than under d' can matter.  Three reductions apply, from
strongest to weakest:

* hamming-utility and symmetric-matrix mechanisms have a single utility-gap
  level on S, so one check of S itself per pair settles every subset;
* mechanisms with a provably constant normaliser and delta = 0 need one
  check per utility-gap level set (the cells partitioning S);
* any other mechanism needs every nonempty subset of S, which is still far
  smaller than the full subset lattice.

Set membership compares log-probabilities with a tie band: gaps within
``TIE_BAND`` count as ties and are excluded, since exact ties carry no
utility gap and cannot tighten any margin.  The exact-rational mode redoes
the arithmetic in ``fractions.Fraction`` (mechanism parameters are taken at
their exact binary-float values unless exact rationals are supplied) and
uses strict comparisons with no tolerance.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .core import (
    DEFAULT_ENUM_BUDGET,
    DEFAULT_SUBSET_BUDGET,
    CategorySpace,
    Database,
    DatabaseSet,
    NeighborPair,
    database_from_index,
    database_index,
    naive_check_count,
    space_size,
)
from .errors import (
    DataFormatError,
    EnumerationBudgetError,
    ExactModeError,
    ParameterRangeError,
)
from .mechanisms import ExponentialSpec, HammingUtility, ProductSpec, SolutionMatrix

#: Slack added to every margin comparison to absorb float rounding.
TOLERANCE = 1e-12

#: Log-probability gaps inside this band are ties, excluded from S.
TIE_BAND = 1e-12


@dataclass(frozen=True)
class PrivacyParams:
    """The privacy budget (epsilon >= 0, 0 <= delta <= 1).

    delta = 1 is the trivial regime: every mechanism qualifies.  For exact
    verification the pair (e^epsilon, delta) may be pinned as rationals;
    otherwise the exact binary values of the floats are used.
    """

    epsilon: float
    delta: float
    e_eps_exact: Fraction | None = None
    delta_exact: Fraction | None = None

    def __post_init__(self):
        if math.isnan(self.epsilon) or self.epsilon < 0:
            raise ParameterRangeError(f"epsilon must be >= 0, got {self.epsilon}")
        if math.isnan(self.delta) or not 0 <= self.delta <= 1:
            raise ParameterRangeError(
                f"delta must lie in [0, 1], got {self.delta}")

    @classmethod
    def from_exact(cls, e_eps: Fraction, delta: Fraction) -> "PrivacyParams":
        e_eps, delta = Fraction(e_eps), Fraction(delta)
        if e_eps < 1:
            raise ParameterRangeError("e^epsilon must be >= 1")
        return cls(math.log(e_eps), float(delta), e_eps, delta)

    @property
    def trivial(self) -> bool:
        return self.delta >= 1

    def exact_pair(self) -> tuple[Fraction, Fraction]:
        e_eps = (self.e_eps_exact if self.e_eps_exact is not None
                 else Fraction(math.exp(self.epsilon)))
        delta = (self.delta_exact if self.delta_exact is not None
                 else Fraction(self.delta))
        return e_eps, delta


@dataclass(frozen=True)
class SetCheckResult:
    holds: bool
    margin: float


@dataclass(frozen=True)
class ConditionResult:
    """Outcome of a closed-form privacy condition."""

    satisfied: bool
    slack: float
    trivial: bool = False


@dataclass(frozen=True)
class SufficientSet:
    """The worst-case output set S for one ordered neighbor pair.

    ``alpha_levels`` and ``partition`` (S split into utility-gap level sets)
    are only populated when the mechanism's normaliser is provably fixed.
    """

    pair: NeighborPair
    members: DatabaseSet
    alpha_levels: tuple[float, ...] | None = None
    partition: tuple[DatabaseSet, ...] | None = None


@dataclass
class VerificationReport:
    """Verdict plus the evidence trail of a verification run."""

    verdict: str                       # "private" | "not-private"
    method: str                        # closed-form | sufficient-set | partition | brute-force
    epsilon: float
    delta: float
    margin: float                      # min over performed checks; inf if none
    binding_pair: NeighborPair | None
    binding_set: DatabaseSet | None
    checks_performed: int
    checks_naive: int
    space: CategorySpace
    n: int
    tolerance: float = TOLERANCE
    exact: bool = False
    trivial: bool = False

    @property
    def private(self) -> bool:
        return self.verdict == "private"

    def to_json_dict(self) -> dict:
        pair = None
        if self.binding_pair is not None:
            pair = {
                "d": list(self.binding_pair.d.labels(self.space)),
                "d_prime": list(self.binding_pair.d_prime.labels(self.space)),
                "differing_row": self.binding_pair.differing_row,
            }
        members = None
        if self.binding_set is not None:
            members = [list(d.labels(self.space))
                       for d in self.binding_set.databases()]
        return {
            "verdict": self.verdict,
            "method": self.method,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "exact": self.exact,
            "trivial": self.trivial,
            "margin": None if math.isinf(self.margin) else self.margin,
            "binding_pair": pair,
            "binding_set": members,
            "checks_performed": str(self.checks_performed),
            "checks_naive": str(self.checks_naive),
            "tolerance": self.tolerance,
        }


def _routing(spec) -> str:
    """Which reduction the theory licenses for this spec."""
    if isinstance(spec, ExponentialSpec):
        if isinstance(spec.utility, HammingUtility):
            return "single-set"
        if spec.fixed_normalizer:
            return "fixed-c"
        return "general"
    if isinstance(spec, ProductSpec):
        return "single-set" if spec.matrix.is_symmetric() else "general"
    raise TypeError(f"not a mechanism spec: {type(spec).__name__}")


def _validate_fixed_normalizer(spec: ExponentialSpec, budget: int) -> None:
    """Recompute every log-normaliser and reject a false fixed-C claim."""
    logs = [-spec.log_prefactor(i, budget) for i in range(spec.state_count)]
    spread = max(logs) - min(logs)
    if spread > 1e-9:
        raise DataFormatError(
            f"utility table is marked as having a fixed normaliser, but the "
            f"log-normalisers spread over {spread:.3e}")


def _iter_index_pairs(spec, budget: int = DEFAULT_ENUM_BUDGET):
    """All ordered neighbor pairs as (index_d, index_d_prime, differing_row)."""
    space, n = spec.space, spec.n
    digits = spec._digit_table(budget)
    places = [space.size ** (n - 1 - i) for i in range(n)]
    for a in range(space_size(space, n)):
        row_vals = digits[a]
        for i in range(n):
            va = int(row_vals[i])
            for v in range(space.size):
                if v != va:
                    yield a, a + (v - va) * places[i], i


def _pair_obj(spec, ia: int, ib: int, row: int) -> NeighborPair:
    return NeighborPair(database_from_index(spec.space, spec.n, ia),
                        database_from_index(spec.space, spec.n, ib), row)


def _members_float(spec, ia: int, ib: int, budget: int) -> np.ndarray:
    la = spec.log_pmf_row(ia, budget)
    lb = spec.log_pmf_row(ib, budget)
    with np.errstate(invalid="ignore"):
        diff = la - lb
    member = diff > TIE_BAND
    member[np.isnan(diff)] = False   # both probabilities zero
    return np.nonzero(member)[0]


def _members_exact(pa: list[Fraction], pb: list[Fraction]) -> list[int]:
    return [i for i, (x, y) in enumerate(zip(pa, pb)) if x > y]


def _alpha_values(spec, ia: int, ib: int, members: np.ndarray,
                  budget: int) -> np.ndarray:
    """Utility gaps u(d, .) - u(d', .) on the members of S."""
    if isinstance(spec, ExponentialSpec):
        if isinstance(spec.utility, HammingUtility):
            return np.full(len(members), spec.utility.k)
        ua = spec.utility_row(ia, budget)
        ub = spec.utility_row(ib, budget)
        return ua[members] - ub[members]
    # symmetric product: a single level, the log ratio of the dominant to
    # the dominated entry (members sit on whichever side is more likely)
    p = spec.matrix.symmetric_p()
    diag = float(spec.matrix.values[0, 0])
    hi, lo = max(diag, p), min(diag, p)
    if lo == 0.0:
        return np.full(len(members), math.inf)
    return np.full(len(members), math.log(hi) - math.log(lo))


def _partition_cells(alphas: np.ndarray, members: np.ndarray):
    """Group members by exact utility-gap value, ascending."""
    cells = []
    for level in sorted(set(alphas.tolist())):
        cells.append((level, members[alphas == level]))
    return cells


def sufficient_set(spec, pair: NeighborPair, *,
                   budget_enum: int = DEFAULT_ENUM_BUDGET,
                   exact: bool = False) -> SufficientSet:
    """Outputs strictly more likely under pair.d than under pair.d_prime.

    For mechanisms with a fixed normaliser the utility-gap levels and the
    corresponding partition of S are attached as well.
    """
    if pair.d.n != spec.n:
        raise DataFormatError(f"pair has {pair.d.n} rows, spec expects {spec.n}")
    ia = database_index(spec.space, pair.d)
    ib = database_index(spec.space, pair.d_prime)
    if exact:
        pa = spec.exact_pmf_row(ia, budget_enum)
        pb = spec.exact_pmf_row(ib, budget_enum)
        members = np.asarray(_members_exact(pa, pb), dtype=np.int64)
    else:
        members = _members_float(spec, ia, ib, budget_enum)
    member_set = DatabaseSet(spec.space, spec.n,
                             tuple(int(i) for i in members))
    route = _routing(spec)
    if route == "fixed-c":
        _validate_fixed_normalizer(spec, budget_enum)
    if route == "general":
        return SufficientSet(pair, member_set)
    alphas = _alpha_values(spec, ia, ib, members, budget_enum)
    cells = _partition_cells(alphas, members)
    return SufficientSet(
        pair, member_set,
        alpha_levels=tuple(level for level, _ in cells),
        partition=tuple(DatabaseSet(spec.space, spec.n,
                                    tuple(int(i) for i in idx))
                        for _, idx in cells))


def dp_holds_on_set(spec, pair: NeighborPair, A: DatabaseSet,
                    params: PrivacyParams, *,
                    budget_enum: int = DEFAULT_ENUM_BUDGET,
                    tolerance: float = TOLERANCE,
                    exact: bool = False) -> SetCheckResult:
    """Check the privacy inequality for one pair on one output set.

    The margin is e^eps * P(X_d' in A) + delta - P(X_d in A); the inequality
    holds when the margin clears ``-tolerance`` (0 in exact mode).
    """
    if len(A) == 0:
        raise DataFormatError("output set must be nonempty")
    ia = database_index(spec.space, pair.d)
    ib = database_index(spec.space, pair.d_prime)
    idx = list(A.indices)
    if exact:
        e_eps, delta = params.exact_pair()
        pa = spec.exact_pmf_row(ia, budget_enum)
        pb = spec.exact_pmf_row(ib, budget_enum)
        margin = (e_eps * sum(pb[i] for i in idx) + delta
                  - sum(pa[i] for i in idx))
        return SetCheckResult(margin >= 0, float(margin))
    pa = spec.pmf_row(ia, budget_enum)
    pb = spec.pmf_row(ib, budget_enum)
    margin = (math.exp(params.epsilon) * float(pb[idx].sum())
              + params.delta - float(pa[idx].sum()))
    return SetCheckResult(margin >= -tolerance, margin)


def _exact_subset_scan(pa, pb, e_eps: Fraction, delta: Fraction,
                       include_full: bool):
    """Gray-code subset walk in exact rational arithmetic."""
    k = len(pa)
    full = (1 << k) - 1
    n_checks = full - (0 if include_full else 1)
    if n_checks <= 0:
        return None, 0, 0
    sa = sb = Fraction(0)
    mask = 0
    best = None
    best_mask = 0
    for i in range(1, full + 1):
        bit = (i & -i).bit_length() - 1
        flip = 1 << bit
        mask ^= flip
        if mask & flip:
            sa += pa[bit]
            sb += pb[bit]
        else:
            sa -= pa[bit]
            sb -= pb[bit]
        if mask == full and not include_full:
            continue
        margin = e_eps * sb + delta - sa
        if best is None or margin < best:
            best = margin
            best_mask = mask
    return best, best_mask, n_checks


class _Accumulator:
    """Merge per-pair results into a report, keeping the worst margin."""

    def __init__(self):
        self.margin = math.inf
        self.exact_margin: Fraction | None = None
        self.binding = None           # (ia, ib, row, member_indices)
        self.checks = 0

    def add(self, margin, binding, checks: int) -> None:
        self.checks += checks
        if margin is None:
            return
        current = self.exact_margin if self.exact_margin is not None else self.margin
        if self.binding is None or margin < current:
            if isinstance(margin, Fraction):
                self.exact_margin = margin
                self.margin = float(margin)
            else:
                self.margin = float(margin)
            self.binding = binding


def _build_report(spec, params, acc: _Accumulator, method: str,
                  tolerance: float, exact: bool) -> VerificationReport:
    if exact:
        ok = acc.exact_margin is None or acc.exact_margin >= 0
    else:
        ok = acc.margin >= -tolerance
    pair = bset = None
    if acc.binding is not None:
        ia, ib, row, members = acc.binding
        pair = _pair_obj(spec, ia, ib, row)
        bset = DatabaseSet(spec.space, spec.n, tuple(int(i) for i in members))
    return VerificationReport(
        verdict="private" if ok else "not-private",
        method=method,
        epsilon=params.epsilon,
        delta=params.delta,
        margin=acc.margin,
        binding_pair=pair,
        binding_set=bset,
        checks_performed=acc.checks,
        checks_naive=naive_check_count(spec.space, spec.n),
        space=spec.space,
        n=spec.n,
        tolerance=0.0 if exact else tolerance,
        exact=exact,
    )


def _trivial_report(spec, params, method: str, tolerance: float,
                    exact: bool) -> VerificationReport:
    return VerificationReport(
        verdict="private", method=method, epsilon=params.epsilon,
        delta=params.delta, margin=math.inf, binding_pair=None,
        binding_set=None, checks_performed=0,
        checks_naive=naive_check_count(spec.space, spec.n),
        space=spec.space, n=spec.n,
        tolerance=0.0 if exact else tolerance, exact=exact, trivial=True)


def _run_pairs(spec, pair_fn, threads: int):
    """Apply pair_fn to every ordered neighbor pair, optionally in a pool.

    Results come back in enumeration order either way, so the report's
    min-margin reduction is deterministic regardless of scheduling.
    """
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(pair_fn, list(_iter_index_pairs(spec))))
    return map(pair_fn, _iter_index_pairs(spec))


def verify_reduced(spec, params: PrivacyParams, *,
                   budget_enum: int = DEFAULT_ENUM_BUDGET,
                   budget_subsets: int = DEFAULT_SUBSET_BUDGET,
                   threads: int = 1,
                   tolerance: float = TOLERANCE,
                   exact: bool = False) -> VerificationReport:
    """Decide privacy using the strongest reduction the spec admits.

    Routing: hamming / symmetric-matrix specs check S itself per pair (one
    check, any delta); fixed-normaliser specs with delta = 0 check each
    utility-gap cell; everything else checks every nonempty subset of S.
    """
    route = _routing(spec)
    if route == "fixed-c":
        _validate_fixed_normalizer(spec, budget_enum)
    if route == "single-set":
        method = "sufficient-set"
    elif route == "fixed-c" and params.delta == 0:
        method = "partition"
    else:
        method = "sufficient-set"
    if params.trivial:
        return _trivial_report(spec, params, method, tolerance, exact)
    if exact and not spec.supports_exact:
        raise ExactModeError(
            f"exact mode is not available for {spec.kind!r} specs")

    e_eps_f = math.exp(params.epsilon)
    if exact:
        e_eps_q, delta_q = params.exact_pair()

    def handle(pair_idx):
        ia, ib, row = pair_idx
        if exact:
            pa = spec.exact_pmf_row(ia, budget_enum)
            pb = spec.exact_pmf_row(ib, budget_enum)
            members = _members_exact(pa, pb)
            if not members:
                return None, None, 0
            if route == "single-set":
                margin = (e_eps_q * sum(pb[i] for i in members) + delta_q
                          - sum(pa[i] for i in members))
                return margin, (ia, ib, row, members), 1
            # general route, exact
            if len(members) > budget_subsets:
                raise EnumerationBudgetError(
                    f"sufficient set holds {len(members)} databases; "
                    f"enumerating its subsets exceeds the budget of "
                    f"{budget_subsets}", len(members))
            margin, mask, checks = _exact_subset_scan(
                [pa[i] for i in members], [pb[i] for i in members],
                e_eps_q, delta_q, include_full=True)
            witness = [members[i] for i in range(len(members)) if mask >> i & 1]
            return margin, (ia, ib, row, witness), checks

        pa = spec.pmf_row(ia, budget_enum)
        pb = spec.pmf_row(ib, budget_enum)
        members = _members_float(spec, ia, ib, budget_enum)
        if members.size == 0:
            return None, None, 0
        if route == "single-set":
            margin = (e_eps_f * float(pb[members].sum()) + params.delta
                      - float(pa[members].sum()))
            return margin, (ia, ib, row, members), 1
        if route == "fixed-c" and params.delta == 0:
            alphas = _alpha_values(spec, ia, ib, members, budget_enum)
            best = math.inf
            best_cell = members
            checks = 0
            for _, cell in _partition_cells(alphas, members):
                margin = (e_eps_f * float(pb[cell].sum()) + params.delta
                          - float(pa[cell].sum()))
                checks += 1
                if margin < best:
                    best = margin
                    best_cell = cell
            return best, (ia, ib, row, best_cell), checks
        # general: every nonempty subset of S
        if len(members) > budget_subsets:
            raise EnumerationBudgetError(
                f"sufficient set holds {len(members)} databases; enumerating "
                f"its subsets exceeds the budget of {budget_subsets}",
                len(members))
        margin, mask, checks = kernels.subset_scan(
            pa[members], pb[members], e_eps_f, params.delta,
            include_full=True)
        witness = members[[i for i in range(len(members)) if mask >> i & 1]]
        return margin, (ia, ib, row, witness), checks

    acc = _Accumulator()
    for margin, binding, checks in _run_pairs(spec, handle, threads):
        acc.add(margin, binding, checks)
    return _build_report(spec, params, acc, method, tolerance, exact)


def verify_bruteforce(spec, params: PrivacyParams, *,
                      budget_subsets: int = DEFAULT_SUBSET_BUDGET,
                      threads: int = 1,
                      tolerance: float = TOLERANCE,
                      exact: bool = False) -> VerificationReport:
    """Ground-truth oracle: check every nonempty proper subset of the space
    for every ordered neighbor pair and record the worst margin.
    """
    size = spec.state_count
    if size > budget_subsets:
        raise EnumerationBudgetError(
            f"database space holds {size} states; the brute-force oracle "
            f"enumerates 2^{size} - 2 subsets per pair, over the budget of "
            f"{budget_subsets}", size)
    if params.trivial:
        return _trivial_report(spec, params, "brute-force", tolerance, exact)
    if exact and not spec.supports_exact:
        raise ExactModeError(
            f"exact mode is not available for {spec.kind!r} specs")

    e_eps_f = math.exp(params.epsilon)
    if exact:
        e_eps_q, delta_q = params.exact_pair()

    def handle(pair_idx):
        ia, ib, row = pair_idx
        if exact:
            pa = spec.exact_pmf_row(ia)
            pb = spec.exact_pmf_row(ib)
            margin, mask, checks = _exact_subset_scan(
                pa, pb, e_eps_q, delta_q, include_full=False)
        else:
            margin, mask, checks = kernels.subset_scan(
                spec.pmf_row(ia), spec.pmf_row(ib), e_eps_f, params.delta,
                include_full=False)
        witness = [i for i in range(size) if mask >> i & 1]
        return margin, (ia, ib, row, witness), checks

    acc = _Accumulator()
    for margin, binding, checks in _run_pairs(spec, handle, threads):
        acc.add(margin, binding, checks)
    return _build_report(spec, params, acc, "brute-force", tolerance, exact)


def exp_dp_condition(k: float, params: PrivacyParams, m: int, *,
                     e_k: Fraction | None = None,
                     exact: bool = False) -> ConditionResult:
    """Closed form for the hamming-utility mechanism: private iff
    e^k <= (e^eps + m*delta) / (1 - delta).  Necessary and sufficient.
    """
    if math.isnan(k) or k < 0:
        raise ParameterRangeError(f"k must be >= 0, got {k}")
    if m < 1:
        raise ParameterRangeError("m must be >= 1")
    if params.trivial:
        return ConditionResult(True, math.inf, trivial=True)
    if exact:
        e_eps, delta = params.exact_pair()
        if e_k is None:
            if math.isinf(k):
                return ConditionResult(False, -math.inf)
            e_k = Fraction(math.exp(k))
        bound = (e_eps + m * delta) / (1 - delta)
        return ConditionResult(e_k <= bound, float(bound - e_k))
    bound = (math.exp(params.epsilon) + m * params.delta) / (1 - params.delta)
    slack = bound - math.exp(k)
    return ConditionResult(slack >= 0, slack)


def product_dp_condition(p: float, params: PrivacyParams, m: int, *,
                         p_exact: Fraction | None = None,
                         exact: bool = False) -> ConditionResult:
    """Closed form for the symmetric product mechanism: private iff
    p >= (1 - delta) / (e^eps + m).  Necessary and sufficient.
    """
    if m < 1:
        raise ParameterRangeError("m must be >= 1")
    if math.isnan(p) or not 0 <= p <= 1 / (m + 1) + 1e-12:
        raise ParameterRangeError(
            f"flip probability must lie in [0, 1/(m+1)], got {p}")
    if params.trivial:
        return ConditionResult(True, float(p), trivial=True)
    if exact:
        e_eps, delta = params.exact_pair()
        p_q = Fraction(p) if p_exact is None else Fraction(p_exact)
        threshold = (1 - delta) / (e_eps + m)
        return ConditionResult(p_q >= threshold, float(p_q - threshold))
    threshold = (1 - params.delta) / (math.exp(params.epsilon) + m)
    slack = p - threshold
    return ConditionResult(slack >= 0, slack)


def verify_matrix(matrix: SolutionMatrix, params: PrivacyParams, *,
                  space: CategorySpace | None = None,
                  budget_subsets: int = DEFAULT_SUBSET_BUDGET,
                  tolerance: float = TOLERANCE,
                  exact: bool = False) -> VerificationReport:
    """Decide privacy of a parent matrix; the verdict carries over to the
    product mechanism it generates for every row count.

    Symmetric matrices short-circuit through the closed form; general
    matrices get the one-row brute force: all ordered category pairs over
    all nonempty proper subsets of the category set.
    """
    if space is None:
        space = CategorySpace(tuple(str(i) for i in range(matrix.size)))
    elif space.size != matrix.size:
        raise DataFormatError(
            f"matrix is {matrix.size}x{matrix.size} but the space has "
            f"{space.size} categories")
    parent = ProductSpec(space, 1, matrix)

    p = matrix.symmetric_p()
    if p is not None and not params.trivial:
        # Closed form: private iff p >= (1 - delta)/(e^eps + m), which is the
        # margin of the singleton {category 0} for the ordered pair (0, 1).
        if exact:
            fracs = matrix.fractions()
            e_eps, delta = params.exact_pair()
            margin = e_eps * fracs[1][0] + delta - fracs[0][0]
            margin_val = float(margin)
            ok = margin >= 0
        else:
            margin_val = (math.exp(params.epsilon) * float(matrix.values[1, 0])
                          + params.delta - float(matrix.values[0, 0]))
            ok = margin_val >= -tolerance
        binding_pair = NeighborPair(Database((0,)), Database((1,)), 0)
        return VerificationReport(
            verdict="private" if ok else "not-private",
            method="closed-form",
            epsilon=params.epsilon, delta=params.delta,
            margin=margin_val,
            binding_pair=binding_pair,
            binding_set=DatabaseSet(space, 1, (0,)),
            checks_performed=1,
            checks_naive=naive_check_count(space, 1),
            space=space, n=1,
            tolerance=0.0 if exact else tolerance, exact=exact)

    report = verify_bruteforce(parent, params, budget_subsets=budget_subsets,
                               tolerance=tolerance, exact=exact)
    return report
