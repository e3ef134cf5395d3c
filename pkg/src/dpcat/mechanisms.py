"""Sanitisation mechanisms over finite categorical database spaces.

Two families are provided.  The exponential mechanism assigns each candidate
output database a probability proportional to e^u for a utility function u;
the product mechanism sanitises row by row through a single row-stochastic
matrix (the parent mechanism).  With the hamming utility u = -k*h the two
families coincide under e^k = 1/p - m, which is what lets the hamming path
scale to arbitrary row counts without enumerating the space.

All probability arithmetic runs in log space and is exponentiated at the
end; e^{-k*h} underflows quickly otherwise.  Specs are immutable after
construction apart from internal memo tables and are safe to share across
threads; sampling needs a caller-owned random generator.
"""

from __future__ import annotations

import csv
import math
from fractions import Fraction

import numpy as np

from .core import (
    DEFAULT_ENUM_BUDGET,
    CategorySpace,
    Database,
    check_enum_budget,
    database_from_index,
    database_index,
    digit_matrix,
    hamming_distance,
    space_size,
    validate_database,
)
from .errors import (
    DataFormatError,
    ExactModeError,
    IncompleteUtilityError,
    ParameterRangeError,
)

#: Row-stochasticity is validated to this absolute tolerance per row;
#: matrices often arrive from text files with limited precision.
ROW_SUM_TOL = 1e-9

#: Two float matrix entries closer than this are treated as equal when
#: detecting symmetric (single-parameter) matrices.
SYMMETRY_TOL = 1e-12


def _logsumexp(values: np.ndarray) -> float:
    hi = np.max(values)
    if not np.isfinite(hi):
        return float(hi)
    return float(hi + np.log(np.sum(np.exp(values - hi))))


class HammingUtility:
    """u(d, d') = -k * hamming(d, d'), k >= 0.

    ``k = inf`` is the no-noise endpoint: all probability mass stays on the
    input database.  An exact value of e^k may be supplied for rational
    arithmetic; otherwise the binary float ``exp(k)`` is used exactly.
    """

    kind = "hamming"

    def __init__(self, k: float, e_k: Fraction | None = None):
        k = float(k)
        if math.isnan(k) or k < 0:
            raise ParameterRangeError(f"hamming utility needs k >= 0, got {k}")
        if e_k is not None and e_k < 1:
            raise ParameterRangeError("exact e^k must be >= 1")
        self.k = k
        self.e_k = e_k

    @classmethod
    def from_e_k(cls, e_k: Fraction) -> "HammingUtility":
        return cls(math.log(e_k), Fraction(e_k))

    def exact_e_k(self) -> Fraction | None:
        """Exact e^k, or None at the k = inf endpoint."""
        if math.isinf(self.k):
            return None
        if self.e_k is not None:
            return self.e_k
        return Fraction(math.exp(self.k))

    def value(self, d: Database, d_prime: Database) -> float:
        h = hamming_distance(d, d_prime)
        if math.isinf(self.k):
            return 0.0 if h == 0 else -math.inf
        return -self.k * h


class NegL1Utility:
    """u(d, d') = -sum_i |d_i - d'_i| over the numeric category indices."""

    kind = "l1"

    def value(self, d: Database, d_prime: Database) -> float:
        if d.n != d_prime.n:
            raise IncompleteUtilityError("databases differ in length")
        return -float(sum(abs(a - b) for a, b in zip(d.rows, d_prime.rows)))


class TableUtility:
    """An explicit utility table over the full database space.

    ``values[i, j]`` is the utility of releasing database j when the input
    is database i, both in canonical enumeration order.  ``assert_fixed_c``
    marks the table as having a constant normaliser; the verifier checks the
    claim before relying on it.
    """

    kind = "table"

    def __init__(self, space: CategorySpace, n: int, values,
                 assert_fixed_c: bool = False):
        size = space_size(space, n)
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (size, size):
            raise IncompleteUtilityError(
                f"utility table must be {size}x{size} for this space, "
                f"got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise IncompleteUtilityError("utility table holds non-finite entries")
        self.space = space
        self.n = n
        self.values = values
        self.assert_fixed_c = bool(assert_fixed_c)

    @classmethod
    def from_mapping(cls, space: CategorySpace, n: int, mapping,
                     assert_fixed_c: bool = False) -> "TableUtility":
        size = space_size(space, n)
        values = np.full((size, size), np.nan)
        for (d, d_prime), u in mapping.items():
            values[database_index(space, d), database_index(space, d_prime)] = u
        if np.isnan(values).any():
            missing = int(np.isnan(values).sum())
            raise IncompleteUtilityError(
                f"utility mapping leaves {missing} database pairs undefined")
        return cls(space, n, values, assert_fixed_c)

    def value(self, d: Database, d_prime: Database) -> float:
        return float(self.values[database_index(self.space, d),
                                 database_index(self.space, d_prime)])


class ExponentialSpec:
    """Exponential mechanism: P(X_d = d') = C * e^{u(d, d')} with C chosen
    per input database so the distribution sums to one.

    The stored/reported normalisation constant is the *prefactor* C (the
    reciprocal of the sum of e^u), so the probability is always
    ``exp_norm_constant(spec, d) * e^{u(d, d')}``.
    """

    def __init__(self, space: CategorySpace, n: int, utility):
        if n < 1:
            raise ParameterRangeError("row count must be at least 1")
        if isinstance(utility, TableUtility):
            if utility.space is not space and utility.space != space:
                raise IncompleteUtilityError(
                    "utility table was built for a different category space")
            if utility.n != n:
                raise IncompleteUtilityError(
                    f"utility table was built for n={utility.n}, spec has n={n}")
        self.space = space
        self.n = n
        self.utility = utility
        self._digits: np.ndarray | None = None
        self._u_rows: dict[int, np.ndarray] = {}
        self._log_rows: dict[int, np.ndarray] = {}

    @property
    def kind(self) -> str:
        return self.utility.kind

    @property
    def state_count(self) -> int:
        return space_size(self.space, self.n)

    @property
    def fixed_normalizer(self) -> bool:
        """True when the prefactor is provably the same for every input."""
        if isinstance(self.utility, HammingUtility):
            return True
        if isinstance(self.utility, TableUtility):
            return self.utility.assert_fixed_c
        return False

    @property
    def supports_exact(self) -> bool:
        return isinstance(self.utility, HammingUtility)

    def _digit_table(self, budget: int) -> np.ndarray:
        if self._digits is None:
            self._digits = digit_matrix(self.space, self.n, budget)
        return self._digits

    def utility_row(self, index: int,
                    budget: int = DEFAULT_ENUM_BUDGET) -> np.ndarray:
        """u(d_index, .) over the whole space in canonical order."""
        row = self._u_rows.get(index)
        if row is not None:
            return row
        digits = self._digit_table(budget)
        mine = digits[index]
        if isinstance(self.utility, HammingUtility):
            h = np.count_nonzero(digits != mine, axis=1).astype(np.float64)
            if math.isinf(self.utility.k):
                row = np.where(h == 0, 0.0, -np.inf)
            else:
                row = -self.utility.k * h
        elif isinstance(self.utility, NegL1Utility):
            row = -np.abs(digits - mine).sum(axis=1).astype(np.float64)
        else:
            row = self.utility.values[index].astype(np.float64)
        self._u_rows[index] = row
        return row

    def log_prefactor(self, index: int,
                      budget: int = DEFAULT_ENUM_BUDGET) -> float:
        if isinstance(self.utility, HammingUtility):
            k = self.utility.k
            if math.isinf(k):
                return 0.0
            # closed form: C = (1 + m * e^{-k}) ** -n, no enumeration needed
            return -self.n * math.log1p(self.space.m * math.exp(-k))
        return -_logsumexp(self.utility_row(index, budget))

    def log_pmf_row(self, index: int,
                    budget: int = DEFAULT_ENUM_BUDGET) -> np.ndarray:
        row = self._log_rows.get(index)
        if row is not None:
            return row
        u = self.utility_row(index, budget)
        row = u - _logsumexp(u)
        self._log_rows[index] = row
        return row

    def pmf_row(self, index: int,
                budget: int = DEFAULT_ENUM_BUDGET) -> np.ndarray:
        return np.exp(self.log_pmf_row(index, budget))

    def pmf(self, d: Database, d_prime: Database,
            budget: int = DEFAULT_ENUM_BUDGET) -> float:
        validate_database(self.space, d)
        validate_database(self.space, d_prime)
        if isinstance(self.utility, HammingUtility):
            u = self.utility.value(d, d_prime)
            if u == -math.inf:
                return 0.0
            return math.exp(self.log_prefactor(0) + u)
        index = database_index(self.space, d)
        check_enum_budget(self.space, self.n, budget)
        return float(self.pmf_row(index, budget)[database_index(self.space,
                                                                d_prime)])

    def exact_pmf_row(self, index: int,
                      budget: int = DEFAULT_ENUM_BUDGET) -> list[Fraction]:
        """Exact probabilities for the hamming utility (e^k as a rational)."""
        if not self.supports_exact:
            raise ExactModeError(
                f"exact arithmetic is only available for the hamming "
                f"utility, not {self.kind!r}")
        digits = self._digit_table(budget)
        mine = digits[index]
        hs = np.count_nonzero(digits != mine, axis=1)
        e_k = self.utility.exact_e_k()
        if e_k is None:  # k = inf: identity mechanism
            return [Fraction(1) if h == 0 else Fraction(0) for h in hs]
        denom = (e_k + self.space.m) ** self.n
        return [Fraction(e_k ** int(self.n - h), denom) for h in hs]


class SolutionMatrix:
    """Row-stochastic (m+1) x (m+1) matrix defining a parent mechanism.

    Entry [i, j] is the probability that category i is released as
    category j.  Exact rational entries may ride along for the rational
    verification mode; absent that, the binary float values themselves are
    taken as exact.
    """

    def __init__(self, values, fractions=None):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise DataFormatError(f"matrix must be square, got {values.shape}")
        if values.shape[0] < 2:
            raise DataFormatError("matrix needs at least two categories")
        if np.any(values < -ROW_SUM_TOL) or np.any(values > 1 + ROW_SUM_TOL):
            raise DataFormatError("matrix entries must lie in [0, 1]")
        sums = values.sum(axis=1)
        bad = np.where(np.abs(sums - 1.0) > ROW_SUM_TOL)[0]
        if bad.size:
            raise DataFormatError(
                f"matrix row {bad[0]} sums to {sums[bad[0]]!r}, "
                f"not 1 within {ROW_SUM_TOL}")
        self.values = values
        self.values.setflags(write=False)
        self._fractions = None
        if fractions is not None:
            self._fractions = tuple(tuple(Fraction(x) for x in row)
                                    for row in fractions)

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def fractions(self) -> tuple[tuple[Fraction, ...], ...]:
        if self._fractions is None:
            self._fractions = tuple(tuple(Fraction(x) for x in row)
                                    for row in self.values)
        return self._fractions

    def is_symmetric(self, tol: float = SYMMETRY_TOL) -> bool:
        """Constant diagonal and constant off-diagonal."""
        diag = np.diag(self.values)
        off = self.values[~np.eye(self.size, dtype=bool)]
        return (np.ptp(diag) <= tol) and (np.ptp(off) <= tol)

    def symmetric_p(self) -> float | None:
        if not self.is_symmetric():
            return None
        return float(self.values[0, 1])

    @classmethod
    def from_csv(cls, path, exact: bool = False) -> "SolutionMatrix":
        rows, fracs = [], []
        with open(path, newline="", encoding="utf-8") as fh:
            for record in csv.reader(fh):
                if not record:
                    continue
                try:
                    rows.append([float(x) for x in record])
                    if exact:
                        fracs.append([Fraction(x.strip()) for x in record])
                except (ValueError, ZeroDivisionError) as exc:
                    raise DataFormatError(f"{path}: bad matrix entry: {exc}")
        if not rows:
            raise DataFormatError(f"{path}: empty matrix file")
        return cls(np.asarray(rows), fractions=fracs if exact else None)

    def to_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        for row in self.values:
            writer.writerow([repr(float(x)) for x in row])

    def to_json_dict(self) -> dict:
        return {"size": self.size,
                "entries": [[float(x) for x in row] for row in self.values]}


class ProductSpec:
    """Row-independent sanitisation driven by one parent matrix.

    The probability of releasing d' for input d is the product over rows of
    matrix[d_i, d'_i]; rows are sanitised independently and identically.
    """

    def __init__(self, space: CategorySpace, n: int, matrix: SolutionMatrix):
        if matrix.size != space.size:
            raise DataFormatError(
                f"matrix is {matrix.size}x{matrix.size} but the space has "
                f"{space.size} categories")
        if n < 1:
            raise ParameterRangeError("row count must be at least 1")
        self.space = space
        self.n = n
        self.matrix = matrix
        self._rows: dict[int, np.ndarray] = {}
        self._digits: np.ndarray | None = None

    kind = "product"

    @property
    def state_count(self) -> int:
        return space_size(self.space, self.n)

    @property
    def fixed_normalizer(self) -> bool:
        return self.matrix.is_symmetric()

    supports_exact = True

    def _digit_table(self, budget: int) -> np.ndarray:
        if self._digits is None:
            self._digits = digit_matrix(self.space, self.n, budget)
        return self._digits

    def pmf_row(self, index: int,
                budget: int = DEFAULT_ENUM_BUDGET) -> np.ndarray:
        row = self._rows.get(index)
        if row is not None:
            return row
        digits = self._digit_table(budget)[index]
        out = np.ones(1)
        for v in digits:
            out = np.kron(out, self.matrix.values[v])
        self._rows[index] = out
        return out

    def log_pmf_row(self, index: int,
                    budget: int = DEFAULT_ENUM_BUDGET) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.pmf_row(index, budget))

    def pmf(self, d: Database, d_prime: Database,
            budget: int = DEFAULT_ENUM_BUDGET) -> float:
        validate_database(self.space, d)
        validate_database(self.space, d_prime)
        if d.n != self.n or d_prime.n != self.n:
            raise DataFormatError(f"spec expects {self.n} rows")
        out = 1.0
        for a, b in zip(d.rows, d_prime.rows):
            out *= float(self.matrix.values[a, b])
        return out

    def exact_pmf_row(self, index: int,
                      budget: int = DEFAULT_ENUM_BUDGET) -> list[Fraction]:
        digits = self._digit_table(budget)[index]
        fracs = self.matrix.fractions()
        out = [Fraction(1)]
        for v in digits:
            out = [x * y for x in out for y in fracs[v]]
        return out


def exp_pmf(spec: ExponentialSpec, d: Database, d_prime: Database,
            budget: int = DEFAULT_ENUM_BUDGET) -> float:
    """P(X_d = d') for an exponential spec."""
    return spec.pmf(d, d_prime, budget)


def exp_norm_constant(spec: ExponentialSpec, d: Database,
                      budget: int = DEFAULT_ENUM_BUDGET) -> float:
    """The normalisation prefactor C for input d, so that the probability
    of each output d' is exactly C * e^{u(d, d')}.

    For the hamming utility this is the closed form (1 + m/e^k)^{-n} and is
    the same constant for every d; general utilities fall back to an
    exhaustive log-sum-exp over the space.
    """
    validate_database(spec.space, d)
    if isinstance(spec.utility, HammingUtility):
        return math.exp(spec.log_prefactor(0))
    check_enum_budget(spec.space, spec.n, budget)
    return math.exp(spec.log_prefactor(database_index(spec.space, d), budget))


def product_pmf(spec: ProductSpec, d: Database, d_prime: Database) -> float:
    """P(X_d = d') for a product spec: the row-wise matrix product."""
    return spec.pmf(d, d_prime)


def symmetric_matrix(m: int, p) -> SolutionMatrix:
    """The one-parameter matrix: diagonal 1 - m*p, off-diagonal p.

    Requires 0 <= p <= 1/(m+1): the parent must be at least as likely to
    return the true value as any single wrong one.  ``p`` may be a Fraction,
    in which case exact entries are attached.
    """
    exact = isinstance(p, Fraction)
    p_num = float(p)
    upper = 1.0 / (m + 1)
    if not 0.0 <= p_num <= upper + 1e-12:
        raise ParameterRangeError(
            f"flip probability must lie in [0, 1/(m+1)] = [0, {upper}], "
            f"got {p_num}")
    if exact:
        fracs = [[1 - m * p if i == j else p for j in range(m + 1)]
                 for i in range(m + 1)]
        values = [[float(x) for x in row] for row in fracs]
        return SolutionMatrix(values, fractions=fracs)
    values = np.full((m + 1, m + 1), p_num)
    np.fill_diagonal(values, 1.0 - m * p_num)
    return SolutionMatrix(values)


def make_symmetric_product(space: CategorySpace, n: int, p) -> ProductSpec:
    """Product spec whose parent keeps a value with probability 1 - m*p and
    flips to each other category with probability p.
    """
    return ProductSpec(space, n, symmetric_matrix(space.m, p))


def _rowwise_sample(matrix: SolutionMatrix, d: Database,
                    rng: np.random.Generator) -> Database:
    # One uniform draw per row, in row order; row value v maps to the
    # smallest j with u < cumsum(matrix[v])[j].
    vals = np.asarray(d.rows)
    u = rng.random(d.n)
    cum = np.cumsum(matrix.values[vals], axis=1)
    out = np.sum(u[:, None] >= cum, axis=1)
    np.clip(out, 0, matrix.size - 1, out=out)
    return Database(tuple(int(x) for x in out))


def sample(spec, d: Database, rng: np.random.Generator,
           budget: int = DEFAULT_ENUM_BUDGET) -> Database:
    """Draw one sanitised database.  Deterministic given the generator state.

    Product specs (and hamming exponential specs, via their equivalent flip
    probability p = 1/(e^k + m)) sample row by row and scale to any n.
    Other utilities enumerate the output distribution, so they are limited
    to spaces within the enumeration budget.
    """
    validate_database(spec.space, d)
    if d.n != spec.n:
        raise DataFormatError(f"spec expects {spec.n} rows, database has {d.n}")
    if isinstance(spec, ProductSpec):
        return _rowwise_sample(spec.matrix, d, rng)
    if isinstance(spec.utility, HammingUtility):
        k = spec.utility.k
        p = 0.0 if math.isinf(k) else 1.0 / (math.exp(k) + spec.space.m)
        return _rowwise_sample(make_symmetric_product(spec.space, spec.n, p)
                               .matrix, d, rng)
    check_enum_budget(spec.space, spec.n, budget)
    row = spec.pmf_row(database_index(spec.space, d), budget)
    cum = np.cumsum(row)
    idx = int(np.searchsorted(cum, rng.random(), side="right"))
    idx = min(idx, spec.state_count - 1)
    return database_from_index(spec.space, spec.n, idx)
