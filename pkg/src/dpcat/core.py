"""Finite categorical database spaces and their exhaustive enumeration.

A category space is an ordered alphabet of ``m + 1`` labels; a database is a
length-``n`` vector of category indices, i.e. a point of the product space
with ``(m + 1) ** n`` elements.  Everything downstream (probability tables,
subset bitmasks, golden files) relies on one canonical enumeration order:
base-``(m + 1)`` lexicographic with row 0 as the most significant digit.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import DataFormatError, EnumerationBudgetError, LengthMismatchError

#: Largest (m + 1) ** n for which full database streams are enumerated.
DEFAULT_ENUM_BUDGET = 1 << 20

#: Largest (m + 1) ** n for which *subsets* of the space may be enumerated
#: (the brute-force verifier walks 2 ** ((m + 1) ** n) - 2 of them).
DEFAULT_SUBSET_BUDGET = 24


@dataclass(frozen=True)
class CategorySpace:
    """The finite alphabet of ``m + 1`` distinct category labels."""

    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) < 2:
            raise DataFormatError("a category space needs at least two labels")
        if len(set(self.labels)) != len(self.labels):
            raise DataFormatError("category labels must be pairwise distinct")

    @property
    def m(self) -> int:
        return len(self.labels) - 1

    @property
    def size(self) -> int:
        """Number of categories, m + 1."""
        return len(self.labels)

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise DataFormatError(f"unknown category label {label!r}") from None


@dataclass(frozen=True)
class Database:
    """A point of the product space: one category index per row."""

    rows: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(int(r) for r in self.rows))
        if len(self.rows) < 1:
            raise DataFormatError("a database needs at least one row")

    @property
    def n(self) -> int:
        return len(self.rows)

    def labels(self, space: CategorySpace) -> tuple[str, ...]:
        return tuple(space.labels[r] for r in self.rows)


@dataclass(frozen=True)
class NeighborPair:
    """An ordered pair of databases differing in exactly one row."""

    d: Database
    d_prime: Database
    differing_row: int

    def __post_init__(self):
        if self.d.n != self.d_prime.n:
            raise LengthMismatchError(
                f"neighbor pair mixes row counts {self.d.n} and {self.d_prime.n}")
        diffs = [i for i in range(self.d.n)
                 if self.d.rows[i] != self.d_prime.rows[i]]
        if diffs != [self.differing_row]:
            raise DataFormatError(
                f"databases must differ exactly at row {self.differing_row}, "
                f"but differ at rows {diffs}")

    def swapped(self) -> "NeighborPair":
        return NeighborPair(self.d_prime, self.d, self.differing_row)


@dataclass(frozen=True)
class DatabaseSet:
    """A subset of the database space, held as sorted enumeration indices."""

    space: CategorySpace
    n: int
    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(sorted(set(int(i) for i in self.indices)))
        limit = space_size(self.space, self.n)
        if idx and not (0 <= idx[0] and idx[-1] < limit):
            raise DataFormatError(
                f"set contains indices outside the space of {limit} databases")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_databases(cls, space: CategorySpace, n: int,
                       members) -> "DatabaseSet":
        return cls(space, n, tuple(database_index(space, d) for d in members))

    def databases(self) -> list[Database]:
        return [database_from_index(self.space, self.n, i) for i in self.indices]

    def mask(self) -> int:
        """Bitmask over the canonical enumeration order (bit i = database i)."""
        out = 0
        for i in self.indices:
            out |= 1 << i
        return out

    def __len__(self) -> int:
        return len(self.indices)

    def __contains__(self, d: Database) -> bool:
        return database_index(self.space, d) in set(self.indices)


def validate_database(space: CategorySpace, d: Database) -> None:
    for i, r in enumerate(d.rows):
        if not 0 <= r <= space.m:
            raise DataFormatError(
                f"row {i} holds index {r}, outside 0..{space.m}")


def hamming_distance(d: Database, d_prime: Database) -> int:
    """Number of rows on which two databases of equal length differ."""
    if d.n != d_prime.n:
        raise LengthMismatchError(
            f"cannot compare databases with {d.n} and {d_prime.n} rows")
    return sum(a != b for a, b in zip(d.rows, d_prime.rows))


def space_size(space: CategorySpace, n: int) -> int:
    if n < 1:
        raise DataFormatError("row count must be at least 1")
    return space.size ** n


def database_index(space: CategorySpace, d: Database) -> int:
    """Position of ``d`` in the canonical enumeration (row 0 most significant)."""
    validate_database(space, d)
    idx = 0
    for r in d.rows:
        idx = idx * space.size + r
    return idx


def database_from_index(space: CategorySpace, n: int, index: int) -> Database:
    size = space_size(space, n)
    if not 0 <= index < size:
        raise DataFormatError(f"index {index} outside space of {size} databases")
    rows = [0] * n
    for i in range(n - 1, -1, -1):
        index, rows[i] = divmod(index, space.size)
    return Database(tuple(rows))


def check_enum_budget(space: CategorySpace, n: int,
                      budget: int = DEFAULT_ENUM_BUDGET) -> int:
    size = space_size(space, n)
    if size > budget:
        raise EnumerationBudgetError(
            f"database space holds {size} = {space.size}^{n} states, "
            f"over the enumeration budget of {budget}", size)
    return size


def enumerate_databases(space: CategorySpace, n: int,
                        budget: int = DEFAULT_ENUM_BUDGET) -> Iterator[Database]:
    """Yield all databases in canonical order.  Restartable and stable."""
    size = check_enum_budget(space, n, budget)
    for i in range(size):
        yield database_from_index(space, n, i)


def enumerate_neighbor_pairs(space: CategorySpace, n: int,
                             budget: int = DEFAULT_ENUM_BUDGET
                             ) -> Iterator[NeighborPair]:
    """Yield all ordered pairs at hamming distance 1, n*m*(m+1)^n in total.

    Both orientations of each unordered pair are emitted, since the privacy
    inequality is checked asymmetrically.  Order: by first database, then by
    differing row, then by replacement value.
    """
    check_enum_budget(space, n, budget)
    for d in enumerate_databases(space, n, budget):
        for i in range(n):
            for v in range(space.size):
                if v == d.rows[i]:
                    continue
                rows = list(d.rows)
                rows[i] = v
                yield NeighborPair(d, Database(tuple(rows)), i)


def neighbor_pair_count(space: CategorySpace, n: int) -> int:
    return n * space.m * space_size(space, n)


def naive_check_count(space: CategorySpace, n: int) -> int:
    """Total inequality checks without any workload reduction.

    Every ordered neighbor pair is checked against every subset of the space
    except the empty set and the space itself.  Exact integer arithmetic;
    the value overflows 64 bits already for three categories and three rows.
    """
    size = space_size(space, n)
    return neighbor_pair_count(space, n) * (2 ** size - 2)


def digit_matrix(space: CategorySpace, n: int,
                 budget: int = DEFAULT_ENUM_BUDGET) -> np.ndarray:
    """(size, n) array of row values for every database, in canonical order."""
    size = check_enum_budget(space, n, budget)
    out = np.empty((size, n), dtype=np.int64)
    idx = np.arange(size)
    for i in range(n - 1, -1, -1):
        idx, out[:, i] = np.divmod(idx, space.size)
    return out


def load_category_space(path) -> CategorySpace:
    """Read a category space from a text file, one label per line."""
    with open(path, encoding="utf-8") as fh:
        labels = [line.strip() for line in fh]
    labels = [lab for lab in labels if lab]
    if not labels:
        raise DataFormatError(f"{path}: no category labels found")
    return CategorySpace(tuple(labels))


def load_database_csv(path, space: CategorySpace,
                      column: str | None = None) -> Database:
    """Read a database from a CSV of category labels.

    Without ``column`` the file is headerless and the first column is used;
    with ``column`` the first row is a header and that column is selected.
    """
    rows: list[int] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        col = 0
        if column is not None:
            try:
                header = next(reader)
            except StopIteration:
                raise DataFormatError(f"{path}: empty data file") from None
            try:
                col = header.index(column)
            except ValueError:
                raise DataFormatError(
                    f"{path}: no column named {column!r} in header {header}"
                    ) from None
        for lineno, record in enumerate(reader, start=2 if column else 1):
            if not record:
                continue
            label = record[col].strip()
            try:
                rows.append(space.index_of(label))
            except DataFormatError:
                raise DataFormatError(
                    f"{path}: row {lineno}: unknown category label {label!r}"
                    ) from None
    if not rows:
        raise DataFormatError(f"{path}: no data rows found")
    return Database(tuple(rows))
