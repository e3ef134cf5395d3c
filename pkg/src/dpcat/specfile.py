"""Mechanism spec files: a small hand-writable key-value format.

Example::

    # exponential mechanism with the hamming utility
    type = exponential
    utility = hamming
    k = 0.693
    categories = hobbies.txt
    n = 6

Product specs use ``p = <real>`` (symmetric) or ``matrix = <csv>``; table
utilities point at an NxN CSV over the canonical enumeration order and may
assert ``fixed_c = true``.  Relative paths resolve against the spec file's
directory.  ``k = inf`` is the no-noise endpoint.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .core import load_category_space, space_size
from .errors import DataFormatError
from .mechanisms import (
    ExponentialSpec,
    HammingUtility,
    NegL1Utility,
    ProductSpec,
    SolutionMatrix,
    TableUtility,
    symmetric_matrix,
)

_KNOWN_KEYS = {"type", "utility", "k", "p", "matrix", "table", "fixed_c",
               "categories", "n"}


def parse_kv(text: str, origin: str = "<spec>") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataFormatError(f"{origin}: line {lineno}: expected "
                                  f"'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise DataFormatError(f"{origin}: line {lineno}: unknown key "
                                  f"{key!r}")
        if key in out:
            raise DataFormatError(f"{origin}: line {lineno}: duplicate key "
                                  f"{key!r}")
        out[key] = value
    return out


def _require(kv: dict, key: str, origin) -> str:
    if key not in kv:
        raise DataFormatError(f"{origin}: missing required key {key!r}")
    return kv[key]


def _parse_float(value: str, key: str, origin) -> float:
    if value.lower() in ("inf", "infinity"):
        return math.inf
    try:
        return float(value)
    except ValueError:
        raise DataFormatError(f"{origin}: {key} = {value!r} is not a number"
                              ) from None


def load_table_csv(path, size: int) -> np.ndarray:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for record in csv.reader(fh):
            if record:
                try:
                    rows.append([float(x) for x in record])
                except ValueError as exc:
                    raise DataFormatError(f"{path}: bad table entry: {exc}")
    table = np.asarray(rows, dtype=np.float64)
    if table.shape != (size, size):
        raise DataFormatError(
            f"{path}: utility table must be {size}x{size}, got {table.shape}")
    return table


def load_spec_file(path, *, exact: bool = False):
    """Parse a mechanism spec file into an ExponentialSpec or ProductSpec.

    The categories path used is attached to the returned spec as
    ``categories_path`` so converters can reference it.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataFormatError(f"cannot read spec file: {exc}") from None
    kv = parse_kv(text, origin=str(path))
    base = path.parent

    cat_path = base / _require(kv, "categories", path)
    space = load_category_space(cat_path)
    try:
        n = int(_require(kv, "n", path))
    except ValueError:
        raise DataFormatError(f"{path}: n = {kv['n']!r} is not an integer"
                              ) from None

    mech_type = _require(kv, "type", path)
    if mech_type == "exponential":
        utility_name = _require(kv, "utility", path)
        if utility_name == "hamming":
            utility = HammingUtility(_parse_float(_require(kv, "k", path),
                                                  "k", path))
        elif utility_name == "l1":
            utility = NegL1Utility()
        elif utility_name == "table":
            table_path = base / _require(kv, "table", path)
            table = load_table_csv(table_path, space_size(space, n))
            fixed = kv.get("fixed_c", "false").lower() in ("true", "1", "yes")
            utility = TableUtility(space, n, table, assert_fixed_c=fixed)
        else:
            raise DataFormatError(f"{path}: unknown utility {utility_name!r}")
        spec = ExponentialSpec(space, n, utility)
        if utility_name == "table":
            spec.table_path = str(table_path)
    elif mech_type == "product":
        if ("p" in kv) == ("matrix" in kv):
            raise DataFormatError(
                f"{path}: product specs need exactly one of 'p' or 'matrix'")
        if "p" in kv:
            matrix = symmetric_matrix(space.m, _parse_float(kv["p"], "p", path))
        else:
            matrix = SolutionMatrix.from_csv(base / kv["matrix"], exact=exact)
        spec = ProductSpec(space, n, matrix)
    else:
        raise DataFormatError(f"{path}: unknown mechanism type {mech_type!r}")

    spec.categories_path = str(cat_path)
    return spec


def save_spec_file(spec, path, categories_path=None) -> None:
    """Write a spec file for a hamming-exponential or product mechanism.

    Non-symmetric product matrices are written to a sibling ``<stem>.matrix.csv``.
    """
    path = Path(path)
    categories_path = categories_path or getattr(spec, "categories_path", None)
    if categories_path is None:
        raise DataFormatError("no categories path known for this spec")
    # spec files resolve paths against their own directory, so pin the
    # category list with an absolute path when writing elsewhere
    categories_path = Path(categories_path).resolve()
    lines = []
    if isinstance(spec, ExponentialSpec):
        if isinstance(spec.utility, HammingUtility):
            k = spec.utility.k
            lines += ["type = exponential", "utility = hamming",
                      f"k = {'inf' if math.isinf(k) else repr(k)}"]
        elif isinstance(spec.utility, NegL1Utility):
            lines += ["type = exponential", "utility = l1"]
        else:
            table_path = getattr(spec, "table_path", None)
            if table_path is None:
                table_path = path.with_suffix(".table.csv")
                np.savetxt(table_path, spec.utility.values, delimiter=",")
            lines += ["type = exponential", "utility = table",
                      f"table = {Path(table_path).resolve()}"]
            if spec.utility.assert_fixed_c:
                lines.append("fixed_c = true")
    elif isinstance(spec, ProductSpec):
        lines.append("type = product")
        p = spec.matrix.symmetric_p()
        if p is not None:
            lines.append(f"p = {p!r}")
        else:
            matrix_path = path.with_suffix(".matrix.csv")
            with open(matrix_path, "w", encoding="utf-8") as fh:
                spec.matrix.to_csv(fh)
            lines.append(f"matrix = {matrix_path.name}")
    else:
        raise DataFormatError(f"cannot serialise {type(spec).__name__}")
    lines += [f"categories = {categories_path}", f"n = {spec.n}"]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
