"""Pure NumPy subset-scan backend.

Evaluates the privacy margin  e^eps * P_b(A) + delta - P_a(A)  for every
subset A of a small element set and returns the minimum.  Subset sums are
built by doubling (each sum is a balanced tree of adds, so rounding error
stays near machine precision instead of growing linearly in 2^k).

For k > _SPLIT_BITS the subset lattice is factored into low/high halves:
the low-half margin offsets are shared by every high-half mask, which keeps
memory at O(2^_SPLIT_BITS) while still accounting for every subset exactly.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

_SPLIT_BITS = 16


def _subset_sums(values: np.ndarray) -> np.ndarray:
    """sums[mask] = sum of values[i] over the set bits of mask."""
    sums = np.zeros(1)
    for v in values:
        sums = np.concatenate([sums, sums + v])
    return sums


def subset_scan(p_a, p_b, e_eps: float, delta: float,
                include_full: bool) -> tuple[float, int, int]:
    """Minimum margin over all nonempty subsets (optionally excluding the
    full set), with a witness mask and the number of subsets checked.
    """
    p_a = np.asarray(p_a, dtype=np.float64)
    p_b = np.asarray(p_b, dtype=np.float64)
    k = p_a.shape[0]
    if p_b.shape[0] != k:
        raise ValueError("probability vectors differ in length")
    n_checks = (1 << k) - 1 - (0 if include_full else 1)
    if n_checks <= 0:
        return float("inf"), 0, max(n_checks, 0)

    low = min(k, _SPLIT_BITS)
    high = k - low
    ca = _subset_sums(p_a[:low])
    cb = _subset_sums(p_b[:low])
    c = e_eps * cb - ca
    full_high = (1 << high) - 1

    # Minima of the low-half offsets under each exclusion that can apply.
    def _argmin(lo, hi):
        j = int(np.argmin(c[lo:hi])) + lo
        return j, float(c[j])

    variants = {
        "all": _argmin(0, c.shape[0]),
        "no_empty": _argmin(1, c.shape[0]),
        "no_full": _argmin(0, c.shape[0] - 1) if c.shape[0] > 1 else None,
        "no_empty_no_full": _argmin(1, c.shape[0] - 1) if c.shape[0] > 2 else None,
    }

    best = np.inf
    best_mask = 0
    for h in range(full_high + 1):
        sa = sb = 0.0
        for bit in range(high):
            if h >> bit & 1:
                sa += p_a[low + bit]
                sb += p_b[low + bit]
        exclude_empty = h == 0
        exclude_full = not include_full and h == full_high
        if exclude_empty and exclude_full:
            key = "no_empty_no_full"
        elif exclude_empty:
            key = "no_empty"
        elif exclude_full:
            key = "no_full"
        else:
            key = "all"
        if variants[key] is None:
            continue
        j, cmin = variants[key]
        margin = delta + (e_eps * sb - sa) + cmin
        if margin < best:
            best = margin
            best_mask = (h << low) | j
    return float(best), int(best_mask), n_checks


def recompute_margin(p_a, p_b, e_eps: float, delta: float, mask: int) -> float:
    """Direct evaluation of the margin at one subset mask."""
    idx = [i for i in range(len(p_a)) if mask >> i & 1]
    return float(e_eps * np.sum(np.asarray(p_b)[idx]) + delta
                 - np.sum(np.asarray(p_a)[idx]))
