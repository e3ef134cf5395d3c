"""Backend selection for the hot subset-scan kernel.

The compiled extension is preferred when it imported cleanly; otherwise the
NumPy implementation is used.  ``DPCAT_KERNEL=python`` or ``=cython`` forces
a backend (forcing ``cython`` raises if the extension is unavailable).
"""

from __future__ import annotations

import os

import numpy as np

from . import _scan_py

try:
    from . import _subsetscan  # compiled extension, optional
except ImportError:  # pragma: no cover - depends on build environment
    _subsetscan = None

_forced = os.environ.get("DPCAT_KERNEL", "").strip().lower()
if _forced == "python":
    _impl = _scan_py
elif _forced == "cython":
    if _subsetscan is None:
        raise ImportError("DPCAT_KERNEL=cython but the compiled kernel is "
                          "not available; reinstall with a C compiler")
    _impl = _subsetscan
elif _forced:
    raise ImportError(f"unknown DPCAT_KERNEL value {_forced!r}")
else:
    _impl = _subsetscan if _subsetscan is not None else _scan_py

BACKEND: str = _impl.BACKEND_NAME

# The compiled Gray-code walk wins while 2^k fits in cache; beyond that the
# NumPy backend's factorised scan (shared low-half minima) is faster.  Auto
# mode crosses over; a forced backend is honoured unconditionally.
_WIDE_SCAN_BITS = 18


def subset_scan(p_a, p_b, e_eps: float, delta: float,
                include_full: bool = False) -> tuple[float, int, int]:
    """Minimum privacy margin over subsets of an element set.

    Scans every nonempty subset A of the elements (the full set too when
    ``include_full``), evaluating  e_eps * P_b(A) + delta - P_a(A), and
    returns ``(min_margin, witness_mask, n_checks)``.  Ties keep the first
    witness in the backend's scan order; the margin value itself is
    backend-independent to ~1e-15.
    """
    p_a = np.ascontiguousarray(p_a, dtype=np.float64)
    p_b = np.ascontiguousarray(p_b, dtype=np.float64)
    impl = _impl
    if not _forced and impl is not _scan_py and p_a.shape[0] > _WIDE_SCAN_BITS:
        impl = _scan_py
    margin, mask, checks = impl.subset_scan(p_a, p_b, float(e_eps),
                                            float(delta), bool(include_full))
    return float(margin), int(mask), int(checks)


def available_backends() -> list[str]:
    out = ["python"]
    if _subsetscan is not None:
        out.insert(0, "cython")
    return out


def get_backend(name: str):
    """Fetch a backend module by name (used by the kernel benchmark)."""
    if name == "python":
        return _scan_py
    if name == "cython" and _subsetscan is not None:
        return _subsetscan
    raise ValueError(f"backend {name!r} not available")
