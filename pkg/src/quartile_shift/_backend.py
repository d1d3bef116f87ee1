"""Kernel selection.

The compiled ``_kernels`` extension is used when it imports; otherwise the
pure-Python ``_pykernels``.  Set ``QUARTILE_SHIFT_PURE_PYTHON=1`` to force the
fallback.
"""
import os

from . import _pykernels

if os.environ.get("QUARTILE_SHIFT_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

sweep_counts = _impl.sweep_counts
enumerate_tables = _impl.enumerate_tables
mw_frequencies = _impl.mw_frequencies
