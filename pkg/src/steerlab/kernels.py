"""Backend selection for the hot kernels.

The compiled extension is preferred; set ``STEERLAB_PURE_PYTHON=1`` to force
the numpy fallback. ``BACKEND`` names the active implementation.
"""
import os

from steerlab import _pykernels

if os.environ.get("STEERLAB_PURE_PYTHON"):
    _impl = _pykernels
else:
    try:
        from steerlab import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

criterion_values = _impl.criterion_values
cap_accumulate = _impl.cap_accumulate


def thread_count():
    """Worker cap from ``STEERLAB_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("STEERLAB_THREADS", "1")))
    except ValueError:
        return 1
