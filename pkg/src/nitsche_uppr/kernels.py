"""Hot kernels: compiled extension when available, numpy otherwise.

Set ``NITSCHE_UPPR_PURE=1`` before import to force the numpy versions.
``BACKEND`` names the implementation that was picked.
"""
import os

from . import _kernels_py as python_impl

if os.environ.get("NITSCHE_UPPR_PURE", "") not in ("", "0"):
    _impl = python_impl
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = python_impl
        BACKEND = "python"

polyline_signed_distance = _impl.polyline_signed_distance
ppr_fit = _impl.ppr_fit

__all__ = ["BACKEND", "polyline_signed_distance", "ppr_fit", "python_impl"]
