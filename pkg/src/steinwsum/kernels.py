"""Backend selection for the numeric hot loops.

The compiled extension is used when importable; set ``STEINWSUM_PURE=1`` to
force the pure-Python kernels.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("STEINWSUM_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

convolve = _impl.convolve
stein_series = _impl.stein_series
stein_solve_batch = _impl.stein_solve_batch

__all__ = ["BACKEND", "convolve", "stein_series", "stein_solve_batch"]
