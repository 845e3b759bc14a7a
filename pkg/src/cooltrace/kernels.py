"""Backend selection for the Monte Carlo kernels.

The compiled extension is used when it was built; set
``COOLTRACE_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

from . import _kernels_py

if os.environ.get("COOLTRACE_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels_c as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "cython" if _impl is not _kernels_py else "numpy"

mbac_counts = _impl.mbac_counts
runs_to_success = _impl.runs_to_success
uniforms = _impl.uniforms
