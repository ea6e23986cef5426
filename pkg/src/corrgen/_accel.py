"""Select the compiled kernels when available, else the numpy fallback.

Set ``CORRGEN_PURE_PYTHON=1`` to force the fallback.
"""

import os
import warnings

from . import _fallback

BACKEND = "python"

if os.environ.get("CORRGEN_PURE_PYTHON", "") not in ("", "0"):
    project_points = _fallback.project_points
    chebyshev_basis = _fallback.chebyshev_basis
else:
    try:
        from ._kernels import chebyshev_basis, project_points
        BACKEND = "cython"
    except ImportError as exc:  # extension not built
        warnings.warn(f"corrgen: compiled kernels unavailable ({exc}); using numpy fallback")
        project_points = _fallback.project_points
        chebyshev_basis = _fallback.chebyshev_basis

__all__ = ["BACKEND", "chebyshev_basis", "project_points"]
