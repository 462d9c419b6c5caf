"""Kernel selection: compiled extension when importable, numpy otherwise."""

import os

from . import _fallback

if os.environ.get("POLYTV_PURE_PYTHON"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

jacobi_eigh = _impl.jacobi_eigh
standard_normals = _impl.standard_normals
filon_legendre_sum = _impl.filon_legendre_sum

__all__ = ["BACKEND", "jacobi_eigh", "standard_normals", "filon_legendre_sum"]
