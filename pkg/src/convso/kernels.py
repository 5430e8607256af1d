"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
implementation is substituted. Set ``CONVSO_PURE_PYTHON=1`` to force the
fallback.
"""
import os

from . import _kernels_py as python_backend

compiled_backend = None
if not os.environ.get("CONVSO_PURE_PYTHON"):
    try:
        from . import _kernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

_backend = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "compiled" if compiled_backend is not None else "python"

blade_sign_table = _backend.blade_sign_table
blade_product = _backend.blade_product
jacobi_eigh = _backend.jacobi_eigh

__all__ = ["BACKEND", "blade_sign_table", "blade_product", "jacobi_eigh",
           "compiled_backend", "python_backend"]
