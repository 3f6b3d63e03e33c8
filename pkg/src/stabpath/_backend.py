"""Select the compiled kernels when available, the pure-Python ones otherwise."""

import os

from . import _kernels_py

if os.environ.get("STABPATH_PURE_PYTHON") == "1":
    kernels = _kernels_py
    COMPILED = False
else:
    try:
        from . import _kernels as kernels
        COMPILED = True
    except ImportError:
        kernels = _kernels_py
        COMPILED = False

BACKEND = "compiled" if COMPILED else "python"

__all__ = ["kernels", "COMPILED", "BACKEND"]
