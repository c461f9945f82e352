"""Backend selection for the hot kernels.

The compiled extension is used when it imports; setting
``JORDAN_CONE_PURE_PYTHON=1`` forces the numpy fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
sym_eigh = _kernels_py.sym_eigh

if os.environ.get("JORDAN_CONE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None
    if _compiled is not None:
        BACKEND = "compiled"
        sym_eigh = _compiled.sym_eigh

__all__ = ["BACKEND", "sym_eigh"]
