"""Selects the compiled box-product kernel, falling back to pure Python.

Set TORUSTAU_PURE_PYTHON=1 to force the fallback (used by the benchmark
and by backend-parity tests).
"""

import os

if os.environ.get("TORUSTAU_PURE_PYTHON"):
    from . import _charged_py as _impl
    BACKEND = "python"
else:
    try:
        from . import _charged_core as _impl  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:
        from . import _charged_py as _impl
        BACKEND = "python"

zbif_boxes = _impl.zbif_boxes


def backend_name() -> str:
    return BACKEND
