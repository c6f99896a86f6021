"""Permanent kernel backend selection.

The compiled Gray-code extension is preferred when it built; otherwise the
vectorized numpy implementation takes over.  Set CSRANK_PURE_PYTHON=1 to
force the fallback (used by the benchmark for comparison).
"""

import os

from . import permanent_py

if os.environ.get("CSRANK_PURE_PYTHON"):
    _impl = permanent_py
    BACKEND = "python"
else:
    try:
        from . import _glynn_ryser as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = permanent_py
        BACKEND = "python"

glynn = _impl.glynn
ryser = _impl.ryser
