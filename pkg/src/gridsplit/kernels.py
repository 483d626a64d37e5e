"""Kernel backend selection.

Prefers the compiled extension; falls back to the pure-Python twins
when it is missing.  GRIDSPLIT_PURE=1 forces the fallback (useful for
parity testing and benchmarking).
"""

from __future__ import annotations

import os
import warnings

if os.environ.get("GRIDSPLIT_PURE"):
    from . import _kernels_py as _impl

    BACKEND = "pure"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        warnings.warn("compiled kernels unavailable, falling back to pure Python")
        from . import _kernels_py as _impl

        BACKEND = "pure"

forest_distance = _impl.forest_distance
levenshtein = _impl.levenshtein
