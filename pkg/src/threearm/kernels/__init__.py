"""Hot numerical kernels with a compiled (numba) and a pure-numpy backend.

The backend is chosen once at import time. Set ``THREEARM_BACKEND=numpy`` to
force the numpy path; the numba path is used otherwise when numba imports.
Both modules stay importable so tests and benchmarks can compare them.
"""

import os

from . import _numpy as numpy_backend

try:
    from . import _numba as numba_backend
except ImportError:  # pragma: no cover - numba missing
    numba_backend = None

_requested = os.environ.get("THREEARM_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"THREEARM_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

if _requested == "numba" and numba_backend is not None:
    active = numba_backend
    BACKEND = "numba"
else:
    active = numpy_backend
    BACKEND = "numpy"

tvn_rect = active.tvn_rect
outcome_codes = active.outcome_codes

__all__ = ["BACKEND", "active", "numba_backend", "numpy_backend", "outcome_codes", "tvn_rect"]
