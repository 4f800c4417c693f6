"""Backend selection for the EM kernels.

Prefers the compiled extension when it imported cleanly; set
``NETLINKBENCH_PURE_PYTHON=1`` to force the numpy fallback.  Both
backends expose the same functions and agree to float rounding.
"""

from __future__ import annotations

import os

from . import _em_numpy

_FORCE_NUMPY = os.environ.get("NETLINKBENCH_PURE_PYTHON", "") not in ("", "0")

if not _FORCE_NUMPY:
    try:
        from . import _em_core as _backend
    except ImportError:
        _backend = _em_numpy
else:
    _backend = _em_numpy

BACKEND_NAME: str = _backend.BACKEND_NAME

edge_rates = _backend.edge_rates
u_numerator = _backend.u_numerator
v_numerator = _backend.v_numerator
w_numerator = _backend.w_numerator
indexed_row_sum = _backend.indexed_row_sum
pair_outer_sum = _backend.pair_outer_sum


def available_backends() -> dict:
    """Importable kernel backends by name (for tests and benchmarks)."""
    backends = {"numpy": _em_numpy}
    try:
        from . import _em_core
        backends["cython"] = _em_core
    except ImportError:
        pass
    return backends
