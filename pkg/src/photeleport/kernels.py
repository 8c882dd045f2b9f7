"""Hot-loop kernels, compiled when available.

``BACKEND`` is ``"cython"`` when the extension imported, ``"python"``
otherwise. Set ``PHOTELEPORT_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _wick_py

if os.environ.get("PHOTELEPORT_PURE_PYTHON"):
    _impl = _wick_py
    BACKEND = "python"
else:
    try:
        from . import _wick as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _wick_py
        BACKEND = "python"

count_pairings = _impl.count_pairings
count_pairings_batch = _impl.count_pairings_batch

__all__ = ["BACKEND", "count_pairings", "count_pairings_batch"]
