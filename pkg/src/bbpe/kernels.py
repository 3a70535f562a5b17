"""Kernel backend chosen at import time.

The compiled ``_kernels`` extension is used when it was built; otherwise the
pure-Python ``_pykernels`` module. Set ``BBPE_PURE_PYTHON=1`` to force the
fallback.
"""

import os

from . import _pykernels

if os.environ.get("BBPE_PURE_PYTHON", "").strip() not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = _impl.BACKEND
MergeState = _impl.MergeState
GreedyMatcher = _impl.GreedyMatcher


def backends():
    """All importable backends, keyed by name."""
    out = {"python": _pykernels}
    try:
        from . import _kernels

        out["cython"] = _kernels
    except ImportError:
        pass
    return out
