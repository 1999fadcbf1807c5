"""Path kernels with a compiled backend and a numpy fallback.

The compiled extension is used when it imports and ``EXTREMAL_DECAY_PURE``
is unset; otherwise the fallback in :mod:`._fallback` is used. Both consume
the random stream in the same order.
"""

from __future__ import annotations

import os

from . import _fallback

if os.environ.get("EXTREMAL_DECAY_PURE"):
    _impl = _fallback
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _fallback

BACKEND = "compiled" if _impl is not _fallback else "python"

gauss_walk_sup = _impl.gauss_walk_sup
onoff_sources = _impl.onoff_sources

__all__ = ["BACKEND", "gauss_walk_sup", "onoff_sources"]
