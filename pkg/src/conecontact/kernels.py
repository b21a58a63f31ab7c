"""Kernel selection.

The compiled extension is used when it imports; otherwise the numpy
fallback. Set ``CONECONTACT_PURE=1`` to force the fallback.
"""

import os

from . import _fallback

OPTIMAL = _fallback.OPTIMAL
ITERATION_LIMIT = _fallback.ITERATION_LIMIT
UNBOUNDED = _fallback.UNBOUNDED

_compiled = None
if os.environ.get("CONECONTACT_PURE") != "1":
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _fallback

simplex_pivot_loop = _impl.simplex_pivot_loop
pfaffian_batch = _impl.pfaffian_batch


def backends():
    """Map of available backend name to kernel module."""
    out = {"python": _fallback}
    if _compiled is not None:
        out["compiled"] = _compiled
    return out
