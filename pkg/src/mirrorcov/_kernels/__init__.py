"""Kernel backend selection.

The compiled Cython kernels are used when available; set
``MIRRORCOV_KERNELS=python`` to force the numpy fallback (or ``=c`` to
require the extension). ``BACKEND`` reports which one is active.
"""

import os

from . import _pykernels

_choice = os.environ.get("MIRRORCOV_KERNELS", "auto").lower()

if _choice == "python":
    _impl = _pykernels
    BACKEND = "python"
elif _choice == "c":
    from . import _ckernels as _impl
    BACKEND = "c"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "c"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

segment_blocked = _impl.segment_blocked
first_hit = _impl.first_hit
point_in_polygon = _impl.point_in_polygon

__all__ = ["BACKEND", "segment_blocked", "first_hit", "point_in_polygon"]
