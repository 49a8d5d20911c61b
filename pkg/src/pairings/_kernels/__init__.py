"""Kernel backend selection.

The compiled extension is preferred when importable; the pure-Python
module is the fallback.  PAIRINGS_BACKEND=python or =c forces the choice
(forcing c raises if the extension is missing, rather than silently
degrading).  Both backends expose the same functions with identical
semantics, including bit-identical floating-point accumulation.
"""

from __future__ import annotations

import os

from . import _pykernels
from ._rng import Stream  # noqa: F401  (re-exported for samplers)

_forced = os.environ.get("PAIRINGS_BACKEND", "").strip().lower()

if _forced == "python":
    impl = _pykernels
    BACKEND = "python"
elif _forced == "c":
    from . import _ckernels as impl  # noqa: F401
    BACKEND = "c"
elif _forced:
    raise ImportError("PAIRINGS_BACKEND must be 'c' or 'python', got %r"
                      % _forced)
else:
    try:
        from . import _ckernels as impl  # noqa: F811
        BACKEND = "c"
    except ImportError:
        impl = _pykernels
        BACKEND = "python"


def backend_name() -> str:
    """Active backend: 'c' for the compiled extension, 'python' otherwise."""
    return BACKEND
