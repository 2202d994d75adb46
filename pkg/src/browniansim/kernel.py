"""Walk-kernel backend selection.

Imports the compiled kernel when available and falls back to the pure-Python
twin otherwise.  Set BROWNIANSIM_PUREPY=1 to force the fallback.  Both
backends produce identical walks from identical seeds.
"""

from __future__ import annotations

import os

if os.environ.get("BROWNIANSIM_PUREPY"):
    from . import _pykernel as _impl
else:
    try:
        from . import _ctkernel as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _pykernel as _impl

BACKEND = _impl.BACKEND
CTWalker = _impl.CTWalker
ct_end_nodes = _impl.ct_end_nodes
ct_extremes = _impl.ct_extremes
first_passage_nodes = _impl.first_passage_nodes
discrete_end_nodes = _impl.discrete_end_nodes
