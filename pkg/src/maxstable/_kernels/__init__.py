"""Likelihood kernel backend selection.

The compiled extension is preferred when built; the NumPy reference
implementation is the fallback.  Set MAXSTABLE_BACKEND=reference (or =fast)
to force a choice; forcing the compiled backend raises if it is not built.
"""

from __future__ import annotations

import os

from ..errors import CapabilityError, ConfigError
from . import _ref

backend = _ref

_requested = os.environ.get("MAXSTABLE_BACKEND", "").strip().lower()
if _requested in ("", "auto", "fast"):
    try:
        from . import _fast

        backend = _fast
    except ImportError:
        if _requested == "fast":
            raise CapabilityError(
                "MAXSTABLE_BACKEND=fast but the compiled kernel is not built"
            ) from None
elif _requested in ("ref", "reference"):
    backend = _ref
else:
    raise ConfigError(
        f"unknown MAXSTABLE_BACKEND value {_requested!r}; "
        "expected 'auto', 'fast', or 'reference'"
    )

BACKEND_NAME: str = backend.NAME

__all__ = ["backend", "BACKEND_NAME"]
