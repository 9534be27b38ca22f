"""Backend selection for the column-iterative ascent kernel.

The compiled Cython sweep is used when importable, otherwise the
pure-numpy fallback.  ``HBF_KERNEL=py`` or ``HBF_KERNEL=cy`` forces the
choice (forcing ``cy`` when the extension is missing raises at import).
Both backends implement the same in-place sweep contract and agree to
floating-point tolerance; results are bitwise reproducible within one
backend.
"""

from __future__ import annotations

import os

from . import _cia_py

_FORCED = os.environ.get("HBF_KERNEL", "").strip().lower()

if _FORCED == "py":
    _impl = _cia_py
    BACKEND = "py"
elif _FORCED == "cy":
    from . import _cia_cy as _impl  # noqa: F401  (ImportError is the point)
    BACKEND = "cy"
else:
    try:
        from . import _cia_cy as _impl
        BACKEND = "cy"
    except ImportError:
        _impl = _cia_py
        BACKEND = "py"

cia_sweep = _impl.cia_sweep
