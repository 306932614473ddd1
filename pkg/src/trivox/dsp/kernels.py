"""Kernel backend selection: compiled extension when present, numpy otherwise.

Set TRIVOX_PURE=1 in the environment to force the pure fallback (used by
the benchmark and the cross-backend agreement tests).
"""

from __future__ import annotations

import os

from . import _yin_pure

if os.environ.get("TRIVOX_PURE") == "1":
    _impl = _yin_pure
    BACKEND = "pure"
else:
    try:
        from . import _yin_core as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _yin_pure
        BACKEND = "pure"

difference_matrix = _impl.difference_matrix


def backends() -> dict[str, object]:
    """All importable backends, keyed by name (for benchmarks/tests)."""
    out: dict[str, object] = {"pure": _yin_pure}
    try:
        from . import _yin_core

        out["compiled"] = _yin_core
    except ImportError:
        pass
    return out
