"""Pick the compiled core when available, else the numpy fallback.

Set ``KERNLIN_BACKEND=python`` to force the fallback, or ``=cython`` to fail
loudly when the extension is missing.
"""
from __future__ import annotations

import os
from types import ModuleType

from kernlin import _pycore


def load(name: str | None = None) -> ModuleType:
    name = (name or os.environ.get("KERNLIN_BACKEND", "")).strip().lower()
    if name == "python":
        return _pycore
    try:
        from kernlin import _ccore
    except ImportError:
        if name == "cython":
            raise
        return _pycore
    return _ccore


core = load()
