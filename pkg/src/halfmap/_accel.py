"""Kernel compilation switch.

Hot scalar kernels are written in the subset of Python that numba accepts.
They are compiled with ``numba.njit`` when numba is importable, unless the
environment variable ``HALFMAP_NUMBA`` is set to ``0`` (or ``false``/``off``),
in which case the very same functions run as plain Python on ``math`` floats.
The flag is read once, at import time.
"""
from __future__ import annotations

import os

_FALSY = {"0", "false", "no", "off"}


def _numba_requested() -> bool:
    return os.environ.get("HALFMAP_NUMBA", "1").strip().lower() not in _FALSY


try:
    if not _numba_requested():
        raise ImportError("disabled by HALFMAP_NUMBA")
    import numba as _numba
except ImportError:
    _numba = None

NUMBA_ENABLED = _numba is not None


def njit(fn):
    """Compile ``fn`` in nopython mode, or return it untouched."""
    if _numba is None:
        return fn
    # fastmath stays off: kernels rely on inf/nan propagation
    return _numba.njit(cache=True)(fn)


def python_impl(fn):
    """The uncompiled Python function behind a (possibly) jitted kernel."""
    return getattr(fn, "py_func", fn)
