"""Kernel backend selection.

The compiled Cython core is used when it was built; otherwise, or when
``ZONEFIT_PURE_PYTHON=1`` is set, the numpy implementation is used. Both
expose the same functions and agree to rounding error.

``ZONEFIT_THREADS`` caps the compiled kernel's OpenMP threads (0 = one per
CPU). Results do not depend on the thread count.
"""

from __future__ import annotations

import os

from . import _pykernels


def thread_limit() -> int:
    raw = os.environ.get("ZONEFIT_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


if os.environ.get("ZONEFIT_PURE_PYTHON", "") not in ("", "0"):
    _backend = _pykernels
    BACKEND = "numpy"
else:
    try:
        from . import _ckernels as _backend

        BACKEND = "cython"
    except ImportError:
        _backend = _pykernels
        BACKEND = "numpy"

nll = _backend.nll
set_num_threads = getattr(_backend, "set_num_threads", lambda n: None)
set_num_threads(thread_limit())

__all__ = ["BACKEND", "nll", "set_num_threads", "thread_limit"]
