"""Kernel backend selection.

The numeric inner loops (geometry predicates, space-time collision sweeps,
DAG scans) run either as numba-compiled kernels or as the same code
interpreted with plain numpy. The active backend is chosen once at import
from the INASH_BACKEND environment variable:

    INASH_BACKEND=numba   require numba (error if unavailable)
    INASH_BACKEND=numpy   force the pure-python/numpy fallback
    INASH_BACKEND=auto    numba if importable, else numpy (default)
"""
from __future__ import annotations

import os

ENV_VAR = "INASH_BACKEND"


def _numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def select_backend() -> str:
    choice = os.environ.get(ENV_VAR, "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(
            f"{ENV_VAR} must be one of auto|numba|numpy, got {choice!r}"
        )
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        if not _numba_available():
            raise ImportError(f"{ENV_VAR}=numba but numba is not importable")
        return "numba"
    return "numba" if _numba_available() else "numpy"


ACTIVE = select_backend()
