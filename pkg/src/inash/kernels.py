"""Loads the kernel module twice: numba-compiled and pure python/numpy.

``K`` is the active namespace per :mod:`inash.backend`; both variants stay
importable side by side (``numba_kernels`` / ``numpy_kernels``) so tests and
the benchmark can compare them in one process.
"""
from __future__ import annotations

import pathlib
import types

from . import backend

_IMPL_PATH = pathlib.Path(__file__).with_name("_kernels_impl.py")


def _load(decorator, tag: str) -> types.SimpleNamespace:
    # The numba variant keeps the real module name so its disk cache can be
    # reloaded in later processes (the cache loader imports the module).
    name = "inash._kernels_impl" if tag == "numba" else f"inash._kernels_{tag}"
    src = _IMPL_PATH.read_text()
    ns: dict = {"jit": decorator, "__name__": name, "__file__": str(_IMPL_PATH)}
    exec(compile(src, str(_IMPL_PATH), "exec"), ns)
    public = {k: v for k, v in ns.items() if not k.startswith("_") and k != "jit"}
    return types.SimpleNamespace(**public)


def _identity(fn):
    return fn


numpy_kernels = _load(_identity, "numpy")

if backend.ACTIVE == "numba":
    import numba

    def _njit(fn):
        return numba.njit(fn, cache=True)

    numba_kernels = _load(_njit, "numba")
    K = numba_kernels
else:  # pragma: no cover - exercised via INASH_BACKEND=numpy
    numba_kernels = None
    K = numpy_kernels

ACTIVE = backend.ACTIVE
