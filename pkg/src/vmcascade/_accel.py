"""Backend switch: numba when available unless ``VMCASCADE_NO_NUMBA=1``.

``VMCASCADE_THREADS`` caps numba's thread pool; nothing else reads the
environment.
"""
import os

USE_NUMBA = os.environ.get("VMCASCADE_NO_NUMBA", "").strip().lower() not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        import numba
    except ImportError:  # pragma: no cover - numba is a declared dependency
        USE_NUMBA = False

if USE_NUMBA:
    _threads = os.environ.get("VMCASCADE_THREADS")
    if _threads:
        numba.set_num_threads(max(1, min(int(_threads), numba.config.NUMBA_NUM_THREADS)))

    def jit(fn=None, **kwargs):
        """``numba.njit`` with this package's defaults."""
        opts = {"cache": True, "nogil": True}
        opts.update(kwargs)
        if fn is None:
            return lambda f: numba.njit(**opts)(f)
        return numba.njit(**opts)(fn)
else:
    def jit(fn=None, **kwargs):
        if fn is None:
            return lambda f: f
        return fn

BACKEND = "numba" if USE_NUMBA else "numpy"
