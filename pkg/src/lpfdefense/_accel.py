"""Backend selection for the numeric kernels.

Kernels are written twice: an explicit-loop version compiled with numba
``@njit`` and a vectorized numpy version.  Set ``LPF_DISABLE_NUMBA=1`` to force
the numpy path (numba is also skipped when it is not installed).
"""
import os

_FLAG = os.environ.get("LPF_DISABLE_NUMBA", "").strip().lower()
DISABLED = _FLAG in ("1", "true", "yes", "on")

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is an optional extra
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not DISABLED


def njit(fn):
    """Compile ``fn`` with numba when available, else return it unchanged."""
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
