"""Optional numba acceleration.

Hot kernels are written twice: a loop version that numba compiles and a
vectorized numpy version.  Setting ``PKE_LAB_DISABLE_NUMBA=1`` (or running
without numba installed) routes every dispatcher to the numpy versions.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

ENV_FLAG = "PKE_LAB_DISABLE_NUMBA"


def _disabled_by_env():
    return os.environ.get(ENV_FLAG, "").strip().lower() in ("1", "true", "yes", "on")


HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and not _disabled_by_env()


def njit(fn):
    """Compile lazily with numba when it is importable; identity otherwise."""
    if numba is None:
        return fn
    return numba.njit(cache=True)(fn)


def select(numba_impl, numpy_impl):
    return numba_impl if USE_NUMBA else numpy_impl


def backend():
    return "numba" if USE_NUMBA else "numpy"
