"""Backend selection for the hot numeric kernels.

Numba is used when importable unless ``WILTON_DISABLE_NUMBA`` is set to a
truthy value, in which case every kernel runs through its vectorised numpy
implementation instead.
"""
import os

try:
    import numba
    from numba.extending import register_jitable
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

_OFF = ("1", "true", "yes", "on")

USE_NUMBA = HAVE_NUMBA and os.environ.get("WILTON_DISABLE_NUMBA", "").strip().lower() not in _OFF


def njit(func):
    """Compile ``func`` in nopython mode when numba is available."""
    if HAVE_NUMBA:
        return numba.njit(cache=True)(func)
    return func


def jitable(func):
    """Make ``func`` callable both from Python and from inside njit code."""
    if HAVE_NUMBA:
        return register_jitable(func)
    return func


def backend_name(backend=None):
    """Resolve an explicit backend request against the environment default."""
    if backend is None:
        return "numba" if USE_NUMBA else "numpy"
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    return backend
