"""Backend selection for the hot kernels.

Kernels are written once as plain scalar Python and compiled with numba when
it is importable and ``CXBOHM_DISABLE_NUMBA`` is unset (or ``0``).  With the
flag set, the same functions run interpreted and the batched ensemble code
switches to its vectorized numpy path.
"""
import os

ENV_FLAG = "CXBOHM_DISABLE_NUMBA"
_flag = os.environ.get(ENV_FLAG, "0").strip().lower()
_disabled = _flag not in ("", "0", "false", "no")

try:
    if _disabled:
        raise ImportError("numba disabled by CXBOHM_DISABLE_NUMBA")
    import numba as _numba
except ImportError:
    _numba = None
else:
    # the bundled TBB is often too old; prefer OpenMP, then the builtin pool
    _numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

HAS_NUMBA = _numba is not None
BACKEND = "numba" if HAS_NUMBA else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    if HAS_NUMBA:
        kwargs.setdefault("cache", True)
        kwargs.setdefault("nogil", True)
        return _numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn


prange = _numba.prange if HAS_NUMBA else range
