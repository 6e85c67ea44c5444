"""Optional numba acceleration.

Hot kernels are decorated with :func:`njit` from this module.  When numba is
importable and ``CASCADE_INDI_NUMBA`` is not set to ``0``/``false``/``off``,
they are compiled; otherwise the same functions run as plain Python/numpy.
The original Python function stays reachable through ``.py_func`` in both
cases, which the benchmark and the equivalence tests rely on.
"""
import os

_flag = os.environ.get("CASCADE_INDI_NUMBA", "1").strip().lower()
_requested = _flag not in ("0", "false", "off", "no")

try:
    if not _requested:
        raise ImportError("numba disabled by CASCADE_INDI_NUMBA")
    import numba as _numba
    USE_NUMBA = True
except ImportError:
    _numba = None
    USE_NUMBA = False


def njit(func=None, **options):
    options.setdefault("cache", True)

    def wrap(f):
        if USE_NUMBA:
            return _numba.njit(**options)(f)
        f.py_func = f
        return f

    if func is None:
        return wrap
    return wrap(func)
