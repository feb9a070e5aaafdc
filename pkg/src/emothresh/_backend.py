"""Kernel backend selection.

The compiled module is used when it was built; ``EMOTHRESH_BACKEND=python``
forces the numpy fallback.
"""
import os

from . import _pykernels

BACKENDS = {"python": _pykernels}

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None
else:
    BACKENDS["cython"] = _ckernels


def _select():
    wanted = os.environ.get("EMOTHRESH_BACKEND", "").strip().lower()
    if wanted:
        if wanted not in BACKENDS:
            raise ImportError(
                f"EMOTHRESH_BACKEND={wanted!r} unavailable; have {sorted(BACKENDS)}"
            )
        return wanted
    return "cython" if "cython" in BACKENDS else "python"


BACKEND = _select()
kernels = BACKENDS[BACKEND]


def get_kernels(name=None):
    """Return the kernel module ``name``, or the active one when ``None``."""
    if name is None:
        return kernels
    return BACKENDS[name]
