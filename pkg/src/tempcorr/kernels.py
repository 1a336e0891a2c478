"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it was built; otherwise the
numpy/pure-Python ``_pykernels`` module is used. Setting
``TEMPCORR_PURE_PYTHON=1`` forces the fallback.
"""
import os

from . import _pykernels as python_backend

try:
    if os.environ.get("TEMPCORR_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python kernels requested")
    from . import _ckernels as compiled_backend
except ImportError:
    compiled_backend = None

_impl = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

run_batch = _impl.run_batch
first_collision = _impl.first_collision
subset_sum_reach = _impl.subset_sum_reach
lex_first_witness = _impl.lex_first_witness


def backends():
    """Available backends as a name -> module mapping."""
    found = {"python": python_backend}
    if compiled_backend is not None:
        found["cython"] = compiled_backend
    return found
