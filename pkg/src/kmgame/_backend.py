"""Kernel selection.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
pure-Python ``_pykernels`` module.  Set ``KMGAME_PURE_PYTHON=1`` to force the
fallback.
"""

import importlib
import os

from kmgame import _pykernels

try:
    _compiled = importlib.import_module("kmgame._ckernels")
except ImportError:
    _compiled = None

if _compiled is not None and not os.environ.get("KMGAME_PURE_PYTHON"):
    BACKEND = "cython"
    _impl = _compiled
else:
    BACKEND = "python"
    _impl = _pykernels

queue_reduce = _impl.queue_reduce
topological_orders = _impl.topological_orders


def get_kernels(name):
    """Return the kernel module called ``name`` ("python" or "cython")."""
    if name == "python":
        return _pykernels
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def available_backends():
    return ["python"] + (["cython"] if _compiled is not None else [])
