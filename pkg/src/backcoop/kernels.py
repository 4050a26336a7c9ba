"""Select the compiled kernels when available, else the numpy fallback.

Set ``BACKCOOP_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels

python_backend = _pykernels
compiled_backend = None
try:
    from . import _kernels as compiled_backend
except ImportError:  # extension not built
    pass

if compiled_backend is not None and os.environ.get("BACKCOOP_PURE_PYTHON") != "1":
    backend = compiled_backend
    BACKEND = "cython"
else:
    backend = python_backend
    BACKEND = "python"


def get_backend(name=None):
    """Return the kernel module named ``"cython"`` or ``"python"`` (default: selected)."""
    if name is None:
        return backend
    if name == "python":
        return python_backend
    if name == "cython":
        if compiled_backend is None:
            raise ImportError("compiled kernels are not built")
        return compiled_backend
    raise ValueError(f"unknown kernel backend {name!r}")
