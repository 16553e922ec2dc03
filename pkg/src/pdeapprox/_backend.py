"""Pick the compiled kernels when available, numpy otherwise.

Set ``PDEAPPROX_BACKEND=python`` to force the fallback, ``cython`` to require
the extension.
"""
import os

from . import _fallback

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_choice = os.environ.get("PDEAPPROX_BACKEND", "auto").lower()
if _choice not in ("auto", "python", "cython"):
    raise ImportError(f"PDEAPPROX_BACKEND must be auto, python or cython, got {_choice!r}")
if _choice == "cython" and _compiled is None:
    raise ImportError("PDEAPPROX_BACKEND=cython but the _kernels extension is not built")

if _compiled is not None and _choice != "python":
    kernels = _compiled
    BACKEND = "cython"
else:
    kernels = _fallback
    BACKEND = "python"


def available():
    """Names of the backends importable in this environment."""
    return ["python"] + (["cython"] if _compiled is not None else [])


def get(name):
    """Kernel module for ``name`` (``"python"`` or ``"cython"``)."""
    if name == "python":
        return _fallback
    if name == "cython":
        if _compiled is None:
            raise ImportError("the _kernels extension is not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")
