"""Backend selection for the hot loops.

The compiled extension ``_ckernels`` is used when it imports; otherwise the
pure-Python ``_pykernels`` module is used. Setting ``PSALINK_PURE_PYTHON=1``
forces the fallback. ``BACKEND`` names the active one.
"""
import os

from . import _pykernels as python_backend

compiled_backend = None
if os.environ.get("PSALINK_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

_active = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

PROFILE_CONSTANT = python_backend.PROFILE_CONSTANT
PROFILE_POWER = python_backend.PROFILE_POWER

fold_link = _active.fold_link
gain_bounds = _active.gain_bounds
project_gains = _active.project_gains
rk4_integrate = _active.rk4_integrate


def available_backends():
    """Return ``{name: module}`` for every importable backend."""
    out = {"python": python_backend}
    if compiled_backend is not None:
        out["cython"] = compiled_backend
    return out
