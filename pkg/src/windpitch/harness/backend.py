"""Selects the simulation loop: the compiled kernel when importable, else pure Python.

Set ``WINDPITCH_BACKEND=python`` to force the fallback.
"""
import logging
import os

from .. import _pyloop

log = logging.getLogger(__name__)

LOOPS = {"python": _pyloop.run_loop}

try:
    from .. import _kernel
except ImportError:  # extension not built
    _kernel = None
else:
    LOOPS["cython"] = _kernel.run_loop

_requested = os.environ.get("WINDPITCH_BACKEND", "").strip().lower()
if _requested and _requested not in ("python", "cython"):
    raise ImportError(f"WINDPITCH_BACKEND must be 'python' or 'cython', got {_requested!r}")
if _requested == "cython" and _kernel is None:
    raise ImportError("WINDPITCH_BACKEND=cython but windpitch._kernel is not built")

DEFAULT = _requested or ("cython" if _kernel is not None else "python")
if DEFAULT == "python" and _kernel is None:
    log.info("compiled kernel unavailable; using the pure-Python loop")


def get_loop(name=None):
    name = name or DEFAULT
    try:
        return LOOPS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(LOOPS)}") from None
