"""Kernel backend selection.

The compiled ``_core`` extension is used when importable; setting the
environment variable ``UDLAD_FORCE_PYTHON=1`` forces the numpy fallback.
"""

import os

from . import _fallback

try:
    from . import _core
except ImportError:  # extension not built
    _core = None

BACKENDS = {"python": _fallback}
if _core is not None:
    BACKENDS["compiled"] = _core

if _core is not None and os.environ.get("UDLAD_FORCE_PYTHON", "") in ("", "0"):
    BACKEND = "compiled"
else:
    BACKEND = "python"


def use(name):
    """Switch the active backend (``"python"`` or ``"compiled"``)."""
    global BACKEND
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}")
    BACKEND = name


def active():
    return BACKENDS[BACKEND]
