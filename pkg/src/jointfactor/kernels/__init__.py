"""Hot enumeration kernels with a compiled core and a pure-Python fallback.

The compiled extension is used when it was built and importable; setting
``JOINTFACTOR_PURE_PYTHON=1`` forces the fallback. ``BACKEND`` names the
active implementation.
"""

import os

from . import _pykernels as python_backend

compiled_backend = None
if os.environ.get("JOINTFACTOR_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:
        compiled_backend = None

_active = compiled_backend or python_backend

BACKEND = _active.BACKEND
rank_mod_p = _active.rank_mod_p
independent_combinations_mod_p = _active.independent_combinations_mod_p

__all__ = [
    "BACKEND",
    "rank_mod_p",
    "independent_combinations_mod_p",
    "python_backend",
    "compiled_backend",
]
