"""Backend selection for the element-level hot kernels.

Set ELASTOWAVE_BACKEND=numpy to force the pure-numpy reference path,
or ELASTOWAVE_BACKEND=numba to require the compiled path (raises if
numba is missing).  Unset, the compiled path is used when available.
The choice is made once at import time.
"""

import os

from . import _numpy

try:
    from . import _numba

    HAS_NUMBA = True
except ImportError:
    _numba = None
    HAS_NUMBA = False

_requested = os.environ.get("ELASTOWAVE_BACKEND", "").strip().lower()
if _requested == "numpy":
    _impl = _numpy
elif _requested == "numba":
    if not HAS_NUMBA:
        raise ImportError("ELASTOWAVE_BACKEND=numba but numba is not importable")
    _impl = _numba
elif _requested == "":
    _impl = _numba if HAS_NUMBA else _numpy
else:
    raise ValueError(f"unknown ELASTOWAVE_BACKEND {_requested!r}, expected 'numpy' or 'numba'")

backend_name = "numba" if _impl is _numba else "numpy"

elastic_stiffness_apply = _impl.elastic_stiffness_apply
acoustic_stiffness_apply = _impl.acoustic_stiffness_apply
