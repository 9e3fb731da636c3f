"""Kernel backend selection.

The hot numerical loops in ``_kernels`` exist twice: a numba ``@njit`` build and
a vectorized pure-NumPy twin. Which one the package binds at import time is
controlled by the environment variable ``STEINERCHASE_BACKEND``:

* ``numba``  force the compiled kernels (ImportError if numba is missing)
* ``numpy``  force the NumPy fallbacks
* unset      compiled kernels when numba is importable, fallbacks otherwise
"""

import os

_choice = os.environ.get("STEINERCHASE_BACKEND", "").strip().lower()
if _choice not in ("", "numba", "numpy"):
    raise ValueError(
        "STEINERCHASE_BACKEND must be 'numba' or 'numpy', got %r" % (_choice,)
    )

if _choice == "numpy":
    HAS_NUMBA = False
    USE_NUMBA = False
else:
    try:
        import numba  # noqa: F401

        HAS_NUMBA = True
    except ImportError:
        HAS_NUMBA = False
    if _choice == "numba" and not HAS_NUMBA:
        raise ImportError("STEINERCHASE_BACKEND=numba but numba is not importable")
    USE_NUMBA = HAS_NUMBA

BACKEND = "numba" if USE_NUMBA else "numpy"
