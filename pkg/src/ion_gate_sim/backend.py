"""Kernel backend selection.

The integrator kernels in :mod:`ion_gate_sim._kernels` are written once and
either compiled with numba or run as plain numpy, depending on the
``ION_GATE_SIM_BACKEND`` environment variable:

* ``numba`` (default when numba imports cleanly): kernels are ``@njit``
  compiled with on-disk caching.
* ``numpy``: the same functions run interpreted; numerics are identical.

Set the variable before the first import of the package. ``benchmarks/``
contains a script comparing both paths.
"""

import os
import warnings

_ENV_VAR = "ION_GATE_SIM_BACKEND"
_requested = os.environ.get(_ENV_VAR, "numba").strip().lower()

if _requested not in ("numba", "numpy"):
    raise ValueError(
        f"{_ENV_VAR} must be 'numba' or 'numpy', got {_requested!r}"
    )

if _requested == "numba":
    try:
        import numba  # noqa: F401
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - depends on environment
        warnings.warn(
            "numba unavailable, falling back to the pure-numpy kernels",
            RuntimeWarning,
        )
        BACKEND = "numpy"
else:
    BACKEND = "numpy"

USE_NUMBA = BACKEND == "numba"


def jit(func):
    """Compile ``func`` with numba when the numba backend is active.

    On the numpy backend this is the identity, so the decorated functions
    stay ordinary Python and run on vectorized numpy operations.
    """
    if USE_NUMBA:
        from numba import njit
        return njit(cache=True)(func)
    return func
