"""Numba acceleration switch.

Hot kernels (Lanczos resampling, pairwise Thurstone likelihood) are compiled
with numba by default. Setting ``JNDSCALE_NO_NUMBA=1`` selects the vectorized
numpy fallbacks instead; the same happens automatically when numba is not
importable. ``benchmarks/bench_kernels.py`` times both paths.
"""

import os

NUMBA_ENABLED = os.environ.get("JNDSCALE_NO_NUMBA", "").lower() not in ("1", "true", "yes")

if NUMBA_ENABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        NUMBA_ENABLED = False

if not NUMBA_ENABLED:

    def njit(*args, **kwargs):
        """Identity decorator so kernel modules still import cleanly."""
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap
