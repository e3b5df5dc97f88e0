"""Hot-loop kernels with a compiled core and a NumPy fallback.

The Cython extension ``protforge.kernels._native`` is selected at import
when it is present and PROTFORGE_PURE_PYTHON is unset/0; otherwise the
NumPy implementations in :mod:`protforge.kernels.pure` are used.  Both
expose the same three functions; ``BACKEND`` names the active one.

``benchmarks/bench_kernels.py`` compares the two backends.
"""

import os

from . import pure

_found_native = None
if os.environ.get("PROTFORGE_PURE_PYTHON", "0") in ("", "0"):
    try:
        from . import _native as _found_native
    except ImportError:
        _found_native = None

_impl = _found_native if _found_native is not None else pure

BACKEND = _impl.BACKEND
hbond_best_two = _impl.hbond_best_two
nearest_centroids = _impl.nearest_centroids
nearest_spatial_neighbors = _impl.nearest_spatial_neighbors

__all__ = [
    "BACKEND",
    "hbond_best_two",
    "nearest_centroids",
    "nearest_spatial_neighbors",
    "pure",
]
