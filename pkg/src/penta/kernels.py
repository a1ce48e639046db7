"""Kernel selection: compiled extension when built, pure Python otherwise.

Set PENTA_PURE_PYTHON=1 to force the fallback (used by the benchmark and the
kernel-equivalence tests).
"""

import os

if os.environ.get("PENTA_PURE_PYTHON"):
    from penta._kernels_py import IMPLEMENTATION, echelonize, merge_scaled, reduce_row
else:
    try:
        from penta._kernels import IMPLEMENTATION, echelonize, merge_scaled, reduce_row
    except ImportError:
        from penta._kernels_py import (
            IMPLEMENTATION,
            echelonize,
            merge_scaled,
            reduce_row,
        )

__all__ = ["IMPLEMENTATION", "merge_scaled", "reduce_row", "echelonize"]
