"""Select the pivot kernel at import: compiled extension or pure Python.

``QVOLUME_PURE_PIVOT=1`` forces the pure-Python kernel (useful for testing and
for the benchmark in ``benchmarks/bench_pivot.py``).
"""

import os

if os.environ.get("QVOLUME_PURE_PIVOT") == "1":
    from qvolume._simplex_core_py import BACKEND, pivot_update
else:
    try:
        from qvolume._simplex_core import BACKEND, pivot_update
    except ImportError:
        from qvolume._simplex_core_py import BACKEND, pivot_update

PIVOT_BACKEND = BACKEND

__all__ = ["PIVOT_BACKEND", "pivot_update"]
